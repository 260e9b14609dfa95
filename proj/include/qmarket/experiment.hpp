#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qmarket/geometry.hpp"
#include "qmarket/market.hpp"
#include "qmarket/pricing.hpp"
#include "qmarket/rho.hpp"

namespace qmarket::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitParse = 2,
    kExitValidation = 3,
    kExitRuntime = 4,
};

/// Config problem tied to a dotted key path such as "price.strike".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Malformed text, unknown key, missing key or wrong type (exit 2).
class ParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Well-formed value outside the owning module's preconditions (exit 3).
class ValidationError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct OutputPaths {
    std::string dir = ".";
    /// Defaults to "<experiment>_report.json".
    std::string report;
    /// Optional CSV series; empty means none.
    std::string series;
};

struct PriceExperiment {
    OptionSpec option;
    std::uint32_t binomial_steps = 1000;  ///< 0 skips the lattice
    std::uint64_t mc_paths = 1000000;     ///< 0 skips Monte Carlo
    double pde_h_s = 0.1;                 ///< 0 skips the PDE residual
    double pde_h_t = 1e-4;
    std::uint64_t dump_paths = 0;  ///< risk-neutral GBM paths written to the series CSV
    std::uint32_t dump_steps = 252;
};

struct SphereExperiment {
    RhoDistribution rho;
    UnitVector3 state;
    UnitVector3 direction;
    std::uint64_t trials = 1000000;
};

struct BellScanExperiment {
    RhoDistribution rho;
    double theta_deg = 60.0;
    std::uint64_t samples = 100000;
};

struct GbmCompareBlock {
    double drift = 0.0;
    double volatility = 0.2;
    double horizon = 1.0;
    double s0 = 100.0;
};

struct MarketExperiment {
    MarketConfig market;
    std::size_t runs = 1;
    std::optional<GbmCompareBlock> compare_gbm;
};

struct ConvergenceExperiment {
    OptionSpec option;
    std::vector<std::uint32_t> steps{50, 100, 200, 400, 800, 1600};
};

using ExperimentParams =
    std::variant<PriceExperiment, SphereExperiment, BellScanExperiment, MarketExperiment, ConvergenceExperiment>;

struct ExperimentConfig {
    /// price, sphere, bell-scan, market or convergence.
    std::string kind;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    OutputPaths output;
    ExperimentParams params;
};

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> workers;
};

/// Parses the YAML config text. Throws ParseError or ValidationError.
ExperimentConfig parse_config(const std::string& text);

/// The resolved configuration with every default materialized, in the
/// same layout parse_config reads.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct ExperimentOutput {
    nlohmann::json report;
    /// CSV text for output.series, if the experiment produces one.
    std::optional<std::string> series_csv;
};

/// Runs the experiment. Pure given the config: equal configs give equal
/// outputs for any worker count.
ExperimentOutput execute(const ExperimentConfig& cfg);

/// Writes `content` to `path` via a temporary file and rename.
void write_atomically(const std::string& path, const std::string& content);

/// Full `run <config>` subcommand: load, apply overrides, execute, write
/// artifacts. Prints a short summary to `out` and, on failure, a JSON error
/// report to `err`. Returns the process exit code.
int run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out, std::ostream& err);

/// JSON rendering of a summary, shared by reports.
nlohmann::json to_json(const SummaryStats& st);
nlohmann::json to_json(const RhoDistribution& rho);
nlohmann::json to_json(const BellScan& scan);

/// Trade log as CSV with header step,ux,uy,uz,outcome,price.
std::string trades_csv(const std::vector<TradeRecord>& trades);
/// Paths as CSV with header path,time,value.
std::string paths_csv(const std::vector<PriceSeries>& paths);

}  // namespace qmarket::cli
