#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qmarket/geometry.hpp"
#include "qmarket/kolmogorov.hpp"
#include "qmarket/pricing.hpp"
#include "qmarket/rho.hpp"
#include "qmarket/sphere_model.hpp"

namespace qmarket {

/// Each trader reacts to the stock's own current state: the trade
/// direction is the current state rotated by a random angle in
/// [0, noise_angle].
struct LocalRegime {
    double noise_angle = 0.0;
};

/// Shared news vector. It takes a random step of step_angle each trade and,
/// with probability jump_probability, is redrawn uniformly (a news shock).
struct NewsProcess {
    UnitVector3 initial;
    double step_angle = 0.0;
    double jump_probability = 0.0;
};

/// All traders align with the current news vector, up to a random rotation
/// in [0, noise_angle]. noise_angle = 0 is perfect herding.
struct GlobalRegime {
    NewsProcess news;
    double noise_angle = 0.0;
};

using MarketRegime = std::variant<LocalRegime, GlobalRegime>;

struct MarketConfig {
    RhoDistribution rho;
    std::uint32_t n_steps = 250;
    MarketRegime regime = LocalRegime{};
    UnitVector3 price_axis;
    double price_min = 50.0;
    double price_max = 150.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument unless 0 < price_min < price_max, every
    /// angle lies in [0, pi], jump_probability in [0, 1] and n_steps >= 1.
    void validate() const;
};

struct TradeRecord {
    std::uint32_t step = 0;
    UnitVector3 direction;
    MeasurementOutcome outcome;
    double realized_price = 0.0;
};

/// Affine map from the projection on the price axis to [price_min, price_max].
double price_of_state(const MarketConfig& cfg, const UnitVector3& s);

/// One market run. The initial state is drawn uniformly; each trade picks a
/// direction according to the regime and collapses the state with a
/// sphere-model measurement. Depends only on cfg (including the seed).
std::vector<TradeRecord> run_market(const MarketConfig& cfg);

/// Runs member k with seed derive_seed(cfg.seed, k). Members run in
/// parallel; the result is ordered by member index.
std::vector<std::vector<TradeRecord>> run_ensemble(const MarketConfig& cfg, std::size_t members, unsigned workers = 1);

/// Log-return statistics of a price series.
///
/// Returns r_k = ln(P_k / P_{k-1}). mean is the sample mean, variance the
/// unbiased sample variance, excess kurtosis m4 / m2^2 - 3 with central
/// sample moments m_k. The lag-L autocorrelation is the Pearson
/// correlation of (r_1..r_{n-L}) with (r_{1+L}..r_n); an exactly
/// alternating series gives -1 at lag 1. Undefined quantities (zero
/// variance) are empty.
struct SummaryStats {
    std::size_t n_prices = 0;
    std::size_t n_returns = 0;
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> excess_kurtosis;
    std::vector<std::optional<double>> return_autocorrelation;    // lags 1..10
    std::vector<std::optional<double>> abs_return_autocorrelation;  // lags 1..10
    bool kurtosis_undefined() const { return !excess_kurtosis.has_value(); }
};

inline constexpr std::size_t kMinSummaryPrices = 30;
inline constexpr std::size_t kMaxAutocorrelationLag = 10;

/// Throws std::invalid_argument for fewer than kMinSummaryPrices prices or
/// a nonpositive price.
SummaryStats summary_stats_of_prices(const std::vector<double>& prices);
SummaryStats summary_stats_of_returns(const std::vector<double>& returns);
SummaryStats summary_stats(const std::vector<TradeRecord>& trades);

/// Three coplanar directions standing in for the trade directions of a run:
/// the first trade direction, rotated toward the first later direction that
/// differs from it, in steps of the median angle between consecutive trade
/// directions.
std::vector<UnitVector3> representative_triple(const std::vector<UnitVector3>& trade_directions);

/// Kolmogorov verdict for three directions under rho: sequential agreement
/// table, or the hidden-state table for a Delta rho.
BellScan triple_verdict(const RhoDistribution& rho, const std::vector<UnitVector3>& triple,
                        const BellScanOptions& options = {});

struct GbmComparison {
    std::vector<TradeRecord> trades;
    PriceSeries gbm_path;
    SummaryStats sphere;
    SummaryStats gbm;
    std::uint64_t sphere_seed = 0;
    std::uint64_t gbm_seed = 0;
    std::vector<UnitVector3> triple;
    BellScan kolmogorov;
};

/// Runs the market and one GBM path on seeds derived from cfg.seed and
/// reports both side by side, plus the Kolmogorov verdict for a
/// representative triple of the trade directions. Requires
/// gbm.steps == cfg.n_steps.
GbmComparison compare_with_gbm(const MarketConfig& cfg, const GbmParams& gbm);

}  // namespace qmarket
