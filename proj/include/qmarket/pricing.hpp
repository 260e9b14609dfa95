#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmarket {

enum class OptionKind { Call, Put };
/// American is accepted by the parser so it can be rejected with a clear
/// message; no pricer supports early exercise.
enum class ExerciseStyle { European, American };

const char* to_string(OptionKind k);
const char* to_string(ExerciseStyle s);

/// Contract plus market parameters. tau is the time to expiry T - t in years.
struct OptionSpec {
    double spot = 100.0;
    double strike = 100.0;
    double rate = 0.0;
    double volatility = 0.2;
    double tau = 1.0;
    OptionKind kind = OptionKind::Call;
    ExerciseStyle style = ExerciseStyle::European;

    /// Throws std::invalid_argument unless S > 0, K > 0, sigma >= 0,
    /// tau >= 0 and all fields finite.
    void validate() const;
};

/// d1/d2 are undefined when sigma * sqrt(tau) == 0.
class DegenerateParameters : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Diffusion dS = mu S dt + sigma S dW sampled on `steps` equal steps.
struct GbmParams {
    double s0 = 100.0;
    double drift = 0.0;
    double volatility = 0.2;
    double horizon = 1.0;
    std::uint32_t steps = 1;

    void validate() const;
};

enum class GbmScheme {
    /// S_{k+1} = S_k exp((mu - sigma^2/2) dt + sigma sqrt(dt) Z): no
    /// discretization bias.
    Exact,
    /// S_{k+1} = S_k (1 + mu dt + sigma sqrt(dt) Z), for illustration only.
    /// Throws std::runtime_error if a step produces a non-positive price.
    Euler,
};

struct PriceSeries {
    std::vector<double> times;
    std::vector<double> values;
};

double intrinsic_value(const OptionSpec& spec);

/// Z = V - I. Negative for deep in-the-money European puts, where the
/// discounted strike is worth less than the immediate payoff.
double time_value(const OptionSpec& spec, double total_value);

/// Standard normal CDF via erfc.
double norm_cdf(double t);

struct D1D2 {
    double d1;
    double d2;
};

/// Throws DegenerateParameters when sigma * sqrt(tau) == 0.
D1D2 d1_d2(const OptionSpec& spec);

/// Closed-form European price. tau == 0 returns the intrinsic value; sigma == 0
/// returns the discounted deterministic payoff.
double bs_price(const OptionSpec& spec);

/// Cox-Ross-Rubinstein lattice with backward induction. Requires steps >= 1
/// and sigma > 0; throws std::domain_error if the risk-neutral up weight
/// falls outside [0, 1]. tau == 0 returns the intrinsic value.
double binomial_price(const OptionSpec& spec, std::uint32_t steps);

/// Paths indexed 0..n_paths-1; path k uses stream k of `seed`, so output is
/// identical for any worker count.
std::vector<PriceSeries> gbm_paths(const GbmParams& params, std::size_t n_paths, std::uint64_t seed,
                                   unsigned workers = 1, GbmScheme scheme = GbmScheme::Exact);

/// Terminal values of the same paths gbm_paths would produce.
std::vector<double> gbm_terminal_values(const GbmParams& params, std::size_t n_paths, std::uint64_t seed,
                                        unsigned workers = 1, GbmScheme scheme = GbmScheme::Exact);

struct MonteCarloEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t paths = 0;
};

/// Risk-neutral Monte Carlo: exact terminal sampling with drift r,
/// discounted payoff averaged over `paths` draws.
MonteCarloEstimate mc_price(const OptionSpec& spec, std::uint64_t paths, std::uint64_t seed, unsigned workers = 1);

/// Mean of exp(-rate * horizon) S_T over n_paths exact GBM paths.
MonteCarloEstimate discounted_terminal_mean(const GbmParams& params, double rate, std::uint64_t n_paths,
                                            std::uint64_t seed, unsigned workers = 1);

/// Black-Scholes operator dV/dt + sigma^2 S^2 V_SS / 2 + r S V_S - r V
/// applied to `price` by central differences, with t = T - tau.
/// Requires sigma > 0, tau > h_t, h_t > 0 and h_S >= 1e-4 S (below that the
/// second difference loses too many digits); throws std::invalid_argument
/// otherwise.
double pde_residual(const std::function<double(const OptionSpec&)>& price, const OptionSpec& spec, double h_s,
                    double h_t);

/// pde_residual of bs_price.
double pde_residual(const OptionSpec& spec, double h_s, double h_t);

}  // namespace qmarket
