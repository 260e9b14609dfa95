#include "qmarket/market.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qmarket/parallel.hpp"

namespace qmarket {

namespace {

bool valid_angle(double a) { return a >= 0.0 && a <= std::numbers::pi; }

std::optional<double> lagged_correlation(const std::vector<double>& x, std::size_t lag) {
    if (x.size() <= lag + 1) return std::nullopt;
    const std::size_t m = x.size() - lag;
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mean_a += x[i];
        mean_b += x[i + lag];
    }
    mean_a /= static_cast<double>(m);
    mean_b /= static_cast<double>(m);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double a = x[i] - mean_a;
        const double b = x[i + lag] - mean_b;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

void MarketConfig::validate() const {
    if (n_steps < 1) throw std::invalid_argument("market needs at least one step");
    if (!std::isfinite(price_min) || !std::isfinite(price_max)) throw std::invalid_argument("prices must be finite");
    if (!(price_min > 0.0)) throw std::invalid_argument("price_min must be positive");
    if (!(price_min < price_max)) throw std::invalid_argument("price_min must be below price_max");
    std::visit(
        [](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if (!valid_angle(r.noise_angle)) throw std::invalid_argument("noise angle must lie in [0, pi]");
            if constexpr (std::is_same_v<R, GlobalRegime>) {
                if (!valid_angle(r.news.step_angle)) throw std::invalid_argument("news step angle must lie in [0, pi]");
                if (!(r.news.jump_probability >= 0.0 && r.news.jump_probability <= 1.0)) {
                    throw std::invalid_argument("news jump probability must lie in [0, 1]");
                }
            }
        },
        regime);
}

double price_of_state(const MarketConfig& cfg, const UnitVector3& s) {
    const double t = 0.5 * (1.0 + dot(s, cfg.price_axis));
    return std::lerp(cfg.price_min, cfg.price_max, t);
}

std::vector<TradeRecord> run_market(const MarketConfig& cfg) {
    cfg.validate();
    CounterRng rng(cfg.seed, 0);
    UnitVector3 state = sample_uniform(rng);
    const auto* global = std::get_if<GlobalRegime>(&cfg.regime);
    UnitVector3 news = global ? global->news.initial : UnitVector3{};
    const double noise = std::visit([](const auto& r) { return r.noise_angle; }, cfg.regime);

    std::vector<TradeRecord> trades;
    trades.reserve(cfg.n_steps);
    for (std::uint32_t step = 0; step < cfg.n_steps; ++step) {
        UnitVector3 base = state;
        if (global) {
            if (step > 0) {
                if (rng.uniform() < global->news.jump_probability) {
                    news = sample_uniform(rng);
                } else {
                    news = rotate_random_axis(news, global->news.step_angle, rng);
                }
            }
            base = news;
        }
        const UnitVector3 direction = rotate_random_axis(base, noise * rng.uniform(), rng);
        MeasurementOutcome outcome = simulate_measurement(cfg.rho, state, direction, rng);
        state = outcome.collapsed_state;
        trades.push_back({step, direction, outcome, price_of_state(cfg, state)});
    }
    return trades;
}

std::vector<std::vector<TradeRecord>> run_ensemble(const MarketConfig& cfg, std::size_t members, unsigned workers) {
    cfg.validate();
    std::vector<std::vector<TradeRecord>> runs(members);
    parallel_for_chunks(members, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            MarketConfig member = cfg;
            member.seed = derive_seed(cfg.seed, k);
            runs[k] = run_market(member);
        }
    });
    return runs;
}

SummaryStats summary_stats_of_returns(const std::vector<double>& returns) {
    if (returns.size() + 1 < kMinSummaryPrices) {
        throw std::invalid_argument("summary statistics need at least " + std::to_string(kMinSummaryPrices) +
                                    " prices");
    }
    SummaryStats st;
    const auto n = static_cast<double>(returns.size());
    st.n_returns = returns.size();
    st.n_prices = returns.size() + 1;
    for (double r : returns) st.mean += r;
    st.mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double r : returns) {
        const double d = r - st.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    st.variance = m2 / (n - 1.0);
    m2 /= n;
    m4 /= n;
    if (m2 > 0.0) st.excess_kurtosis = m4 / (m2 * m2) - 3.0;

    std::vector<double> abs_returns(returns.size());
    std::transform(returns.begin(), returns.end(), abs_returns.begin(), [](double r) { return std::abs(r); });
    for (std::size_t lag = 1; lag <= kMaxAutocorrelationLag; ++lag) {
        st.return_autocorrelation.push_back(lagged_correlation(returns, lag));
        st.abs_return_autocorrelation.push_back(lagged_correlation(abs_returns, lag));
    }
    return st;
}

SummaryStats summary_stats_of_prices(const std::vector<double>& prices) {
    if (prices.size() < kMinSummaryPrices) {
        throw std::invalid_argument("summary statistics need at least " + std::to_string(kMinSummaryPrices) +
                                    " prices");
    }
    std::vector<double> returns;
    returns.reserve(prices.size() - 1);
    for (std::size_t k = 0; k < prices.size(); ++k) {
        if (!(prices[k] > 0.0)) throw std::invalid_argument("summary statistics need positive prices");
        if (k > 0) returns.push_back(std::log(prices[k] / prices[k - 1]));
    }
    return summary_stats_of_returns(returns);
}

SummaryStats summary_stats(const std::vector<TradeRecord>& trades) {
    std::vector<double> prices;
    prices.reserve(trades.size());
    for (const auto& t : trades) prices.push_back(t.realized_price);
    return summary_stats_of_prices(prices);
}

std::vector<UnitVector3> representative_triple(const std::vector<UnitVector3>& dirs) {
    if (dirs.empty()) throw std::invalid_argument("representative triple needs at least one direction");
    const UnitVector3& first = dirs.front();
    std::vector<double> steps;
    for (std::size_t k = 1; k < dirs.size(); ++k) steps.push_back(angle_between(dirs[k - 1], dirs[k]));
    double spacing = 0.0;
    if (!steps.empty()) {
        auto mid = steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2);
        std::nth_element(steps.begin(), mid, steps.end());
        spacing = *mid;
    }
    UnitVector3 toward = any_orthogonal(first);
    for (const auto& d : dirs) {
        if (angle_between(first, d) > 1e-9 && angle_between(first, d) < std::numbers::pi - 1e-9) {
            toward = d;
            break;
        }
    }
    return {first, rotate_toward(first, toward, spacing), rotate_toward(first, toward, 2.0 * spacing)};
}

BellScan triple_verdict(const RhoDistribution& rho, const std::vector<UnitVector3>& triple,
                        const BellScanOptions& options) {
    if (triple.size() != 3) throw std::invalid_argument("triple verdict needs exactly three directions");
    const double theta = angle_between(triple[0], triple[1]);
    if (rho.is_delta()) {
        return bell_scan_table(theta, triple, "hidden_state",
                               hidden_state_table(rho, triple, options.samples, options.seed, options.workers));
    }
    return bell_scan_table(theta, triple, "sequential", agreement_table(rho, triple));
}

GbmComparison compare_with_gbm(const MarketConfig& cfg, const GbmParams& gbm) {
    cfg.validate();
    gbm.validate();
    if (gbm.steps != cfg.n_steps) throw std::invalid_argument("GBM steps must match market steps");
    GbmComparison out;
    out.sphere_seed = derive_seed(cfg.seed, 0);
    out.gbm_seed = derive_seed(cfg.seed, 1);
    MarketConfig sphere_cfg = cfg;
    sphere_cfg.seed = out.sphere_seed;
    out.trades = run_market(sphere_cfg);
    out.gbm_path = gbm_paths(gbm, 1, out.gbm_seed).front();
    out.sphere = summary_stats(out.trades);
    out.gbm = summary_stats_of_prices(out.gbm_path.values);

    std::vector<UnitVector3> dirs;
    dirs.reserve(out.trades.size());
    for (const auto& t : out.trades) dirs.push_back(t.direction);
    out.triple = representative_triple(dirs);
    BellScanOptions options;
    options.seed = derive_seed(cfg.seed, 2);
    out.kolmogorov = triple_verdict(cfg.rho, out.triple, options);
    return out;
}

}  // namespace qmarket
