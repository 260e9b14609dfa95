#include "qmarket/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmarket/parallel.hpp"
#include "qmarket/random.hpp"

namespace qmarket {

namespace {

void require_european(const OptionSpec& spec) {
    if (spec.style != ExerciseStyle::European) {
        throw std::invalid_argument("only European options are supported");
    }
}

double payoff(OptionKind kind, double spot, double strike) {
    return kind == OptionKind::Call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

const char* to_string(OptionKind k) { return k == OptionKind::Call ? "call" : "put"; }
const char* to_string(ExerciseStyle s) { return s == ExerciseStyle::European ? "european" : "american"; }

void OptionSpec::validate() const {
    if (!finite(spot) || !finite(strike) || !finite(rate) || !finite(volatility) || !finite(tau)) {
        throw std::invalid_argument("option parameters must be finite");
    }
    if (!(spot > 0.0)) throw std::invalid_argument("spot must be positive");
    if (!(strike > 0.0)) throw std::invalid_argument("strike must be positive");
    if (volatility < 0.0) throw std::invalid_argument("volatility must be nonnegative");
    if (tau < 0.0) throw std::invalid_argument("time to expiry must be nonnegative");
}

void GbmParams::validate() const {
    if (!finite(s0) || !finite(drift) || !finite(volatility) || !finite(horizon)) {
        throw std::invalid_argument("GBM parameters must be finite");
    }
    if (!(s0 > 0.0)) throw std::invalid_argument("s0 must be positive");
    if (volatility < 0.0) throw std::invalid_argument("volatility must be nonnegative");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (steps < 1) throw std::invalid_argument("steps must be at least 1");
}

double intrinsic_value(const OptionSpec& spec) { return payoff(spec.kind, spec.spot, spec.strike); }

double time_value(const OptionSpec& spec, double total_value) { return total_value - intrinsic_value(spec); }

double norm_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

D1D2 d1_d2(const OptionSpec& spec) {
    spec.validate();
    const double vol_sqrt_tau = spec.volatility * std::sqrt(spec.tau);
    if (vol_sqrt_tau == 0.0) throw DegenerateParameters("d1/d2 undefined when sigma * sqrt(tau) == 0");
    const double d1 =
        (std::log(spec.spot / spec.strike) + (spec.rate + 0.5 * spec.volatility * spec.volatility) * spec.tau) /
        vol_sqrt_tau;
    return {d1, d1 - vol_sqrt_tau};
}

double bs_price(const OptionSpec& spec) {
    spec.validate();
    require_european(spec);
    if (spec.tau == 0.0) return intrinsic_value(spec);
    const double discounted_strike = spec.strike * std::exp(-spec.rate * spec.tau);
    if (spec.volatility == 0.0) return payoff(spec.kind, spec.spot, discounted_strike);
    const auto [d1, d2] = d1_d2(spec);
    if (spec.kind == OptionKind::Call) return norm_cdf(d1) * spec.spot - norm_cdf(d2) * discounted_strike;
    return norm_cdf(-d2) * discounted_strike - norm_cdf(-d1) * spec.spot;
}

double binomial_price(const OptionSpec& spec, std::uint32_t steps) {
    spec.validate();
    require_european(spec);
    if (steps < 1) throw std::invalid_argument("binomial model needs at least one step");
    if (!(spec.volatility > 0.0)) throw std::invalid_argument("binomial model needs positive volatility");
    if (spec.tau == 0.0) return intrinsic_value(spec);

    const double dt = spec.tau / steps;
    const double up = std::exp(spec.volatility * std::sqrt(dt));
    const double down = 1.0 / up;
    const double growth = std::exp(spec.rate * dt);
    const double p = (growth - down) / (up - down);
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("binomial model: risk-neutral weight outside [0, 1] (arbitrage)");
    }
    const double discount = 1.0 / growth;

    std::vector<double> values(steps + 1);
    for (std::uint32_t j = 0; j <= steps; ++j) {
        // j up-moves out of `steps`.
        const double s = spec.spot * std::pow(up, 2.0 * static_cast<double>(j) - steps);
        values[j] = payoff(spec.kind, s, spec.strike);
    }
    for (std::uint32_t n = steps; n > 0; --n) {
        for (std::uint32_t j = 0; j < n; ++j) values[j] = discount * (p * values[j + 1] + (1.0 - p) * values[j]);
    }
    return values[0];
}

namespace {

template <typename Visit>
void step_path(const GbmParams& params, std::uint64_t seed, std::uint64_t path, GbmScheme scheme, Visit&& visit) {
    CounterRng rng(seed, path);
    const double dt = params.horizon / params.steps;
    const double sqrt_dt = std::sqrt(dt);
    const double log_drift = (params.drift - 0.5 * params.volatility * params.volatility) * dt;
    double s = params.s0;
    visit(0u, s);
    for (std::uint32_t k = 1; k <= params.steps; ++k) {
        const double z = rng.normal();
        if (scheme == GbmScheme::Exact) {
            s *= std::exp(log_drift + params.volatility * sqrt_dt * z);
        } else {
            s *= 1.0 + params.drift * dt + params.volatility * sqrt_dt * z;
            if (!(s > 0.0)) throw std::runtime_error("Euler step produced a non-positive price; use more steps");
        }
        visit(k, s);
    }
}

}  // namespace

std::vector<PriceSeries> gbm_paths(const GbmParams& params, std::size_t n_paths, std::uint64_t seed, unsigned workers,
                                   GbmScheme scheme) {
    params.validate();
    std::vector<PriceSeries> paths(n_paths);
    parallel_for_chunks(n_paths, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            PriceSeries& series = paths[i];
            series.times.resize(params.steps + 1);
            series.values.resize(params.steps + 1);
            step_path(params, seed, i, scheme, [&](std::uint32_t k, double s) {
                series.times[k] = params.horizon * k / params.steps;
                series.values[k] = s;
            });
        }
    });
    return paths;
}

std::vector<double> gbm_terminal_values(const GbmParams& params, std::size_t n_paths, std::uint64_t seed,
                                        unsigned workers, GbmScheme scheme) {
    params.validate();
    std::vector<double> terminal(n_paths);
    parallel_for_chunks(n_paths, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            step_path(params, seed, i, scheme, [&](std::uint32_t, double s) { terminal[i] = s; });
        }
    });
    return terminal;
}

namespace {

MonteCarloEstimate from_sums(const std::array<double, 2>& sums, std::uint64_t n) {
    const double mean = sums[0] / static_cast<double>(n);
    const double var = n > 1 ? std::max(0.0, (sums[1] - n * mean * mean) / static_cast<double>(n - 1)) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

}  // namespace

MonteCarloEstimate mc_price(const OptionSpec& spec, std::uint64_t paths, std::uint64_t seed, unsigned workers) {
    spec.validate();
    require_european(spec);
    if (paths < 2) throw std::invalid_argument("Monte Carlo pricer needs at least two paths");
    const double discount = std::exp(-spec.rate * spec.tau);
    const double log_drift = (spec.rate - 0.5 * spec.volatility * spec.volatility) * spec.tau;
    const double vol = spec.volatility * std::sqrt(spec.tau);
    const auto sums = blocked_sums<2>(paths, workers, [&](std::size_t i) {
        CounterRng rng(seed, i);
        const double terminal = spec.spot * std::exp(log_drift + vol * rng.normal());
        const double x = discount * payoff(spec.kind, terminal, spec.strike);
        return std::array<double, 2>{x, x * x};
    });
    return from_sums(sums, paths);
}

MonteCarloEstimate discounted_terminal_mean(const GbmParams& params, double rate, std::uint64_t n_paths,
                                            std::uint64_t seed, unsigned workers) {
    params.validate();
    if (n_paths < 2) throw std::invalid_argument("need at least two paths");
    const double discount = std::exp(-rate * params.horizon);
    const auto sums = blocked_sums<2>(n_paths, workers, [&](std::size_t i) {
        double terminal = 0.0;
        step_path(params, seed, i, GbmScheme::Exact, [&](std::uint32_t, double s) { terminal = s; });
        const double x = discount * terminal;
        return std::array<double, 2>{x, x * x};
    });
    return from_sums(sums, n_paths);
}

double pde_residual(const std::function<double(const OptionSpec&)>& price, const OptionSpec& spec, double h_s,
                    double h_t) {
    spec.validate();
    if (!(spec.volatility > 0.0)) throw std::invalid_argument("pde residual needs positive volatility");
    if (!(h_t > 0.0) || !(spec.tau > h_t)) throw std::invalid_argument("pde residual needs 0 < h_t < tau");
    if (!(h_s >= 1e-4 * spec.spot)) throw std::invalid_argument("pde residual: h_S below 1e-4 * S");
    if (!(h_s < spec.spot)) throw std::invalid_argument("pde residual: h_S must be smaller than S");

    auto at = [&](double ds, double dtau) {
        OptionSpec s = spec;
        s.spot += ds;
        s.tau += dtau;
        return price(s);
    };
    const double v = at(0.0, 0.0);
    const double v_up = at(h_s, 0.0);
    const double v_down = at(-h_s, 0.0);
    const double dv_ds = (v_up - v_down) / (2.0 * h_s);
    const double d2v_ds2 = (v_up - 2.0 * v + v_down) / (h_s * h_s);
    // t = T - tau, so advancing t shortens tau.
    const double dv_dt = (at(0.0, -h_t) - at(0.0, h_t)) / (2.0 * h_t);
    const double s = spec.spot;
    return dv_dt + 0.5 * spec.volatility * spec.volatility * s * s * d2v_ds2 + spec.rate * s * dv_ds - spec.rate * v;
}

double pde_residual(const OptionSpec& spec, double h_s, double h_t) {
    return pde_residual([](const OptionSpec& s) { return bs_price(s); }, spec, h_s, h_t);
}

}  // namespace qmarket
