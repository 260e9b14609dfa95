// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qmarket/experiment.hpp"
#include "qmarket/kolmogorov.hpp"
#include "qmarket/market.hpp"
#include "qmarket/pricing.hpp"
#include "qmarket/scop.hpp"
#include "qmarket/sphere_model.hpp"

using namespace qmarket;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

OptionSpec atm(OptionKind kind = OptionKind::Call) {
    OptionSpec s;
    s.spot = 100;
    s.strike = 100;
    s.rate = 0.05;
    s.volatility = 0.2;
    s.tau = 1.0;
    s.kind = kind;
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void quantum_correspondence(Verdict& v) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rho = RhoDistribution::uniform();
    double worst_analytic = 0.0, worst_z = 0.0;
    for (int deg = 15; deg <= 165; deg += 15) {
        const double theta = deg * kPi / 180.0;
        const auto u = UnitVector3::from_polar(theta, 0.0);
        const double c = std::cos(theta / 2);
        const double p = transition_probabilities(rho, UnitVector3{}, u).p1;
        worst_analytic = std::max(worst_analytic, std::abs(p - c * c));
        const auto est = estimate_o1_frequency(rho, UnitVector3{}, u, 1000000, 1000 + deg);
        const double sigma = std::sqrt(c * c * (1 - c * c) / 1e6);
        worst_z = std::max(worst_z, std::abs(est.frequency() - c * c) / sigma);
    }
    const double elapsed = seconds_since(t0);
    v.require(worst_analytic <= 1e-12, "analytic within 1e-12");
    v.require(worst_z <= 4.0, "Monte Carlo within 4 sigma");
    v.require(elapsed < 5.0, "runtime under 5 s");
    v.detail << "max analytic error " << worst_analytic << ", max |z| " << worst_z << ", " << elapsed << " s";
}

void pair_normalization(Verdict& v) {
    CounterRng rng(2, 0);
    int bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto rho = oracle::random_rho(rng);
        const auto p = transition_probabilities(rho, sample_uniform(rng), sample_uniform(rng));
        bad += p.p1 + p.p2 != 1.0;
    }
    v.require(bad == 0, "p1 + p2 == 1 exactly");
    v.detail << bad << " of 10000 random triples off";
}

void non_kolmogorovian(Verdict& v) {
    const std::vector<UnitVector3> dirs{UnitVector3::from_polar(kPi / 2, 0), UnitVector3::from_polar(kPi / 2, 2 * kPi / 3),
                                        UnitVector3::from_polar(kPi / 2, 4 * kPi / 3)};
    const auto table = agreement_table(RhoDistribution::uniform(), dirs);
    const auto lp = joint_feasibility(table);
    v.require(!lp.feasible, "120 degree uniform table infeasible");
    if (lp.certificate) {
        const auto& c = *lp.certificate;
        v.require(std::abs(c.slack + 0.25) <= 1e-9, "certificate slack -0.25");
        v.require(c.inequality.pair_coefficients == std::vector<double>{1.0, 1.0, 1.0} && c.inequality.constant == -1.0,
                  "certificate is the sum facet");
        v.detail << "certificate '" << c.inequality.describe(3) << "' slack " << c.slack;
    } else {
        v.require(false, "certificate present");
    }
    const auto hidden = hidden_state_table(RhoDistribution::delta(0.0), dirs, 100000, 3);
    v.require(joint_feasibility(hidden).feasible, "Delta hidden-state table feasible");

    CounterRng rng(3, 0);
    int disagree = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto t = oracle::random_table(3, rng);
        disagree += joint_feasibility(t).feasible == any_violated(bell_facets_n3(t));
    }
    v.require(disagree == 0, "LP and facets agree on 1000 tables");
    v.detail << "; hidden-state table feasible; " << disagree << " LP/facet disagreements";
}

void black_scholes(Verdict& v) {
    CounterRng rng(4, 0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto c = oracle::random_spec(rng);
        auto p = c;
        p.kind = OptionKind::Put;
        worst = std::max(worst, std::abs(bs_price(c) - bs_price(p) - (c.spot - c.strike * std::exp(-c.rate * c.tau))));
    }
    v.require(worst <= 1e-12, "parity within 1e-12");
    const auto mc = oracle::reference_mc_call(100, 100, 0.05, 0.2, 1.0, 10000000, 4);
    const double price = bs_price(atm());
    const double z = (price - mc.value) / mc.std_error;
    v.require(std::abs(z) <= 3.0, "ATM within 3 standard errors of 1e7-path oracle");
    v.detail << "parity max error " << worst << "; ATM " << price << " vs oracle " << mc.value << " +- "
             << mc.std_error << " (z " << z << ")";
}

void binomial_convergence(Verdict& v) {
    const double closed = bs_price(atm());
    const double err1000 = std::abs(binomial_price(atm(), 1000) - closed);
    v.require(err1000 < 0.01, "binomial(1000) within 0.01");
    std::vector<double> lx, ly;
    for (std::uint32_t n = 50; n <= 1600; n *= 2) {
        lx.push_back(std::log(n));
        ly.push_back(std::log(std::abs(binomial_price(atm(), n) - closed)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / lx.size();
        my += ly[i] / ly.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    v.require(slope >= -1.3 && slope <= -0.7, "log-log slope in [-1.3, -0.7]");
    v.detail << "|binomial(1000) - closed| " << err1000 << ", slope " << slope;
}

void pde_verification(Verdict& v) {
    const double r = pde_residual(atm(), 0.1, 1e-4);
    const double r_half = pde_residual(atm(), 0.05, 5e-5);
    const double ratio = r / r_half;
    const double intrinsic = pde_residual([](const OptionSpec& s) { return intrinsic_value(s); }, atm(), 0.1, 1e-4);
    v.require(std::abs(r) < 1e-4, "closed-form residual < 1e-4");
    v.require(ratio >= 3.5 && ratio <= 4.5, "refinement ratio in [3.5, 4.5]");
    v.require(std::abs(intrinsic) > 0.1, "intrinsic value residual > 0.1");
    v.detail << "residual " << r << ", refinement ratio " << ratio << ", intrinsic residual " << intrinsic;
}

void gbm_martingale(Verdict& v) {
    GbmParams g{100.0, 0.05, 0.2, 1.0, 1};
    const auto est = discounted_terminal_mean(g, 0.05, 1000000, 7);
    const double z = (est.value - 100.0) / est.std_error;
    v.require(std::abs(z) <= 4.0, "within 4 standard errors");
    v.detail << "mean " << est.value << " +- " << est.std_error << " (z " << z << ")";
}

void scop_contract(Verdict& v) {
    CounterRng rng(8, 0);
    double worst = 0.0;
    for (int r = 0; r < 20; ++r) {
        const auto rho = oracle::random_rho(rng);
        std::vector<UnitVector3> dirs;
        std::vector<DirectionPrices> prices;
        for (int k = 0; k < 4; ++k) {
            dirs.push_back(sample_uniform(rng));
            prices.push_back({PriceIntervalProperty(100 + k, 101 + k), PriceIntervalProperty(90 - k, 91 - k)});
        }
        const auto scop = sphere_as_scop(rho, dirs, prices, {sample_uniform(rng), sample_uniform(rng)});
        const auto& sys = scop.system();
        for (StateId p = 0; p < sys.state_count(); ++p)
            for (ContextId e = 0; e < sys.context_count(); ++e) {
                double sum = 0.0;
                for (const auto& s : sys.mu(p, e)) sum += s.probability;
                worst = std::max(worst, std::abs(sum - 1.0));
            }
    }
    v.require(worst <= 1e-12, "mu rows sum to 1 within 1e-12");

    const auto rho = RhoDistribution::truncated_gaussian(0.1, 0.3);
    const auto u = sample_uniform(rng);
    const auto scop = sphere_as_scop(rho, {u}, {{PriceIntervalProperty(100, 110), PriceIntervalProperty(80, 90)}},
                                     {sample_uniform(rng)});
    const auto first = scop.system().transition(scop.initial_state(0), 0, rng).state;
    int changed = 0;
    for (int i = 0; i < 10000; ++i) changed += scop.system().transition(first, 0, rng).state != first;
    v.require(changed == 0, "eigenstate repeatability");
    v.detail << "max |row sum - 1| " << worst << ", " << changed << " of 10000 repeats changed state";
}

std::string dump_execute(const std::string& yaml, unsigned workers) {
    auto cfg = cli::parse_config(yaml);
    cfg.workers = workers;
    const auto out = cli::execute(cfg);
    return out.report.dump(2) + out.series_csv.value_or("");
}

void determinism(Verdict& v) {
    int mismatches = 0;
    auto check = [&](bool same, const char* what) {
        if (!same) {
            ++mismatches;
            v.detail << " mismatch in " << what << ";";
        }
    };
    const auto rho = RhoDistribution::truncated_gaussian(-0.2, 0.5);
    const auto u = UnitVector3::from_polar(1.2, 0.4);
    check(estimate_o1_frequency(rho, UnitVector3{}, u, 200000, 9, 1).o1_count ==
              estimate_o1_frequency(rho, UnitVector3{}, u, 200000, 9, 8).o1_count,
          "estimate_o1_frequency");
    const auto triple = coplanar_triple(kPi / 4);
    check(hidden_state_table(RhoDistribution::delta(0.1), triple, 100000, 9, 1) ==
              hidden_state_table(RhoDistribution::delta(0.1), triple, 100000, 9, 8),
          "hidden_state_table");
    GbmParams g{100.0, 0.03, 0.3, 2.0, 50};
    const auto p1 = gbm_paths(g, 2000, 9, 1), p8 = gbm_paths(g, 2000, 9, 8);
    bool same_paths = p1.size() == p8.size();
    for (std::size_t i = 0; same_paths && i < p1.size(); ++i) same_paths = p1[i].values == p8[i].values;
    check(same_paths, "gbm_paths");
    const auto m1 = mc_price(atm(), 300000, 9, 1), m8 = mc_price(atm(), 300000, 9, 8);
    check(m1.value == m8.value && m1.std_error == m8.std_error, "mc_price");
    const auto d1 = discounted_terminal_mean(g, 0.03, 300000, 9, 1), d8 = discounted_terminal_mean(g, 0.03, 300000, 9, 8);
    check(d1.value == d8.value && d1.std_error == d8.std_error, "discounted_terminal_mean");

    const std::vector<std::string> configs{
        "experiment: price\nseed: 9\noutput: {series: p.csv}\nprice: {spot: 100, strike: 95, rate: 0.02, "
        "volatility: 0.25, tau: 0.7, mc_paths: 200000, dump_paths: 20, dump_steps: 30}\n",
        "experiment: sphere\nseed: 9\nsphere: {rho: {type: truncated_gaussian, center: 0.2, width: 0.3}, "
        "state: [0, 0, 1], direction: {theta_deg: 80}, trials: 200000}\n",
        "experiment: bell-scan\nseed: 9\nbell-scan: {rho: {type: delta, x0: 0.1}, theta_deg: 50, samples: 100000}\n",
        "experiment: market\nseed: 9\noutput: {series: t.csv}\nmarket: {rho: uniform, steps: 400, runs: 8, "
        "regime: {type: global, noise_angle_deg: 25, news: {step_angle_deg: 3, jump_probability: 0.01}}, "
        "compare_gbm: {drift: 0.02, volatility: 0.3}}\n",
        "experiment: convergence\nconvergence: {option: {spot: 100, strike: 100, rate: 0.05, volatility: 0.2, tau: 1}}\n",
    };
    for (const auto& c : configs) check(dump_execute(c, 1) == dump_execute(c, 8), c.substr(12, 12).c_str());
    v.require(mismatches == 0, "byte-identical output at 1 and 8 workers");
    v.detail << " " << mismatches << " mismatches across 5 library simulators and 5 experiment reports";
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
        {"quantum correspondence", quantum_correspondence},
        {"pair normalization", pair_normalization},
        {"non-Kolmogorovian agreement tables", non_kolmogorovian},
        {"Black-Scholes parity and benchmark", black_scholes},
        {"binomial convergence", binomial_convergence},
        {"PDE verification", pde_verification},
        {"GBM martingale", gbm_martingale},
        {"SCoP contract", scop_contract},
        {"determinism across worker counts", determinism},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        v.detail.precision(6);
        try {
            criteria[k].second(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << " exception: " << e.what();
        }
        failures += !v.pass;
        std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, v.detail.str().c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
