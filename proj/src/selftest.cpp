#include "qmarket/selftest.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qmarket/agreement_table.hpp"
#include "qmarket/kolmogorov.hpp"
#include "qmarket/pricing.hpp"
#include "qmarket/random.hpp"
#include "qmarket/scop.hpp"
#include "qmarket/sphere_model.hpp"

namespace qmarket {

namespace {

constexpr std::uint64_t kSelftestSeed = 0x5e1f7e57;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

RhoDistribution random_rho(CounterRng& rng) {
    switch (static_cast<int>(rng.uniform() * 4.0)) {
        case 0: return RhoDistribution::uniform();
        case 1: return RhoDistribution::delta(1.8 * rng.uniform() - 0.9);
        case 2: {
            std::vector<double> bp{-1.0, -0.3 + 0.2 * rng.uniform(), 0.4 + 0.2 * rng.uniform(), 1.0};
            std::vector<double> dens{rng.uniform(), rng.uniform() + 0.1, rng.uniform()};
            return RhoDistribution::piecewise(bp, dens);
        }
        default: return RhoDistribution::truncated_gaussian(1.6 * rng.uniform() - 0.8, 0.05 + rng.uniform());
    }
}

SelftestCheck parity_check() {
    CounterRng rng(kSelftestSeed, 1);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        OptionSpec call;
        call.spot = 50.0 + 100.0 * rng.uniform();
        call.strike = 50.0 + 100.0 * rng.uniform();
        call.rate = 0.1 * rng.uniform();
        call.volatility = 0.05 + 0.5 * rng.uniform();
        call.tau = 0.05 + 2.0 * rng.uniform();
        OptionSpec put = call;
        put.kind = OptionKind::Put;
        const double lhs = bs_price(call) - bs_price(put);
        const double rhs = call.spot - call.strike * std::exp(-call.rate * call.tau);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return {"put_call_parity", worst <= 1e-12, "max |C - P - (S - K e^{-r tau})| = " + fmt(worst)};
}

SelftestCheck normalization_check() {
    CounterRng rng(kSelftestSeed, 2);
    int bad = 0;
    for (int k = 0; k < 10000; ++k) {
        const auto rho = random_rho(rng);
        const auto v = sample_uniform(rng);
        const auto u = sample_uniform(rng);
        const auto p = transition_probabilities(rho, v, u);
        if (p.p1 + p.p2 != 1.0 || p.p1 < 0.0 || p.p2 < 0.0) ++bad;
    }
    return {"transition_normalization", bad == 0, std::to_string(bad) + " of 10000 triples with p1 + p2 != 1"};
}

SelftestCheck mu_rows_check() {
    CounterRng rng(kSelftestSeed, 3);
    std::vector<UnitVector3> dirs;
    std::vector<DirectionPrices> prices;
    for (int k = 0; k < 4; ++k) {
        dirs.push_back(sample_uniform(rng));
        prices.push_back({PriceIntervalProperty(100.0 + k, 101.0 + k), PriceIntervalProperty(90.0 - k, 91.0 - k)});
    }
    std::vector<UnitVector3> initial{sample_uniform(rng), sample_uniform(rng)};
    double worst = 0.0;
    for (int variant = 0; variant < 3; ++variant) {
        const RhoDistribution rho = variant == 0   ? RhoDistribution::uniform()
                                    : variant == 1 ? RhoDistribution::delta(0.2)
                                                   : RhoDistribution::truncated_gaussian(-0.1, 0.3);
        const auto scop = sphere_as_scop(rho, dirs, prices, initial);
        const auto& sys = scop.system();
        for (StateId p = 0; p < sys.state_count(); ++p) {
            for (ContextId e = 0; e < sys.context_count(); ++e) {
                double sum = 0.0;
                for (const auto& s : sys.mu(p, e)) sum += s.probability;
                worst = std::max(worst, std::abs(sum - 1.0));
            }
        }
    }
    return {"mu_row_sums", worst <= 1e-12, "max |row sum - 1| = " + fmt(worst)};
}

SelftestCheck eigenstate_check() {
    CounterRng rng(kSelftestSeed, 4);
    int flips = 0;
    for (int k = 0; k < 200; ++k) {
        const auto rho = random_rho(rng);
        const auto u = sample_uniform(rng);
        auto state = simulate_measurement(rho, sample_uniform(rng), u, rng).collapsed_state;
        const auto first = state;
        for (int r = 0; r < 10; ++r) {
            state = simulate_measurement(rho, state, u, rng).collapsed_state;
            if (!(state == first)) ++flips;
        }
    }
    return {"eigenstate_repeatability", flips == 0, std::to_string(flips) + " state changes in 2000 repeats"};
}

SelftestCheck lp_facet_check(double bound) {
    CounterRng rng(kSelftestSeed, 5);
    int disagreements = 0;
    int infeasible = 0;
    for (int k = 0; k < 100; ++k) {
        AgreementTable t(3);
        t.set(0, 1, rng.uniform());
        t.set(0, 2, rng.uniform());
        t.set(1, 2, rng.uniform());
        const bool lp = joint_feasibility(t).feasible;
        const bool facets = !any_violated(detail::bell_facets_n3_with_bound(t, bound));
        if (lp != facets) ++disagreements;
        if (!lp) ++infeasible;
    }
    return {"lp_facet_agreement", disagreements == 0,
            std::to_string(disagreements) + " disagreements on 100 tables (" + std::to_string(infeasible) +
                " infeasible by LP)"};
}

SelftestCheck closed_form_check() {
    const auto rho = RhoDistribution::uniform();
    const UnitVector3 v;
    double worst = 0.0;
    for (int deg = 15; deg <= 165; deg += 15) {
        const double theta = deg * std::numbers::pi / 180.0;
        const auto u = UnitVector3::from_polar(theta, 0.0);
        const double c = std::cos(theta / 2.0);
        worst = std::max(worst, std::abs(transition_probabilities(rho, v, u).p1 - c * c));
    }
    return {"cos2_half_angle", worst <= 1e-12, "max |p1 - cos^2(theta/2)| = " + fmt(worst)};
}

SelftestCheck certificate_check() {
    AgreementTable t(3);
    t.set(0, 1, 0.25);
    t.set(0, 2, 0.25);
    t.set(1, 2, 0.25);
    const auto r = joint_feasibility(t);
    if (r.feasible || !r.certificate) return {"sum_facet_certificate", false, "uniform 0.25 table not rejected"};
    const double slack = r.certificate->slack;
    return {"sum_facet_certificate", std::abs(slack + 0.25) <= 1e-9,
            r.certificate->inequality.describe(3) + ", slack " + fmt(slack)};
}

}  // namespace

bool SelftestReport::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::vector<std::string> SelftestReport::failed() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (!c.passed) out.push_back(c.name);
    return out;
}

nlohmann::json SelftestReport::to_json() const {
    nlohmann::json j;
    j["passed"] = passed();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["failed"] = failed();
    return j;
}

SelftestReport run_selftest(const SelftestOptions& options) {
    SelftestReport r;
    r.checks.push_back(parity_check());
    r.checks.push_back(normalization_check());
    r.checks.push_back(mu_rows_check());
    r.checks.push_back(eigenstate_check());
    r.checks.push_back(lp_facet_check(options.facet_bound));
    r.checks.push_back(closed_form_check());
    r.checks.push_back(certificate_check());
    return r;
}

}  // namespace qmarket
