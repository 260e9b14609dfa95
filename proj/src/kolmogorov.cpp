#include "qmarket/kolmogorov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qmarket/simplex.hpp"
#include "qmarket/sphere_model.hpp"

namespace qmarket {

namespace {

std::vector<std::pair<std::size_t, std::size_t>> pair_list(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    return pairs;
}

void append_term(std::ostringstream& os, double coef, const std::string& name, bool& first) {
    if (coef == 0.0) return;
    const double mag = std::abs(coef);
    if (first) {
        if (coef < 0) os << "-";
    } else {
        os << (coef < 0 ? " - " : " + ");
    }
    if (name.empty() || mag != 1.0) os << mag;
    if (!name.empty()) os << (mag != 1.0 ? "*" : "") << name;
    first = false;
}

}  // namespace

double LinearInequality::evaluate(const AgreementTable& table) const {
    const auto q = table.upper_triangle();
    if (q.size() != pair_coefficients.size()) throw std::invalid_argument("inequality size does not match table");
    double s = constant;
    for (std::size_t k = 0; k < q.size(); ++k) s += pair_coefficients[k] * q[k];
    return s;
}

std::string LinearInequality::describe(std::size_t n) const {
    std::ostringstream os;
    bool first = true;
    const auto pairs = pair_list(n);
    for (std::size_t k = 0; k < pairs.size() && k < pair_coefficients.size(); ++k) {
        append_term(os, pair_coefficients[k], "q" + std::to_string(pairs[k].first) + std::to_string(pairs[k].second),
                    first);
    }
    append_term(os, constant, "", first);
    if (first) os << "0";
    os << " >= 0";
    return os.str();
}

std::vector<double> atom_agreements(std::size_t n, std::uint64_t atom) {
    std::vector<double> out;
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out.push_back(((atom >> i) & 1U) == ((atom >> j) & 1U) ? 1.0 : 0.0);
    return out;
}

FeasibilityResult joint_feasibility(const AgreementTable& table) {
    const std::size_t n = table.size();
    if (n < 2) throw std::invalid_argument("joint feasibility needs at least two observables");
    if (n > kMaxObservables) {
        throw std::invalid_argument("joint feasibility supports at most " + std::to_string(kMaxObservables) +
                                    " observables");
    }
    const std::size_t atoms = std::size_t{1} << n;
    const auto q = table.upper_triangle();
    const std::size_t rows = 1 + q.size();

    DenseMatrix a(rows, atoms);
    std::vector<double> b(rows);
    b[0] = 1.0;
    for (std::size_t k = 0; k < q.size(); ++k) b[k + 1] = q[k];
    for (std::size_t s = 0; s < atoms; ++s) {
        a(0, s) = 1.0;
        const auto agree = atom_agreements(n, s);
        for (std::size_t k = 0; k < agree.size(); ++k) a(k + 1, s) = agree[k];
    }

    const PhaseOneResult lp = find_feasible_point(a, b);
    FeasibilityResult result;
    result.feasible = lp.feasible;
    result.phase_one_objective = lp.objective;
    result.pivots = lp.pivots;

    if (lp.feasible) {
        result.atom_weights = lp.x;
        for (std::size_t r = 0; r < rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < atoms; ++c) s += a(r, c) * lp.x[c];
            result.max_residual = std::max(result.max_residual, std::abs(s - b[r]));
        }
        return result;
    }

    double scale = 0.0;
    for (double f : lp.farkas) scale = std::max(scale, std::abs(f));
    Certificate cert;
    cert.inequality.constant = lp.farkas[0] / scale;
    for (std::size_t k = 1; k < rows; ++k) cert.inequality.pair_coefficients.push_back(lp.farkas[k] / scale);
    cert.slack = cert.inequality.evaluate(table);
    result.certificate = std::move(cert);
    return result;
}

namespace detail {

std::vector<FacetEvaluation> bell_facets_n3_with_bound(const AgreementTable& table, double bound) {
    if (table.size() != 3) throw std::invalid_argument("bell_facets_n3 requires exactly 3 observables");
    // Pair order: q01, q02, q12.
    std::vector<FacetEvaluation> facets;
    auto add = [&](std::string name, double constant, std::vector<double> coefs) {
        FacetEvaluation f{std::move(name), LinearInequality{constant, std::move(coefs)}, 0.0};
        f.slack = f.inequality.evaluate(table);
        facets.push_back(std::move(f));
    };
    // q_ij + q_jk - q_ik <= 1, one facet per choice of the subtracted pair.
    add("transitivity q01 + q12 - q02 <= 1", bound, {-1.0, 1.0, -1.0});
    add("transitivity q01 + q02 - q12 <= 1", bound, {-1.0, -1.0, 1.0});
    add("transitivity q02 + q12 - q01 <= 1", bound, {1.0, -1.0, -1.0});
    add("sum q01 + q02 + q12 >= 1", -bound, {1.0, 1.0, 1.0});
    return facets;
}

}  // namespace detail

std::vector<FacetEvaluation> bell_facets_n3(const AgreementTable& table) {
    return detail::bell_facets_n3_with_bound(table, 1.0);
}

bool any_violated(const std::vector<FacetEvaluation>& facets) {
    return std::any_of(facets.begin(), facets.end(), [](const FacetEvaluation& f) { return f.violated(); });
}

std::vector<UnitVector3> coplanar_triple(double theta) {
    const double half_pi = std::numbers::pi / 2.0;
    return {UnitVector3::from_polar(half_pi, 0.0), UnitVector3::from_polar(half_pi, theta),
            UnitVector3::from_polar(half_pi, 2.0 * theta)};
}

BellScan bell_scan_table(double theta, std::vector<UnitVector3> directions, std::string table_source,
                         const AgreementTable& table) {
    BellScan scan;
    scan.theta = theta;
    scan.directions = std::move(directions);
    scan.table_source = std::move(table_source);
    scan.table = table;
    scan.lp = joint_feasibility(table);
    if (table.size() == 3) {
        scan.facets = bell_facets_n3(table);
        scan.facets_violated = any_violated(scan.facets);
        scan.verdicts_agree = scan.facets_violated != scan.lp.feasible;
    } else {
        scan.verdicts_agree = true;
    }
    return scan;
}

BellScan sphere_bell_scan(const RhoDistribution& rho, double theta, const BellScanOptions& options) {
    if (!(theta > 0.0 && theta < std::numbers::pi)) throw std::invalid_argument("bell scan: theta must lie in (0, pi)");
    auto directions = coplanar_triple(theta);
    if (rho.is_delta()) {
        const auto table = hidden_state_table(rho, directions, options.samples, options.seed, options.workers);
        return bell_scan_table(theta, std::move(directions), "hidden_state", table);
    }
    const auto table = agreement_table(rho, directions);
    return bell_scan_table(theta, std::move(directions), "sequential", table);
}

}  // namespace qmarket
