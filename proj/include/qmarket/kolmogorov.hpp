#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmarket/agreement_table.hpp"
#include "qmarket/geometry.hpp"
#include "qmarket/rho.hpp"

namespace qmarket {

/// Largest table size accepted by joint_feasibility (2^12 atoms).
inline constexpr std::size_t kMaxObservables = 12;

/// Facet slacks below -kFacetTolerance count as violations.
inline constexpr double kFacetTolerance = 1e-9;

/// The inequality  constant + sum_{i<j} coefficient_ij * q_ij >= 0,
/// pair coefficients in AgreementTable::upper_triangle order.
struct LinearInequality {
    double constant = 0.0;
    std::vector<double> pair_coefficients;

    double evaluate(const AgreementTable& table) const;
    /// E.g. "q01 + q02 + q12 - 1 >= 0".
    std::string describe(std::size_t n) const;
};

/// A valid inequality for every classical table that the given table violates.
struct Certificate {
    LinearInequality inequality;
    /// inequality evaluated at the table; strictly negative.
    double slack = 0.0;
};

/// Whether a single joint distribution over the 2^n outcome assignments
/// reproduces every pairwise agreement probability.
///
/// Atom s in [0, 2^n) assigns outcome bit (s >> i) & 1 to observable i.
/// Only agreement probabilities are matched; single-observable marginals
/// are left free.
struct FeasibilityResult {
    bool feasible = false;
    /// 2^n nonnegative weights summing to 1 (feasible only).
    std::vector<double> atom_weights;
    /// Largest deviation of the weights from the table and from unit mass.
    double max_residual = 0.0;
    /// Separating inequality, scaled to unit max-norm (infeasible only).
    std::optional<Certificate> certificate;
    double phase_one_objective = 0.0;
    std::size_t pivots = 0;
};

/// Solves the agreement-embedding feasibility LP. Throws
/// std::invalid_argument if the table has more than kMaxObservables or
/// fewer than 2 observables.
FeasibilityResult joint_feasibility(const AgreementTable& table);

/// Agreement vector of an atom, in upper-triangle pair order.
std::vector<double> atom_agreements(std::size_t n, std::uint64_t atom);

struct FacetEvaluation {
    std::string name;
    LinearInequality inequality;
    double slack = 0.0;
    bool violated() const { return slack < -kFacetTolerance; }
};

/// The four facets of the n = 3 agreement polytope:
///   q_ij + q_jk - q_ik <= 1  (three transitivity facets)
///   q_01 + q_02 + q_12 >= 1  (sum facet)
/// Throws std::invalid_argument unless the table has exactly 3 observables.
std::vector<FacetEvaluation> bell_facets_n3(const AgreementTable& table);

bool any_violated(const std::vector<FacetEvaluation>& facets);

namespace detail {
/// bell_facets_n3 with the facet bound 1 replaced by `bound`. Exists so the
/// self-test can demonstrate that it detects a corrupted constant.
std::vector<FacetEvaluation> bell_facets_n3_with_bound(const AgreementTable& table, double bound);
}  // namespace detail

struct BellScanOptions {
    /// Hidden-state samples for a Delta rho.
    std::uint64_t samples = 100000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct BellScan {
    double theta = 0.0;
    std::vector<UnitVector3> directions;
    /// "sequential" (eigenstate preparation, analytic) or "hidden_state".
    std::string table_source;
    AgreementTable table{3};
    FeasibilityResult lp;
    std::vector<FacetEvaluation> facets;
    bool facets_violated = false;
    /// LP and facet checks reach the same verdict.
    bool verdicts_agree = false;
};

/// Three coplanar directions at azimuths 0, theta and 2 theta on the equator.
std::vector<UnitVector3> coplanar_triple(double theta);

/// Agreement table of a sphere model on three coplanar directions, tested
/// by both the LP and the n = 3 facets. For a Delta rho, whose outcomes are
/// fixed by the state, the table comes from hidden_state_table instead of
/// eigenstate preparation. Requires 0 < theta < pi.
BellScan sphere_bell_scan(const RhoDistribution& rho, double theta, const BellScanOptions& options = {});

/// Runs both checks on a given table and set of directions.
BellScan bell_scan_table(double theta, std::vector<UnitVector3> directions, std::string table_source,
                         const AgreementTable& table);

}  // namespace qmarket
