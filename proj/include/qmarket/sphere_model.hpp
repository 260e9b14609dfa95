#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "qmarket/agreement_table.hpp"
#include "qmarket/geometry.hpp"
#include "qmarket/random.hpp"
#include "qmarket/rho.hpp"

namespace qmarket {

/// Outcome labels of a measurement e_u: O1 sends the particle to u, O2 to -u.
enum class Outcome { O1, O2 };

const char* to_string(Outcome o);

struct MeasurementOutcome {
    Outcome label = Outcome::O1;
    UnitVector3 collapsed_state;
    /// Break point on the elastic; empty for analytic evaluation.
    std::optional<double> break_point;
};

struct TransitionProbabilities {
    double p1 = 0.0;  ///< probability of collapsing onto u
    double p2 = 0.0;  ///< probability of collapsing onto -u
};

/// Outcome probabilities of measuring e_u on the state v.
///
/// The particle falls orthogonally onto the elastic at coordinate v.u; it
/// ends on u when the elastic breaks below that point, so
///   p1 = P(X < v.u),  p2 = 1 - p1.
/// For continuous rho this is the rho CDF at v.u. For a Delta rho the tie
/// X = v.u yields O2, matching simulate_measurement.
TransitionProbabilities transition_probabilities(const RhoDistribution& rho, const UnitVector3& v,
                                                 const UnitVector3& u);

/// One measurement of e_u on `state`: draws a break point by inverse CDF and
/// collapses the state onto u (O1, break point strictly below v.u) or -u (O2).
MeasurementOutcome simulate_measurement(const RhoDistribution& rho, const UnitVector3& state,
                                        const UnitVector3& u, CounterRng& rng);

/// Probability that e_{u_j} yields O1 on the eigenstate p_{u_i}.
double sequential_agreement(const RhoDistribution& rho, const UnitVector3& u_i, const UnitVector3& u_j);

/// q(i, j) = sequential_agreement(rho, u_i, u_j). Requires at least two
/// directions. The analytic value is symmetric in (i, j) because it depends
/// only on u_i.u_j.
AgreementTable agreement_table(const RhoDistribution& rho, std::span<const UnitVector3> directions);

/// Monte Carlo estimate of P(O1) from `trials` independent measurements of
/// e_u on v. Trial k uses stream k of `seed`; the result does not depend on
/// `workers`.
struct FrequencyEstimate {
    std::uint64_t trials = 0;
    std::uint64_t o1_count = 0;
    double frequency() const { return trials ? static_cast<double>(o1_count) / static_cast<double>(trials) : 0.0; }
};

FrequencyEstimate estimate_o1_frequency(const RhoDistribution& rho, const UnitVector3& v, const UnitVector3& u,
                                        std::uint64_t trials, std::uint64_t seed, unsigned workers = 1);

/// Classical hidden-state construction: draws a state uniformly on the sphere
/// and measures every direction on that same state (one break point per
/// measurement). Each sample is a joint assignment of outcomes, so the
/// resulting agreement table is a mixture of deterministic assignments.
AgreementTable hidden_state_table(const RhoDistribution& rho, std::span<const UnitVector3> directions,
                                  std::uint64_t samples, std::uint64_t seed, unsigned workers = 1);

}  // namespace qmarket
