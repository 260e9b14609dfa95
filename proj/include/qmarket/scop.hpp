#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmarket/geometry.hpp"
#include "qmarket/random.hpp"
#include "qmarket/rho.hpp"
#include "qmarket/sphere_model.hpp"

namespace qmarket {

using StateId = std::size_t;
using ContextId = std::size_t;
using PropertyId = std::size_t;

/// "Having a price between lower and upper". Requires lower < upper.
struct PriceIntervalProperty {
    double lower = 0.0;
    double upper = 0.0;

    PriceIntervalProperty() = default;
    PriceIntervalProperty(double lower, double upper);

    bool contains(const PriceIntervalProperty& other) const {
        return lower <= other.lower && other.upper <= upper;
    }
    bool overlaps(const PriceIntervalProperty& other) const {
        return lower < other.upper && other.lower < upper;
    }
    friend bool operator==(const PriceIntervalProperty&, const PriceIntervalProperty&) = default;
};

/// One entry of the transition law mu(q, f | p, e).
struct Successor {
    StateId state = 0;
    ContextId context = 0;
    double probability = 0.0;
};

class UnknownElement : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// State-context-property system over finite sets of states and contexts.
///
/// mu(p, e) lists the successor (state, context) pairs with their
/// probabilities; xi(p) lists the properties actual in p. Both are checked
/// on construction: every mu row must sum to 1 within 1e-12 and reference
/// known elements, and xi must only name known properties. The system is
/// immutable afterwards and safe to share across threads.
class ScopSystem {
public:
    using TransitionLaw = std::function<std::vector<Successor>(StateId, ContextId)>;
    /// Optional direct sampler for transitions. When absent, transition()
    /// draws from mu by inversion.
    using TransitionSampler = std::function<Successor(StateId, ContextId, CounterRng&)>;

    ScopSystem(std::vector<std::string> state_names, std::vector<std::string> context_names,
               std::vector<PriceIntervalProperty> properties, TransitionLaw mu,
               std::vector<std::set<PropertyId>> actual, TransitionSampler sampler = {});

    std::size_t state_count() const { return state_names_.size(); }
    std::size_t context_count() const { return context_names_.size(); }
    const std::vector<PriceIntervalProperty>& properties() const { return properties_; }
    const std::string& state_name(StateId p) const;
    const std::string& context_name(ContextId e) const;

    /// mu(., . | p, e). Throws UnknownElement for an unknown state or context.
    const std::vector<Successor>& mu(StateId p, ContextId e) const;

    /// True iff mu sends p to p with probability 1 under e.
    bool is_eigenstate(StateId p, ContextId e) const;

    /// Samples a successor (q, f) of p under e.
    Successor transition(StateId p, ContextId e, CounterRng& rng) const;

    /// xi(p).
    const std::set<PropertyId>& actual_properties(StateId p) const;

private:
    void check_state(StateId p) const;
    void check_context(ContextId e) const;

    std::vector<std::string> state_names_;
    std::vector<std::string> context_names_;
    std::vector<PriceIntervalProperty> properties_;
    std::vector<std::vector<Successor>> mu_;  // index p * contexts + e
    std::vector<std::set<PropertyId>> actual_;
    TransitionSampler sampler_;
};

/// Price intervals displayed by the two eigenstates of one measurement
/// direction: `up` for p_u (outcome O1) and `down` for p_{-u} (outcome O2).
struct DirectionPrices {
    PriceIntervalProperty up;
    PriceIntervalProperty down;
};

/// A sphere model realized as a SCoP system.
///
/// States are the eigenstates p_{+u}, p_{-u} of every direction plus any
/// supplied initial states (duplicates within 1e-12 merged); contexts are
/// the measurements e_u. mu comes from the analytic transition
/// probabilities and transitions are sampled by simulate_measurement;
/// contexts do not change. A state displays every property in L that
/// contains an interval attached to it, and initial states that are not
/// eigenstates display none.
class SphereScop {
public:
    const ScopSystem& system() const { return system_; }
    const RhoDistribution& rho() const { return rho_; }
    const std::vector<UnitVector3>& directions() const { return directions_; }

    const UnitVector3& state_vector(StateId p) const { return states_.at(p); }
    /// Id of the eigenstate p_u (O1) or p_{-u} (O2) of context e.
    StateId eigenstate(ContextId e, Outcome o) const;
    /// Id of the k-th supplied initial state.
    StateId initial_state(std::size_t k) const { return initial_ids_.at(k); }
    /// Id of the state at `v`, if it is in the system.
    std::optional<StateId> find_state(const UnitVector3& v) const;

private:
    friend SphereScop sphere_as_scop(const RhoDistribution&, const std::vector<UnitVector3>&,
                                     const std::vector<DirectionPrices>&, const std::vector<UnitVector3>&);
    SphereScop(RhoDistribution rho, std::vector<UnitVector3> directions, std::vector<UnitVector3> states,
               std::vector<StateId> eigen_ids, std::vector<StateId> initial_ids, ScopSystem system);

    RhoDistribution rho_;
    std::vector<UnitVector3> directions_;
    std::vector<UnitVector3> states_;
    std::vector<StateId> eigen_ids_;  // 2 per context: up, down
    std::vector<StateId> initial_ids_;
    ScopSystem system_;
};

/// Builds the sphere SCoP. `prices[k]` belongs to `directions[k]`. Throws
/// std::invalid_argument if directions is empty, the sizes differ, or the
/// up and down intervals of one direction overlap.
SphereScop sphere_as_scop(const RhoDistribution& rho, const std::vector<UnitVector3>& directions,
                          const std::vector<DirectionPrices>& prices,
                          const std::vector<UnitVector3>& initial_states = {});

}  // namespace qmarket
