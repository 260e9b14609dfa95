#include "qmarket/scop.hpp"

#include <cmath>
#include <stdexcept>

namespace qmarket {

PriceIntervalProperty::PriceIntervalProperty(double lower_, double upper_) : lower(lower_), upper(upper_) {
    if (!(lower < upper)) throw std::invalid_argument("price interval requires lower < upper");
}

ScopSystem::ScopSystem(std::vector<std::string> state_names, std::vector<std::string> context_names,
                       std::vector<PriceIntervalProperty> properties, TransitionLaw mu,
                       std::vector<std::set<PropertyId>> actual, TransitionSampler sampler)
    : state_names_(std::move(state_names)),
      context_names_(std::move(context_names)),
      properties_(std::move(properties)),
      actual_(std::move(actual)),
      sampler_(std::move(sampler)) {
    if (state_names_.empty()) throw std::invalid_argument("SCoP system needs at least one state");
    if (context_names_.empty()) throw std::invalid_argument("SCoP system needs at least one context");
    if (actual_.size() != state_names_.size()) throw std::invalid_argument("xi must be given for every state");
    for (const auto& props : actual_) {
        for (PropertyId a : props) {
            if (a >= properties_.size()) throw std::invalid_argument("xi names an unknown property");
        }
    }
    mu_.reserve(state_count() * context_count());
    for (StateId p = 0; p < state_count(); ++p) {
        for (ContextId e = 0; e < context_count(); ++e) {
            auto row = mu(p, e);
            double total = 0.0;
            for (const auto& s : row) {
                if (s.state >= state_count() || s.context >= context_count()) {
                    throw std::invalid_argument("mu names an unknown state or context");
                }
                if (!(s.probability >= 0.0 && s.probability <= 1.0)) {
                    throw std::invalid_argument("mu probabilities must lie in [0, 1]");
                }
                total += s.probability;
            }
            if (std::abs(total - 1.0) > 1e-12) {
                throw std::invalid_argument("mu row for state '" + state_names_[p] + "' under context '" +
                                            context_names_[e] + "' does not sum to 1");
            }
            mu_.push_back(std::move(row));
        }
    }
}

void ScopSystem::check_state(StateId p) const {
    if (p >= state_count()) throw UnknownElement("unknown state " + std::to_string(p));
}

void ScopSystem::check_context(ContextId e) const {
    if (e >= context_count()) throw UnknownElement("unknown context " + std::to_string(e));
}

const std::string& ScopSystem::state_name(StateId p) const {
    check_state(p);
    return state_names_[p];
}

const std::string& ScopSystem::context_name(ContextId e) const {
    check_context(e);
    return context_names_[e];
}

const std::vector<Successor>& ScopSystem::mu(StateId p, ContextId e) const {
    check_state(p);
    check_context(e);
    return mu_[p * context_count() + e];
}

bool ScopSystem::is_eigenstate(StateId p, ContextId e) const {
    double stay = 0.0;
    for (const auto& s : mu(p, e)) {
        if (s.state == p) stay += s.probability;
    }
    return stay == 1.0;
}

Successor ScopSystem::transition(StateId p, ContextId e, CounterRng& rng) const {
    const auto& row = mu(p, e);
    if (sampler_) {
        Successor s = sampler_(p, e, rng);
        s.probability = 0.0;
        for (const auto& entry : row) {
            if (entry.state == s.state && entry.context == s.context) s.probability += entry.probability;
        }
        return s;
    }
    const double u = rng.uniform();
    double acc = 0.0;
    const Successor* last_positive = nullptr;
    for (const auto& s : row) {
        if (s.probability <= 0.0) continue;
        last_positive = &s;
        acc += s.probability;
        if (u < acc) return s;
    }
    // Rounding left u above the accumulated mass.
    return *last_positive;
}

const std::set<PropertyId>& ScopSystem::actual_properties(StateId p) const {
    check_state(p);
    return actual_[p];
}

SphereScop::SphereScop(RhoDistribution rho, std::vector<UnitVector3> directions, std::vector<UnitVector3> states,
                       std::vector<StateId> eigen_ids, std::vector<StateId> initial_ids, ScopSystem system)
    : rho_(std::move(rho)),
      directions_(std::move(directions)),
      states_(std::move(states)),
      eigen_ids_(std::move(eigen_ids)),
      initial_ids_(std::move(initial_ids)),
      system_(std::move(system)) {}

StateId SphereScop::eigenstate(ContextId e, Outcome o) const {
    if (e >= directions_.size()) throw UnknownElement("unknown context " + std::to_string(e));
    return eigen_ids_[2 * e + (o == Outcome::O1 ? 0 : 1)];
}

std::optional<StateId> SphereScop::find_state(const UnitVector3& v) const {
    for (StateId p = 0; p < states_.size(); ++p) {
        if (approx_equal(states_[p], v)) return p;
    }
    return std::nullopt;
}

namespace {

std::string vector_name(const UnitVector3& v) {
    return "(" + std::to_string(v.x()) + ", " + std::to_string(v.y()) + ", " + std::to_string(v.z()) + ")";
}

}  // namespace

SphereScop sphere_as_scop(const RhoDistribution& rho, const std::vector<UnitVector3>& directions,
                          const std::vector<DirectionPrices>& prices, const std::vector<UnitVector3>& initial_states) {
    if (directions.empty()) throw std::invalid_argument("sphere SCoP needs at least one direction");
    if (prices.size() != directions.size()) throw std::invalid_argument("price map must cover every direction");

    std::vector<UnitVector3> states;
    std::vector<std::string> state_names;
    std::vector<std::vector<PriceIntervalProperty>> attached;
    auto intern = [&](const UnitVector3& v, const std::string& name) -> StateId {
        for (StateId p = 0; p < states.size(); ++p) {
            if (approx_equal(states[p], v)) return p;
        }
        states.push_back(v);
        state_names.push_back(name);
        attached.emplace_back();
        return states.size() - 1;
    };

    std::vector<PriceIntervalProperty> properties;
    auto property_id = [&](const PriceIntervalProperty& a) {
        for (PropertyId k = 0; k < properties.size(); ++k) {
            if (properties[k] == a) return k;
        }
        properties.push_back(a);
        return properties.size() - 1;
    };

    std::vector<StateId> eigen_ids;
    std::vector<std::string> context_names;
    std::vector<UnitVector3> axes;
    for (std::size_t k = 0; k < directions.size(); ++k) {
        const auto& dp = prices[k];
        if (dp.up.overlaps(dp.down)) {
            throw std::invalid_argument("price map assigns overlapping intervals to the antipodal pair of direction " +
                                        std::to_string(k));
        }
        const UnitVector3& u = directions[k];
        const StateId up = intern(u, "p+" + std::to_string(k));
        const StateId down = intern(-u, "p-" + std::to_string(k));
        attached[up].push_back(dp.up);
        attached[down].push_back(dp.down);
        property_id(dp.up);
        property_id(dp.down);
        eigen_ids.push_back(up);
        eigen_ids.push_back(down);
        // Near-duplicate directions share the interned vector exactly.
        axes.push_back(states[up]);
        context_names.push_back("e" + std::to_string(k) + " " + vector_name(u));
    }
    std::vector<StateId> initial_ids;
    for (std::size_t k = 0; k < initial_states.size(); ++k) {
        initial_ids.push_back(intern(initial_states[k], "v" + std::to_string(k) + " " + vector_name(initial_states[k])));
    }

    std::vector<std::set<PropertyId>> actual(states.size());
    for (StateId p = 0; p < states.size(); ++p) {
        for (const auto& interval : attached[p]) {
            for (PropertyId a = 0; a < properties.size(); ++a) {
                if (properties[a].contains(interval)) actual[p].insert(a);
            }
        }
    }

    auto mu = [states, directions = axes, eigen_ids, rho](StateId p, ContextId e) {
        const auto probs = transition_probabilities(rho, states[p], directions[e]);
        return std::vector<Successor>{{eigen_ids[2 * e], e, probs.p1}, {eigen_ids[2 * e + 1], e, probs.p2}};
    };
    auto sampler = [states, directions = axes, eigen_ids, rho](StateId p, ContextId e, CounterRng& rng) {
        const auto outcome = simulate_measurement(rho, states[p], directions[e], rng);
        return Successor{eigen_ids[2 * e + (outcome.label == Outcome::O1 ? 0 : 1)], e, 1.0};
    };

    ScopSystem system(std::move(state_names), std::move(context_names), std::move(properties), mu, std::move(actual),
                      sampler);
    return SphereScop(rho, std::move(axes), std::move(states), std::move(eigen_ids), std::move(initial_ids),
                      std::move(system));
}

}  // namespace qmarket
