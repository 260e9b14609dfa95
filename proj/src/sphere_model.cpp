#include "qmarket/sphere_model.hpp"

#include <stdexcept>
#include <vector>

#include "qmarket/parallel.hpp"

namespace qmarket {

const char* to_string(Outcome o) { return o == Outcome::O1 ? "O1" : "O2"; }

TransitionProbabilities transition_probabilities(const RhoDistribution& rho, const UnitVector3& v,
                                                 const UnitVector3& u) {
    const double p1 = rho.cdf_below(dot(v, u));
    return {p1, 1.0 - p1};
}

MeasurementOutcome simulate_measurement(const RhoDistribution& rho, const UnitVector3& state,
                                        const UnitVector3& u, CounterRng& rng) {
    const double x = rho.quantile(rng.uniform());
    const double position = dot(state, u);
    if (x < position) return {Outcome::O1, u, x};
    return {Outcome::O2, -u, x};
}

double sequential_agreement(const RhoDistribution& rho, const UnitVector3& u_i, const UnitVector3& u_j) {
    return transition_probabilities(rho, u_i, u_j).p1;
}

AgreementTable agreement_table(const RhoDistribution& rho, std::span<const UnitVector3> directions) {
    const std::size_t n = directions.size();
    if (n < 2) throw std::invalid_argument("agreement table needs at least two directions");
    AgreementTable table(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) table.set(i, j, sequential_agreement(rho, directions[i], directions[j]));
    return table;
}

FrequencyEstimate estimate_o1_frequency(const RhoDistribution& rho, const UnitVector3& v, const UnitVector3& u,
                                        std::uint64_t trials, std::uint64_t seed, unsigned workers) {
    // Counts are integers, so the per-block double sums are exact.
    const auto sums = blocked_sums<1>(trials, workers, [&](std::size_t k) {
        CounterRng rng(seed, k);
        return std::array<double, 1>{simulate_measurement(rho, v, u, rng).label == Outcome::O1 ? 1.0 : 0.0};
    });
    return {trials, static_cast<std::uint64_t>(sums[0])};
}

AgreementTable hidden_state_table(const RhoDistribution& rho, std::span<const UnitVector3> directions,
                                  std::uint64_t samples, std::uint64_t seed, unsigned workers) {
    const std::size_t n = directions.size();
    if (n < 2) throw std::invalid_argument("hidden-state table needs at least two directions");
    if (samples == 0) throw std::invalid_argument("hidden-state table needs at least one sample");
    const std::size_t pairs = n * (n - 1) / 2;
    const std::size_t blocks = (samples + kReductionBlock - 1) / kReductionBlock;
    std::vector<std::vector<std::uint64_t>> partial(blocks, std::vector<std::uint64_t>(pairs, 0));
    parallel_for_chunks(blocks, workers, [&](std::size_t b0, std::size_t b1) {
        std::vector<Outcome> outcomes(n);
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t end = std::min<std::size_t>(samples, (b + 1) * kReductionBlock);
            for (std::size_t s = b * kReductionBlock; s < end; ++s) {
                CounterRng rng(seed, s);
                const UnitVector3 hidden = sample_uniform(rng);
                for (std::size_t i = 0; i < n; ++i) outcomes[i] = simulate_measurement(rho, hidden, directions[i], rng).label;
                std::size_t k = 0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j, ++k) partial[b][k] += outcomes[i] == outcomes[j];
            }
        }
    });
    std::vector<std::uint64_t> counts(pairs, 0);
    for (const auto& p : partial)
        for (std::size_t k = 0; k < pairs; ++k) counts[k] += p[k];
    AgreementTable table(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++k)
            table.set(i, j, static_cast<double>(counts[k]) / static_cast<double>(samples));
    return table;
}

}  // namespace qmarket
