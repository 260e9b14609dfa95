#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qmarket {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Stateless: maps (counter, key) to 128 random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream addressed by (seed, stream).
///
/// Two generators built from the same pair produce the same sequence, no
/// matter which thread constructs them or in which order. Monte Carlo code
/// gives every trial (or path) its own stream index, so results depend only
/// on the seed and the trial index, never on how work is split across
/// threads.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();
    /// Standard normal variate (Box-Muller, second value cached).
    double normal();

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_words_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Mixes a tag into a seed (SplitMix64 finalizer). Used to derive
/// independent seeds for sub-simulations, e.g. one per ensemble member.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace qmarket
