#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qmarket {

/// Fixed block size for Monte Carlo reductions. Partial sums are formed per
/// block and combined in block order, so floating-point results do not
/// depend on the number of workers.
inline constexpr std::size_t kReductionBlock = 4096;

/// Calls body(begin, end) for contiguous chunks of [0, count) on up to
/// `workers` threads. Chunks are disjoint; body must only write to state
/// owned by its indices. The first exception thrown by any worker is
/// rethrown on the calling thread.
template <typename Body>
void parallel_for_chunks(std::size_t count, unsigned workers, Body&& body) {
    if (count == 0) return;
    workers = std::max(1u, workers);
    const std::size_t chunks = std::min<std::size_t>(workers, count);
    if (chunks == 1) {
        body(std::size_t{0}, count);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = count * c / chunks;
        const std::size_t end = count * (c + 1) / chunks;
        pool.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Sums the N-vector term(i) for i in [0, count) componentwise, with a
/// result that does not depend on the worker count.
template <std::size_t N, typename Term>
std::array<double, N> blocked_sums(std::size_t count, unsigned workers, Term&& term) {
    const std::size_t blocks = (count + kReductionBlock - 1) / kReductionBlock;
    std::vector<std::array<double, N>> partial(blocks);
    parallel_for_chunks(blocks, workers, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t end = std::min(count, (b + 1) * kReductionBlock);
            std::array<double, N> acc{};
            for (std::size_t i = b * kReductionBlock; i < end; ++i) {
                const std::array<double, N> t = term(i);
                for (std::size_t k = 0; k < N; ++k) acc[k] += t[k];
            }
            partial[b] = acc;
        }
    });
    std::array<double, N> total{};
    for (const auto& p : partial)
        for (std::size_t k = 0; k < N; ++k) total[k] += p[k];
    return total;
}

}  // namespace qmarket
