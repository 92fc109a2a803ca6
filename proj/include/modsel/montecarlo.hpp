#pragma once

// Reproducible Monte Carlo replication.
//
// Replication i of a run with root seed r draws from an mt19937_64 seeded with
// seed_split(r, i). Results are stored by replication index and reduced in
// index order, so outputs do not depend on the worker count.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <span>
#include <thread>
#include <vector>

namespace modsel {

using Rng = std::mt19937_64;

/// splitmix64 finalizer applied to root + (index + 1) * golden-ratio
/// increment. The map index -> seed is injective for a fixed root.
std::uint64_t seed_split(std::uint64_t root, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t root, std::uint64_t index) { return Rng(seed_split(root, index)); }

/// Worker threads for replication loops: set_worker_count() override, else
/// MODSEL_THREADS, else hardware concurrency.
unsigned worker_count();
void set_worker_count(unsigned n);  // 0 restores the default

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

/// Mean and standard error sd / sqrt(count), summed in index order.
MeanSe summarize(std::span<const double> values);

/// Monte Carlo estimate of a risk plus the reference value it is checked
/// against (an exact value or a bound).
struct RiskEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t reps = 0;
    double reference = 0.0;
    std::uint64_t seed = 0;
};

/// Runs fn(rng, i) for i in [0, reps) and returns the results by index.
template <typename F>
auto replicate(std::size_t reps, std::uint64_t seed, F&& fn) {
    using T = decltype(fn(std::declval<Rng&>(), std::size_t{}));
    std::vector<T> out(reps);
    const unsigned workers = std::max(1u, std::min<unsigned>(worker_count(), static_cast<unsigned>(reps)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        try {
            for (std::size_t i = next++; i < reps; i = next++) {
                Rng rng = make_rng(seed, i);
                out[i] = fn(rng, i);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = reps;
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

/// Standard normal vector of length n.
std::vector<double> standard_normal(Rng& rng, std::size_t n);

}  // namespace modsel
