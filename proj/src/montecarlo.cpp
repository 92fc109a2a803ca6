#include "modsel/montecarlo.hpp"

#include <cstdlib>
#include <string>

namespace modsel {

namespace {
std::atomic<unsigned> worker_override{0};
}

std::uint64_t seed_split(std::uint64_t root, std::uint64_t index) noexcept {
    std::uint64_t z = root + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

unsigned worker_count() {
    if (unsigned n = worker_override.load()) return n;
    if (const char* env = std::getenv("MODSEL_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_worker_count(unsigned n) { worker_override.store(n); }

MeanSe summarize(std::span<const double> values) {
    MeanSe r;
    r.count = values.size();
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        const double var = ss / static_cast<double>(values.size() - 1);
        r.se = std::sqrt(var / static_cast<double>(values.size()));
    }
    return r;
}

std::vector<double> standard_normal(Rng& rng, std::size_t n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(n);
    for (double& v : z) v = normal(rng);
    return z;
}

}  // namespace modsel
