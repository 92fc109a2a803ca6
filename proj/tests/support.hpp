#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "modsel/metrics.hpp"
#include "modsel/montecarlo.hpp"

namespace modsel::test {

/// Random step density with `cells` equal cells of a dyadic mesh; some cells
/// may be zero when `allow_zero` is set.
inline PiecewiseDensity random_step(Rng& rng, std::size_t cells, bool allow_zero = false) {
    std::uniform_real_distribution<double> u(0.05, 3.0);
    std::bernoulli_distribution zero(0.2);
    std::vector<double> h(cells);
    double mass = 0.0;
    for (auto& v : h) {
        v = (allow_zero && zero(rng)) ? 0.0 : u(rng);
        mass += v;
    }
    if (mass == 0.0) h[0] = mass = 1.0;
    for (auto& v : h) v *= static_cast<double>(cells) / mass;
    return PiecewiseDensity(regular_partition(cells - 1), h);
}

/// Step density on random (non-aligned) breakpoints.
inline PiecewiseDensity random_irregular(Rng& rng, std::size_t cells) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> y{0.0, 1.0};
    while (y.size() < cells + 1) {
        const double x = u(rng);
        if (x > 1e-6 && x < 1.0 - 1e-6) y.push_back(x);
    }
    std::sort(y.begin(), y.end());
    y.erase(std::unique(y.begin(), y.end()), y.end());
    Partition m(y);
    std::uniform_real_distribution<double> hv(0.05, 3.0);
    std::vector<double> h(m.size());
    double mass = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
        h[j] = hv(rng);
        mass += h[j] * m.length(j);
    }
    for (auto& v : h) v /= mass;
    return PiecewiseDensity(m, h);
}

/// Midpoint sum of f(x) over a uniform mesh; exact for step functions whose
/// breakpoints lie on the mesh.
template <typename F>
double midpoint_sum(F&& f, std::size_t cells) {
    double acc = 0.0;
    const double w = 1.0 / static_cast<double>(cells);
    for (std::size_t i = 0; i < cells; ++i) acc += f((static_cast<double>(i) + 0.5) * w);
    return acc * w;
}

}  // namespace modsel::test
