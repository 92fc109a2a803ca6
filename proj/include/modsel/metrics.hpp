#pragma once

// Densities on [0,1] and the L2 / Hellinger geometry between them.
//
// Both density types are step functions: a GridDensity is read as its
// piecewise-constant interpolant on a uniform grid (the same function the
// sampler draws from), so every distance below is an exact integral over the
// common refinement of the two meshes.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "modsel/partitions.hpp"

namespace modsel {

inline constexpr std::size_t default_grid_size = std::size_t{1} << 14;

/// Breakpoints and cell values of a step function on [0,1].
struct StepView {
    std::span<const double> breakpoints;  // size = values.size() + 1
    std::span<const double> values;
};

/// Calls f(length, value_a, value_b) for every cell of the common refinement.
template <typename F>
void for_each_common_cell(StepView a, StepView b, F&& f) {
    std::size_t i = 0;
    std::size_t j = 0;
    double x = 0.0;
    const std::size_t na = a.values.size();
    const std::size_t nb = b.values.size();
    while (i < na && j < nb) {
        const double ra = a.breakpoints[i + 1];
        const double rb = b.breakpoints[j + 1];
        const double r = std::min(ra, rb);
        if (r > x) {
            f(r - x, a.values[i], b.values[j]);
            x = r;
        }
        if (ra <= r) ++i;
        if (rb <= r) ++j;
    }
}

/// Density tabulated at the midpoints of grid_size equal cells of [0,1].
class GridDensity {
public:
    /// Values must be ≥ 0 with midpoint integral within 1e-6 of 1; the stored
    /// values are rescaled to integrate to 1.
    explicit GridDensity(std::vector<double> values);

    /// Tabulates a nonnegative function and normalizes whatever its mass.
    static GridDensity from_unnormalized(std::vector<double> values);
    static GridDensity tabulate(const std::function<double(double)>& fn,
                                std::size_t grid_size = default_grid_size);
    static GridDensity uniform(std::size_t grid_size = default_grid_size);

    std::size_t grid_size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator()(double x) const;

    /// ∫_a^b of the interpolant, exact.
    double integral(double a, double b) const;
    double sup_norm() const;

    StepView step() const noexcept { return {breakpoints_, values_}; }

private:
    void finish();

    std::vector<double> values_;
    std::vector<double> breakpoints_;
    std::vector<double> cumulative_;  // cumulative_[i] = ∫_0^{i/N}
};

/// Nonnegative step function on a Partition with Σ a_j |I_j| = 1.
class PiecewiseDensity {
public:
    /// Same normalization rule as GridDensity.
    PiecewiseDensity(Partition partition, std::vector<double> heights);

    static PiecewiseDensity uniform();

    const Partition& partition() const noexcept { return partition_; }
    std::span<const double> heights() const noexcept { return heights_; }
    double operator()(double x) const { return heights_[partition_.locate(x)]; }
    double sup_norm() const;

    StepView step() const noexcept { return {partition_.breakpoints(), heights_}; }

private:
    Partition partition_;
    std::vector<double> heights_;
};

template <typename T>
concept StepDensity = requires(const T& t) {
    { t.step() } -> std::same_as<StepView>;
};

/// Hellinger affinity ρ ∈ [0,1].
class Affinity {
public:
    /// Accepts values within 1e-9 of [0,1] and clamps them.
    explicit Affinity(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

// ---------------------------------------------------------------------------
// Step-view primitives

double l2_distance_squared(StepView f, StepView g);
double hellinger_squared(StepView f, StepView g);
double affinity_value(StepView f, StepView g);
double overlap(StepView f, StepView g);  // ∫ min(f, g)
double l2_norm_squared(StepView f);

template <StepDensity F, StepDensity G>
double l2_distance_squared(const F& f, const G& g) { return l2_distance_squared(f.step(), g.step()); }

template <StepDensity F, StepDensity G>
double l2_distance(const F& f, const G& g) { return std::sqrt(l2_distance_squared(f.step(), g.step())); }

/// h² = ½∫(√f - √g)², computed directly so small distances keep full precision.
template <StepDensity F, StepDensity G>
double hellinger_squared(const F& f, const G& g) { return hellinger_squared(f.step(), g.step()); }

template <StepDensity F, StepDensity G>
double hellinger_distance(const F& f, const G& g) { return std::sqrt(hellinger_squared(f.step(), g.step())); }

template <StepDensity F, StepDensity G>
Affinity hellinger_affinity(const F& f, const G& g) { return Affinity(affinity_value(f.step(), g.step())); }

/// ∫ min(f, g), the middle term of ρ ≥ ∫min(f,g) ≥ 1 - √(1 - ρ²).
template <StepDensity F, StepDensity G>
double overlap(const F& f, const G& g) { return overlap(f.step(), g.step()); }

/// ρ(P^⊗n, Q^⊗n) = ρ(P,Q)^n.
Affinity affinity_tensor_power(Affinity rho, unsigned n);

/// ρ(N(u, σ²I), N(v, σ²I)) = exp(-‖u - v‖² / (8σ²)).
Affinity gaussian_affinity(std::span<const double> u, std::span<const double> v, double sigma);

}  // namespace modsel
