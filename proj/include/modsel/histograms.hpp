#pragma once

// Histogram and trigonometric projection density estimators, their exact
// risk decompositions and the oracle over a family of partitions.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "modsel/metrics.hpp"
#include "modsel/montecarlo.hpp"
#include "modsel/partitions.hpp"

namespace modsel {

struct SampleSet {
    std::vector<double> points;  // all in [0,1]
    std::uint64_t seed = 0;
};

/// n i.i.d. draws by inverse CDF of the grid interpolant; deterministic in seed.
SampleSet sample(const GridDensity& s, std::size_t n, std::uint64_t seed);

std::vector<double> draw(const GridDensity& s, std::size_t n, Rng& rng);
std::vector<double> draw(const PiecewiseDensity& s, std::size_t n, Rng& rng);

/// One value per line; the seed is not part of the format.
void write_sample(std::ostream& out, const SampleSet& sample);
SampleSet read_sample(std::istream& in);

struct CellCounts {
    Partition partition;
    std::vector<std::size_t> counts;
    std::size_t n = 0;
};

CellCounts count_cells(std::span<const double> points, const Partition& m);

/// ŝ_m: height N_j / (n |I_j|) on each interval.
PiecewiseDensity histogram(std::span<const double> points, const Partition& m);
inline PiecewiseDensity histogram(const SampleSet& x, const Partition& m) { return histogram(x.points, m); }

/// ∫_{I_j} f for every interval of m, exact for a step function f.
std::vector<double> cell_integrals(StepView f, const Partition& m);

/// p_j = ∫_{I_j} s.
std::vector<double> cell_probabilities(const GridDensity& s, const Partition& m);

/// s_m: height p_j / |I_j|, the L2 projection of s onto step functions on m.
PiecewiseDensity l2_projection(const GridDensity& s, const Partition& m);

/// E‖s_m - ŝ_m‖² = n⁻¹ Σ p_j (1 - p_j) / |I_j|.
double stochastic_error_exact(const GridDensity& s, const Partition& m, std::size_t n);

/// ‖s - s_m‖² + E‖s_m - ŝ_m‖²: the exact L2 risk of ŝ_m.
double l2_risk_exact(const GridDensity& s, const Partition& m, std::size_t n);

/// MC mean of ‖s - ŝ_m‖²; reference is l2_risk_exact.
RiskEstimate l2_risk_mc(const GridDensity& s, const Partition& m, std::size_t n, std::size_t reps,
                        std::uint64_t seed);

struct HellingerProjection {
    double h2_sm;             // h²(s, s_m)
    double sqrt_projection;   // ‖f - √s‖², f the L2 projection of √s onto V_m
    double inf_h2;            // inf_{t ∈ S_m} h²(s, t)
};

/// Quantities of h²(s, s_m) ≤ ‖f - √s‖² ≤ 2 inf h²(s, t). The infimum is
/// attained at t ∝ f², giving inf h² = 1 - sqrt(1 - ‖f - √s‖²).
/// Throws std::logic_error if the first inequality fails numerically.
HellingerProjection hellinger_projection_bound(const GridDensity& s, const Partition& m);

/// MC mean of h²(s, ŝ_m); reference is 2 inf h²(s, t) + D / (2n).
RiskEstimate hellinger_risk_mc(const GridDensity& s, const Partition& m, std::size_t n, std::size_t reps,
                               std::uint64_t seed);

struct HolderClass {
    double L;
    double beta;

    HolderClass(double L, double beta);

    /// max{(L n^-β)^{2/(2β+1)}, 1/n}
    double rate(double n) const;
    /// The regular partition with D + 1 = ceil((n L²)^{1/(2β+1)}) intervals.
    std::size_t tuned_dimension(double n) const;
};

// ---------------------------------------------------------------------------
// Trigonometric projection estimator

/// φ_0 = 1, φ_{2k-1} = √2 cos(2πkx), φ_{2k} = √2 sin(2πkx).
double trig_basis(int j, double x);

/// s_j = ∫ s φ_j, exact for a step function.
double trig_coefficient(StepView s, int j);
inline double trig_coefficient(const GridDensity& s, int j) { return trig_coefficient(s.step(), j); }

class TrigSeries {
public:
    TrigSeries(std::vector<int> indices, std::vector<double> coefficients);

    std::span<const int> indices() const noexcept { return indices_; }
    std::span<const double> coefficients() const noexcept { return coefficients_; }
    double operator()(double x) const;

    /// ‖s - t‖² by Parseval inside span{φ_j}: ‖s‖² - 2 Σ c_j s_j + Σ c_j².
    double l2_distance_squared(const GridDensity& s) const { return l2_distance_squared(s.step()); }
    double l2_distance_squared(StepView s) const;
    /// Same, from ‖s‖² and s_j for j in indices(), precomputed by the caller.
    double l2_distance_squared(double s_norm_squared, std::span<const double> s_coefficients) const;

private:
    std::vector<int> indices_;  // always starts with 0
    std::vector<double> coefficients_;
};

/// Coefficients φ̄_j = n⁻¹ Σ φ_j(X_i) for j in m ∪ {0}. The result may be
/// negative somewhere; it is not projected onto densities.
TrigSeries trig_projection_estimator(std::span<const double> points, std::span<const int> indices);

/// ‖s - s_m‖² with s_m = Σ_{j ∈ m ∪ {0}} s_j φ_j.
double trig_bias_squared(const GridDensity& s, std::span<const int> indices);

/// Σ_{j ∈ m} Var(φ̄_j) + ‖s - s_m‖², exact.
double trig_risk_exact(const GridDensity& s, std::span<const int> indices, std::size_t n);

/// 2|m|/n + ‖s - s_m‖².
double trig_risk_bound(const GridDensity& s, std::span<const int> indices, std::size_t n);

// ---------------------------------------------------------------------------
// Oracle

enum class OracleLoss {
    l2,         ///< ‖s - s_m‖² + (|m| - 1)/n
    hellinger,  ///< 2 inf h²(s, t) + (|m| - 1)/(2n)
};

struct OracleChoice {
    std::size_t index;
    double value;
    std::vector<double> criterion;  // per family member
};

/// Minimizer over the family; ties go to the smaller |m|, then the earlier member.
OracleChoice histogram_oracle(const GridDensity& s, std::span<const Partition> family, std::size_t n,
                              OracleLoss loss = OracleLoss::l2);

}  // namespace modsel
