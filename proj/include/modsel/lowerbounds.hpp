#pragma once

// Hypercube of densities whose pairwise L2 distances are proportional to
// Hamming distance, and the Assouad lower bound it yields.

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "modsel/metrics.hpp"
#include "modsel/partitions.hpp"

namespace modsel {

using HammingIndex = std::vector<bool>;

std::size_t hamming_distance(const HammingIndex& a, const HammingIndex& b);

/// s_δ = 1 + Σ δ_j g_j on [0,1], where g_j is the translate by (j-1)/D of
///   g = -a on [0, (1-θ)/D],  L on ((1-θ)/D, 1/D),
/// with a = D/(4n) and (1-θ)/θ = 4nL/D.
class AssouadFamily {
public:
    /// Requires 1 ≤ D ≤ 3n and L > 0; throws std::invalid_argument otherwise.
    AssouadFamily(std::size_t D, double L, std::size_t n);

    std::size_t D() const noexcept { return D_; }
    double L() const noexcept { return L_; }
    std::size_t n() const noexcept { return n_; }
    double a() const noexcept { return a_; }
    double theta() const noexcept { return theta_; }

    /// The 2D-interval partition on which every member is constant.
    const Partition& partition() const noexcept { return partition_; }

    PiecewiseDensity member(const HammingIndex& delta) const;
    /// All 2^D vertices in binary order; D ≤ 16.
    std::vector<HammingIndex> vertices() const;

    /// ‖g‖² = a²(1-θ)/(θD), which equals L/(4n).
    double bump_norm_squared() const noexcept;
    /// h²(f, f+g) = D⁻¹[1 - (1-θ)√(1-a) - θ√(1+L)].
    double bump_hellinger_squared() const noexcept;
    /// (L/(4n)) Δ(δ, δ').
    double isometry_distance_squared(const HammingIndex& d1, const HammingIndex& d2) const;
    /// 1 - (6n)⁻¹, the affinity lower bound between neighbouring vertices.
    double neighbour_affinity() const noexcept;

private:
    std::size_t D_;
    double L_;
    std::size_t n_;
    double a_;
    double theta_;
    Partition partition_;
};

/// (D/2)(1 - sqrt(1 - ρ̄^{2n})).
double assouad_bound(std::size_t D, Affinity rho_bar, std::size_t n);
/// D ρ̄^{2n} / 4.
double assouad_bound_weak(std::size_t D, Affinity rho_bar, std::size_t n);

/// (LD/(32n))(1 - √11/6), the floor on sup_δ E‖ŝ - s_δ‖² for any estimator.
/// Throws std::logic_error if it does not exceed 0.0139 DL/n.
double l2_minimax_floor(std::size_t D, double L, std::size_t n);

/// (L/(4n)) (D/2)(1 - sqrt(1 - ρ̄^{2n})) with ρ̄ = 1 - (6n)⁻¹: the bound on
/// estimators taking values in the family.
double family_valued_floor(const AssouadFamily& family);

/// The vertex δ̂ minimizing ‖f - s_δ‖. The bumps have disjoint supports, so
/// δ̂_j = 1 iff ⟨f - 1, g_j⟩ > ‖g‖²/2 (ties go to 0).
HammingIndex nearest_member(const AssouadFamily& family, StepView f);

/// Parameters and the numerical checks of the closed forms above.
nlohmann::json assouad_report(const AssouadFamily& family);

}  // namespace modsel
