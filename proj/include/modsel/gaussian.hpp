#pragma once

// Gaussian sequence framework X = s + σξ in R^n: projection estimators on
// linear models, lattice nets and their maximum likelihood estimator,
// two-point tests, penalized selection and variable-selection families.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modsel/montecarlo.hpp"

namespace modsel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct GaussianObservation {
    Vector x;
    double sigma;
};

/// X = s + σξ with ξ standard normal; σ = 0 gives X = s.
GaussianObservation gaussian_sample(const Vector& s, double sigma, std::uint64_t seed);
GaussianObservation gaussian_sample(const Vector& s, double sigma, Rng& rng);

/// Linear span of the columns of a basis matrix, with a weight Δ_m.
class LinearModel {
public:
    /// Throws std::invalid_argument on an empty or rank-deficient basis or a
    /// non-positive weight.
    LinearModel(Matrix basis, double weight, std::string label);

    std::size_t ambient_dimension() const noexcept { return static_cast<std::size_t>(q_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(q_.cols()); }
    /// D̄ = D/2, the metric dimension bound of a D-dimensional linear space.
    double metric_dimension() const noexcept { return 0.5 * static_cast<double>(dim()); }
    double weight() const noexcept { return weight_; }
    const std::string& label() const noexcept { return label_; }
    const Matrix& basis() const noexcept { return basis_; }
    /// Orthonormal basis of the same span.
    const Matrix& orthonormal() const noexcept { return q_; }

    Vector coordinates(const Vector& x) const { return q_.transpose() * x; }
    Vector project(const Vector& x) const { return q_ * (q_.transpose() * x); }
    /// ‖x - Πx‖², computed as ‖x‖² - ‖Qᵀx‖².
    double residual_squared(const Vector& x) const;
    /// inf_{t in model} ‖s - t‖².
    double bias_squared(const Vector& s) const;

private:
    Matrix basis_;
    Matrix q_;
    double weight_;
    std::string label_;
};

/// Orthogonal projection of X onto the model (the MLE over the span).
Vector project_mle(const GaussianObservation& obs, const LinearModel& model);

/// σ²D + inf_t ‖s - t‖².
double projection_risk_exact(const Vector& s, const LinearModel& model, double sigma);

/// MC mean of ‖s - project_mle‖²; reference is projection_risk_exact.
RiskEstimate projection_risk_mc(const Vector& s, const LinearModel& model, double sigma, std::size_t reps,
                                std::uint64_t seed);

enum class TwoPointChoice { v, u };

/// Likelihood comparison between N(v, σ²I) and N(u, σ²I), i.e. the nearer
/// of v and u to X. Ties go to v. Throws if u == v.
TwoPointChoice gaussian_two_point_test(const GaussianObservation& obs, const Vector& v, const Vector& u);

// ---------------------------------------------------------------------------
// Lattice nets

using LatticeIndex = Eigen::VectorXi;

/// The lattice (2λZ)^D in the orthonormal coordinates of a model, anchored at
/// the origin. Requires λ ≥ 4√3 σ when used for estimation.
class LatticeNet {
public:
    LatticeNet(LinearModel model, double lambda);

    const LinearModel& model() const noexcept { return model_; }
    double lambda() const noexcept { return lambda_; }
    double spacing() const noexcept { return 2.0 * lambda_; }
    /// Covering radius λ√D.
    double covering_radius() const noexcept;

    Vector point(const LatticeIndex& k) const;
    /// Lattice point nearest to the projection of x onto the model.
    LatticeIndex nearest(const Vector& x) const;

private:
    LinearModel model_;
    double lambda_;
};

/// Smallest admissible λ for noise level σ: 4√3 σ.
double minimum_lambda(double sigma);

/// λ√(2D)·8.
double default_radius_cap(const LatticeNet& net);

/// argmax_t g_t(X) over lattice points within radius_cap of the anchor. The
/// maximizer over the whole lattice is the nearest point to the projection
/// of X; throws std::out_of_range if it lies outside the cap, and
/// std::invalid_argument if λ < 4√3 σ.
LatticeIndex lattice_mle(const GaussianObservation& obs, const LatticeNet& net, const LatticeIndex& anchor,
                         std::optional<double> radius_cap = std::nullopt);

inline constexpr std::uint64_t default_enumeration_budget = 100'000'000;

/// Calls visit(k) for every lattice point t with ‖t - center‖ ≤ radius.
/// Throws std::length_error once more than budget search nodes are visited.
void for_each_lattice_point_in_ball(const LatticeNet& net, const Vector& center, double radius,
                                    const std::function<void(const LatticeIndex&)>& visit,
                                    std::uint64_t budget = default_enumeration_budget);

std::uint64_t count_lattice_in_ball(const LatticeNet& net, const Vector& center, double radius,
                                    std::uint64_t budget = default_enumeration_budget);

/// exp(x² D / 2), the ball-count bound for x ≥ 2.
double lattice_ball_bound(std::size_t D, double x);

struct NetCheck {
    std::size_t D = 0;
    double eta = 0.0;
    double lambda = 0.0;
    double max_cover_distance = 0.0;  // over sampled t in the model
    bool covering_ok = false;
    std::vector<double> x_values;
    std::vector<std::uint64_t> max_counts;  // per x, over sampled centers
    std::vector<double> count_bounds;       // exp(x² D̄), D̄ = D/2
    bool counts_ok = false;
    std::uint64_t min_floor_count = 0;  // min over centers of |S ∩ B(t, 3η)|
    bool floor_ok = false;              // ≥ 2^D
    bool passed() const noexcept { return covering_ok && counts_ok && floor_ok; }
};

/// Checks the η-net property of the lattice with η = λ√D on the model:
/// covering at cover_samples random points of a box around the origin, and
/// ball counts for x ∈ {2, 3, 4} at count_centers centers.
NetCheck verify_net_property(const LinearModel& model, double eta, std::uint64_t seed = 1,
                             std::size_t cover_samples = 1000, std::size_t count_centers = 4);

// ---------------------------------------------------------------------------
// Penalized selection

inline constexpr double default_kappa = 4.0;

struct PenalizedChoice {
    std::size_t index;
    Vector estimate;
    std::vector<double> criterion;
};

/// Minimizes ‖X - ŝ_m‖² + κσ² max{D_m, Δ_m}. Ties go to the smallest D_m, then
/// the smallest label. Throws on an empty list or a Kraft sum above 1.
PenalizedChoice penalized_select(const GaussianObservation& obs, std::span<const LinearModel> models,
                                 double kappa = default_kappa);

/// Σ exp(-Δ_m).
double kraft_sum(std::span<const LinearModel> models);

/// inf_m {σ² D_m + inf_t ‖s - t‖²}.
double projection_oracle(const Vector& s, std::span<const LinearModel> models, double sigma);

struct PenalizedRisk {
    RiskEstimate risk;
    std::vector<std::size_t> selected;  // selection count per model
};

PenalizedRisk penalized_risk_mc(const Vector& s, std::span<const LinearModel> models, double sigma,
                                double kappa, std::size_t reps, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Variable selection

enum class VariableSelectionMode { ordered, all_subsets, mixed };

VariableSelectionMode parse_variable_selection_mode(const std::string& name);
std::string to_string(VariableSelectionMode mode);

/// Models spanned by columns of Z (1-based labels such as "{1,3}").
///   ordered:     {1..q}, Δ = q
///   all-subsets: every nonempty subset with |m| ≤ max_card, Δ = 1 + |m| log p
///   mixed:       all-subsets, with Δ = q + 1/2 on the nested models
/// Throws std::length_error if more than max_models models would be built,
/// and std::invalid_argument if a subset is rank deficient.
std::vector<LinearModel> build_variable_selection_family(const Matrix& Z, VariableSelectionMode mode,
                                                         std::size_t max_card = 0,
                                                         std::size_t max_models = 1u << 20);

/// Rows are observations, columns variables. A non-numeric first line is
/// treated as a header.
Matrix read_design_csv(std::istream& in);

}  // namespace modsel
