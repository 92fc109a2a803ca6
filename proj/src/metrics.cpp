#include "modsel/metrics.hpp"

#include <numeric>
#include <stdexcept>

namespace modsel {

namespace {

constexpr double normalization_slack = 1e-6;

double checked_mass(std::span<const double> values, std::span<const double> lengths) {
    double mass = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0)
            throw std::invalid_argument("density values must be finite and nonnegative");
        mass += values[i] * lengths[i];
    }
    return mass;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridDensity

GridDensity::GridDensity(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("grid density needs at least one cell");
    std::vector<double> lengths(values_.size(), 1.0 / static_cast<double>(values_.size()));
    const double mass = checked_mass(values_, lengths);
    if (std::abs(mass - 1.0) > normalization_slack)
        throw std::invalid_argument("grid density does not integrate to 1");
    for (double& v : values_) v /= mass;
    finish();
}

GridDensity GridDensity::from_unnormalized(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("grid density needs at least one cell");
    std::vector<double> lengths(values.size(), 1.0 / static_cast<double>(values.size()));
    const double mass = checked_mass(values, lengths);
    if (!(mass > 0.0)) throw std::invalid_argument("function has zero mass");
    for (double& v : values) v /= mass;
    return GridDensity(std::move(values));
}

GridDensity GridDensity::tabulate(const std::function<double(double)>& fn, std::size_t grid_size) {
    if (grid_size == 0) throw std::invalid_argument("grid_size must be positive");
    std::vector<double> v(grid_size);
    const double h = 1.0 / static_cast<double>(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) v[i] = fn((static_cast<double>(i) + 0.5) * h);
    return from_unnormalized(std::move(v));
}

GridDensity GridDensity::uniform(std::size_t grid_size) {
    return GridDensity(std::vector<double>(grid_size, 1.0));
}

void GridDensity::finish() {
    const std::size_t n = values_.size();
    const double N = static_cast<double>(n);
    breakpoints_.resize(n + 1);
    cumulative_.resize(n + 1);
    cumulative_[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        breakpoints_[i] = static_cast<double>(i) / N;
        cumulative_[i + 1] = cumulative_[i] + values_[i] / N;
    }
    breakpoints_[n] = 1.0;
}

double GridDensity::operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("point outside [0,1]");
    const auto i = std::min(values_.size() - 1, static_cast<std::size_t>(x * static_cast<double>(values_.size())));
    return values_[i];
}

double GridDensity::integral(double a, double b) const {
    if (!(0.0 <= a && a <= b && b <= 1.0)) throw std::domain_error("integration bounds outside [0,1]");
    const double N = static_cast<double>(values_.size());
    auto F = [&](double x) {
        const double t = x * N;
        auto i = static_cast<std::size_t>(std::floor(t));
        if (i >= values_.size()) return cumulative_.back();
        return cumulative_[i] + (t - static_cast<double>(i)) * values_[i] / N;
    };
    return F(b) - F(a);
}

double GridDensity::sup_norm() const { return *std::max_element(values_.begin(), values_.end()); }

// ---------------------------------------------------------------------------
// PiecewiseDensity

PiecewiseDensity::PiecewiseDensity(Partition partition, std::vector<double> heights)
    : partition_(std::move(partition)), heights_(std::move(heights)) {
    if (heights_.size() != partition_.size())
        throw std::invalid_argument("one height per interval is required");
    std::vector<double> lengths(heights_.size());
    for (std::size_t j = 0; j < lengths.size(); ++j) lengths[j] = partition_.length(j);
    const double mass = checked_mass(heights_, lengths);
    if (std::abs(mass - 1.0) > normalization_slack)
        throw std::invalid_argument("piecewise density does not integrate to 1");
    for (double& a : heights_) a /= mass;
}

PiecewiseDensity PiecewiseDensity::uniform() { return PiecewiseDensity(Partition::trivial(), {1.0}); }

double PiecewiseDensity::sup_norm() const { return *std::max_element(heights_.begin(), heights_.end()); }

// ---------------------------------------------------------------------------
// Distances

double l2_distance_squared(StepView f, StepView g) {
    double acc = 0.0;
    for_each_common_cell(f, g, [&](double len, double a, double b) { acc += len * (a - b) * (a - b); });
    return acc;
}

double hellinger_squared(StepView f, StepView g) {
    double acc = 0.0;
    for_each_common_cell(f, g, [&](double len, double a, double b) {
        const double d = std::sqrt(a) - std::sqrt(b);
        acc += len * d * d;
    });
    return 0.5 * acc;
}

double affinity_value(StepView f, StepView g) {
    double acc = 0.0;
    for_each_common_cell(f, g, [&](double len, double a, double b) { acc += len * std::sqrt(a * b); });
    return acc;
}

double overlap(StepView f, StepView g) {
    double acc = 0.0;
    for_each_common_cell(f, g, [&](double len, double a, double b) { acc += len * std::min(a, b); });
    return acc;
}

double l2_norm_squared(StepView f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        acc += (f.breakpoints[i + 1] - f.breakpoints[i]) * f.values[i] * f.values[i];
    return acc;
}

Affinity::Affinity(double value) : value_(value) {
    constexpr double slack = 1e-9;
    if (!(value >= -slack && value <= 1.0 + slack)) throw std::domain_error("affinity must lie in [0,1]");
    value_ = std::clamp(value, 0.0, 1.0);
}

Affinity affinity_tensor_power(Affinity rho, unsigned n) {
    if (n == 0) throw std::invalid_argument("tensor power needs n >= 1");
    return Affinity(std::pow(rho.value(), static_cast<double>(n)));
}

Affinity gaussian_affinity(std::span<const double> u, std::span<const double> v, double sigma) {
    if (u.size() != v.size()) throw std::invalid_argument("mean vectors must have equal length");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    double d2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) d2 += (u[i] - v[i]) * (u[i] - v[i]);
    return Affinity(std::exp(-d2 / (8.0 * sigma * sigma)));
}

}  // namespace modsel
