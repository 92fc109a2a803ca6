#include "modsel/histograms.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace modsel {

namespace {

// Inverse CDF of a step density given by its StepView.
class StepSampler {
public:
    explicit StepSampler(StepView f) : f_(f), cumulative_(f.values.size() + 1, 0.0) {
        for (std::size_t i = 0; i < f.values.size(); ++i)
            cumulative_[i + 1] = cumulative_[i] + f.values[i] * (f.breakpoints[i + 1] - f.breakpoints[i]);
    }

    double operator()(Rng& rng) const {
        const double u = std::uniform_real_distribution<double>(0.0, cumulative_.back())(rng);
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
        i = std::min(i == 0 ? 0 : i - 1, f_.values.size() - 1);
        // Skip zero-mass cells that upper_bound can land on at the top end.
        while (i > 0 && f_.values[i] <= 0.0) --i;
        const double a = f_.breakpoints[i];
        const double b = f_.breakpoints[i + 1];
        const double x = a + (u - cumulative_[i]) / f_.values[i];
        return std::clamp(x, a, b);
    }

private:
    StepView f_;
    std::vector<double> cumulative_;
};

std::vector<double> draw_step(StepView f, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    StepSampler sampler(f);
    std::vector<double> x(n);
    for (double& v : x) v = sampler(rng);
    return x;
}

// Index-valued step function of a partition, so that for_each_common_cell
// reports which interval of m each refined cell belongs to.
std::vector<double> index_values(const Partition& m) {
    std::vector<double> idx(m.size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = static_cast<double>(j);
    return idx;
}

std::size_t dimension(const Partition& m) { return m.size() - 1; }

}  // namespace

SampleSet sample(const GridDensity& s, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return SampleSet{draw_step(s.step(), n, rng), seed};
}

std::vector<double> draw(const GridDensity& s, std::size_t n, Rng& rng) { return draw_step(s.step(), n, rng); }

std::vector<double> draw(const PiecewiseDensity& s, std::size_t n, Rng& rng) { return draw_step(s.step(), n, rng); }

void write_sample(std::ostream& out, const SampleSet& sample) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    for (double x : sample.points) out << x << '\n';
    out.precision(old);
}

SampleSet read_sample(std::istream& in) {
    SampleSet s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(line.substr(first), &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": not a number");
        }
        if (line.find_first_not_of(" \t\r", first + used) != std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": trailing characters");
        if (!(x >= 0.0 && x <= 1.0))
            throw std::domain_error("line " + std::to_string(lineno) + ": observation outside [0,1]");
        s.points.push_back(x);
    }
    if (s.points.empty()) throw std::invalid_argument("sample file holds no observations");
    return s;
}

CellCounts count_cells(std::span<const double> points, const Partition& m) {
    if (points.empty()) throw std::invalid_argument("empty sample");
    CellCounts c{m, std::vector<std::size_t>(m.size(), 0), points.size()};
    for (double x : points) ++c.counts[m.locate(x)];
    return c;
}

PiecewiseDensity histogram(std::span<const double> points, const Partition& m) {
    const CellCounts c = count_cells(points, m);
    std::vector<double> h(m.size());
    const double n = static_cast<double>(c.n);
    for (std::size_t j = 0; j < h.size(); ++j) h[j] = static_cast<double>(c.counts[j]) / (n * m.length(j));
    return PiecewiseDensity(m, std::move(h));
}

std::vector<double> cell_integrals(StepView f, const Partition& m) {
    const std::vector<double> idx = index_values(m);
    std::vector<double> out(m.size(), 0.0);
    for_each_common_cell(f, StepView{m.breakpoints(), idx},
                         [&](double len, double v, double j) { out[static_cast<std::size_t>(j)] += len * v; });
    return out;
}

std::vector<double> cell_probabilities(const GridDensity& s, const Partition& m) {
    return cell_integrals(s.step(), m);
}

PiecewiseDensity l2_projection(const GridDensity& s, const Partition& m) {
    std::vector<double> p = cell_probabilities(s, m);
    for (std::size_t j = 0; j < p.size(); ++j) p[j] /= m.length(j);
    return PiecewiseDensity(m, std::move(p));
}

double stochastic_error_exact(const GridDensity& s, const Partition& m, std::size_t n) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    const std::vector<double> p = cell_probabilities(s, m);
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) acc += p[j] * (1.0 - p[j]) / m.length(j);
    return acc / static_cast<double>(n);
}

double l2_risk_exact(const GridDensity& s, const Partition& m, std::size_t n) {
    return l2_distance_squared(s, l2_projection(s, m)) + stochastic_error_exact(s, m, n);
}

RiskEstimate l2_risk_mc(const GridDensity& s, const Partition& m, std::size_t n, std::size_t reps,
                        std::uint64_t seed) {
    if (reps == 0) throw std::invalid_argument("reps must be positive");
    const auto losses = replicate(reps, seed, [&](Rng& rng, std::size_t) {
        const auto x = draw(s, n, rng);
        return l2_distance_squared(s, histogram(x, m));
    });
    const MeanSe ms = summarize(losses);
    return {ms.mean, ms.se, reps, l2_risk_exact(s, m, n), seed};
}

HellingerProjection hellinger_projection_bound(const GridDensity& s, const Partition& m) {
    std::vector<double> root(s.values().begin(), s.values().end());
    for (double& v : root) v = std::sqrt(v);
    const StepView sqrt_s{s.step().breakpoints, root};
    std::vector<double> f = cell_integrals(sqrt_s, m);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] /= m.length(j);

    double err = 0.0;
    for_each_common_cell(sqrt_s, StepView{m.breakpoints(), f}, [&](double len, double a, double b) {
        err += len * (a - b) * (a - b);
    });
    err = std::clamp(err, 0.0, 1.0);

    HellingerProjection r;
    r.h2_sm = hellinger_squared(s, l2_projection(s, m));
    r.sqrt_projection = err;
    r.inf_h2 = err / (1.0 + std::sqrt(1.0 - err));  // 1 - sqrt(1 - err), cancellation-free
    constexpr double tol = 1e-10;
    if (r.h2_sm > r.sqrt_projection + tol || r.sqrt_projection > 2.0 * r.inf_h2 + tol)
        throw std::logic_error("Hellinger projection inequality violated");
    return r;
}

RiskEstimate hellinger_risk_mc(const GridDensity& s, const Partition& m, std::size_t n, std::size_t reps,
                               std::uint64_t seed) {
    if (reps == 0) throw std::invalid_argument("reps must be positive");
    const auto losses = replicate(reps, seed, [&](Rng& rng, std::size_t) {
        const auto x = draw(s, n, rng);
        return hellinger_squared(s, histogram(x, m));
    });
    const MeanSe ms = summarize(losses);
    const double ref = 2.0 * hellinger_projection_bound(s, m).inf_h2 +
                       static_cast<double>(dimension(m)) / (2.0 * static_cast<double>(n));
    return {ms.mean, ms.se, reps, ref, seed};
}

HolderClass::HolderClass(double L_, double beta_) : L(L_), beta(beta_) {
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("L must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0,1]");
}

double HolderClass::rate(double n) const {
    if (!(n >= 1.0)) throw std::invalid_argument("n must be at least 1");
    return std::max(std::pow(L * std::pow(n, -beta), 2.0 / (2.0 * beta + 1.0)), 1.0 / n);
}

std::size_t HolderClass::tuned_dimension(double n) const {
    if (!(n >= 1.0)) throw std::invalid_argument("n must be at least 1");
    const double cells = std::ceil(std::pow(n * L * L, 1.0 / (2.0 * beta + 1.0)));
    return static_cast<std::size_t>(std::max(1.0, cells)) - 1;
}

// ---------------------------------------------------------------------------
// Trigonometric projection

double trig_basis(int j, double x) {
    if (j < 0) throw std::invalid_argument("basis index must be nonnegative");
    if (j == 0) return 1.0;
    const int k = (j + 1) / 2;
    const double arg = 2.0 * std::numbers::pi * k * x;
    return std::numbers::sqrt2 * ((j % 2 == 1) ? std::cos(arg) : std::sin(arg));
}

double trig_coefficient(StepView s, int j) {
    if (j < 0) throw std::invalid_argument("basis index must be nonnegative");
    if (j == 0) return 1.0;
    const int k = (j + 1) / 2;
    const double w = 2.0 * std::numbers::pi * k;
    const bool cosine = j % 2 == 1;
    const auto bp = s.breakpoints;
    const auto v = s.values;
    // Antiderivative of √2 cos(wx) is √2 sin(wx)/w; of √2 sin(wx) is -√2 cos(wx)/w.
    auto prim = [&](double x) { return cosine ? std::sin(w * x) : -std::cos(w * x); };
    double acc = 0.0;
    double left = prim(bp[0]);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double right = prim(bp[i + 1]);
        acc += v[i] * (right - left);
        left = right;
    }
    return std::numbers::sqrt2 * acc / w;
}

namespace {

std::vector<int> normalized_indices(std::span<const int> indices) {
    std::vector<int> idx{0};
    for (int j : indices) {
        if (j < 0) throw std::invalid_argument("basis index must be nonnegative");
        if (j > 0) idx.push_back(j);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

}  // namespace

TrigSeries::TrigSeries(std::vector<int> indices, std::vector<double> coefficients)
    : indices_(std::move(indices)), coefficients_(std::move(coefficients)) {
    if (indices_.size() != coefficients_.size()) throw std::invalid_argument("one coefficient per index");
    if (indices_ != normalized_indices(indices_)) throw std::invalid_argument("indices must be sorted, unique, with 0");
}

double TrigSeries::operator()(double x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < indices_.size(); ++i) acc += coefficients_[i] * trig_basis(indices_[i], x);
    return acc;
}

double TrigSeries::l2_distance_squared(StepView s) const {
    std::vector<double> sc(indices_.size());
    for (std::size_t i = 0; i < indices_.size(); ++i) sc[i] = trig_coefficient(s, indices_[i]);
    return l2_distance_squared(l2_norm_squared(s), sc);
}

double TrigSeries::l2_distance_squared(double s_norm_squared, std::span<const double> s_coefficients) const {
    if (s_coefficients.size() != indices_.size()) throw std::invalid_argument("one coefficient per index");
    double acc = s_norm_squared;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        const double c = coefficients_[i];
        acc += c * c - 2.0 * c * s_coefficients[i];
    }
    return std::max(acc, 0.0);
}

TrigSeries trig_projection_estimator(std::span<const double> points, std::span<const int> indices) {
    if (points.empty()) throw std::invalid_argument("empty sample");
    std::vector<int> idx = normalized_indices(indices);
    std::vector<double> c(idx.size(), 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        double acc = 0.0;
        for (double x : points) acc += trig_basis(idx[i], x);
        c[i] = acc / static_cast<double>(points.size());
    }
    return TrigSeries(std::move(idx), std::move(c));
}

double trig_bias_squared(const GridDensity& s, std::span<const int> indices) {
    double acc = l2_norm_squared(s.step());
    for (int j : normalized_indices(indices)) {
        const double c = trig_coefficient(s, j);
        acc -= c * c;
    }
    return std::max(acc, 0.0);
}

double trig_risk_exact(const GridDensity& s, std::span<const int> indices, std::size_t n) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    double var = 0.0;
    for (int j : normalized_indices(indices)) {
        if (j == 0) continue;
        const int k = (j + 1) / 2;
        // 2cos² = 1 + cos(2·2πkx), 2sin² = 1 - cos(2·2πkx); the latter is
        // √2 times basis index 4k - 1.
        const double c2 = trig_coefficient(s, 4 * k - 1) / std::numbers::sqrt2;
        const double second = (j % 2 == 1) ? 1.0 + c2 : 1.0 - c2;
        const double sj = trig_coefficient(s, j);
        var += second - sj * sj;
    }
    return var / static_cast<double>(n) + trig_bias_squared(s, indices);
}

double trig_risk_bound(const GridDensity& s, std::span<const int> indices, std::size_t n) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    const double m = static_cast<double>(normalized_indices(indices).size() - 1);
    return 2.0 * m / static_cast<double>(n) + trig_bias_squared(s, indices);
}

// ---------------------------------------------------------------------------
// Oracle

OracleChoice histogram_oracle(const GridDensity& s, std::span<const Partition> family, std::size_t n,
                              OracleLoss loss) {
    if (family.empty()) throw std::invalid_argument("empty family");
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    const double nn = static_cast<double>(n);
    OracleChoice r{0, std::numeric_limits<double>::infinity(), {}};
    r.criterion.reserve(family.size());
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Partition& m = family[i];
        const double D = static_cast<double>(dimension(m));
        const double v = loss == OracleLoss::l2
                             ? l2_distance_squared(s, l2_projection(s, m)) + D / nn
                             : 2.0 * hellinger_projection_bound(s, m).inf_h2 + D / (2.0 * nn);
        r.criterion.push_back(v);
        const bool better = v < r.value || (v == r.value && m.size() < family[r.index].size());
        if (better) {
            r.index = i;
            r.value = v;
        }
    }
    return r;
}

}  // namespace modsel
