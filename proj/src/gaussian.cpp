#include "modsel/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace modsel {

GaussianObservation gaussian_sample(const Vector& s, double sigma, Rng& rng) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be nonnegative");
    if (s.size() == 0) throw std::invalid_argument("mean vector must be nonempty");
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) x[i] = s[i] + sigma * normal(rng);
    return {std::move(x), sigma};
}

GaussianObservation gaussian_sample(const Vector& s, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    return gaussian_sample(s, sigma, rng);
}

// ---------------------------------------------------------------------------
// LinearModel

LinearModel::LinearModel(Matrix basis, double weight, std::string label)
    : basis_(std::move(basis)), weight_(weight), label_(std::move(label)) {
    if (basis_.cols() == 0 || basis_.rows() == 0) throw std::invalid_argument("model basis is empty");
    if (basis_.cols() > basis_.rows()) throw std::invalid_argument("more basis vectors than the ambient dimension");
    if (!(weight_ > 0.0) || !std::isfinite(weight_)) throw std::invalid_argument("model weight must be positive");
    Eigen::ColPivHouseholderQR<Matrix> pivoted(basis_);
    pivoted.setThreshold(1e-10);
    if (pivoted.rank() < basis_.cols()) throw std::invalid_argument("model basis is rank deficient: " + label_);
    Eigen::HouseholderQR<Matrix> qr(basis_);
    q_ = qr.householderQ() * Matrix::Identity(basis_.rows(), basis_.cols());
}

double LinearModel::residual_squared(const Vector& x) const {
    return std::max(0.0, x.squaredNorm() - (q_.transpose() * x).squaredNorm());
}

double LinearModel::bias_squared(const Vector& s) const { return (s - project(s)).squaredNorm(); }

Vector project_mle(const GaussianObservation& obs, const LinearModel& model) {
    if (static_cast<std::size_t>(obs.x.size()) != model.ambient_dimension())
        throw std::invalid_argument("observation and model dimensions differ");
    return model.project(obs.x);
}

double projection_risk_exact(const Vector& s, const LinearModel& model, double sigma) {
    return sigma * sigma * static_cast<double>(model.dim()) + model.bias_squared(s);
}

RiskEstimate projection_risk_mc(const Vector& s, const LinearModel& model, double sigma, std::size_t reps,
                                std::uint64_t seed) {
    if (reps == 0) throw std::invalid_argument("reps must be positive");
    const auto losses = replicate(reps, seed, [&](Rng& rng, std::size_t) {
        const auto obs = gaussian_sample(s, sigma, rng);
        return (project_mle(obs, model) - s).squaredNorm();
    });
    const MeanSe ms = summarize(losses);
    return {ms.mean, ms.se, reps, projection_risk_exact(s, model, sigma), seed};
}

TwoPointChoice gaussian_two_point_test(const GaussianObservation& obs, const Vector& v, const Vector& u) {
    if (v.size() != u.size() || v.size() != obs.x.size()) throw std::invalid_argument("dimension mismatch");
    if (v == u) throw std::invalid_argument("the two points must differ");
    return (obs.x - u).squaredNorm() < (obs.x - v).squaredNorm() ? TwoPointChoice::u : TwoPointChoice::v;
}

// ---------------------------------------------------------------------------
// Lattice nets

LatticeNet::LatticeNet(LinearModel model, double lambda) : model_(std::move(model)), lambda_(lambda) {
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw std::invalid_argument("lambda must be positive");
}

double LatticeNet::covering_radius() const noexcept {
    return lambda_ * std::sqrt(static_cast<double>(model_.dim()));
}

Vector LatticeNet::point(const LatticeIndex& k) const {
    if (static_cast<std::size_t>(k.size()) != model_.dim()) throw std::invalid_argument("lattice index dimension");
    return model_.orthonormal() * (spacing() * k.cast<double>());
}

LatticeIndex LatticeNet::nearest(const Vector& x) const {
    const Vector c = model_.coordinates(x) / spacing();
    LatticeIndex k(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double r = std::round(c[i]);
        if (std::abs(r) > static_cast<double>(std::numeric_limits<int>::max()))
            throw std::overflow_error("lattice coordinate out of range");
        k[i] = static_cast<int>(r);
    }
    return k;
}

double minimum_lambda(double sigma) { return 4.0 * std::sqrt(3.0) * sigma; }

double default_radius_cap(const LatticeNet& net) {
    return 8.0 * net.lambda() * std::sqrt(2.0 * static_cast<double>(net.model().dim()));
}

LatticeIndex lattice_mle(const GaussianObservation& obs, const LatticeNet& net, const LatticeIndex& anchor,
                         std::optional<double> radius_cap) {
    if (net.lambda() < minimum_lambda(obs.sigma) * (1.0 - 1e-12))
        throw std::invalid_argument("lambda below 4*sqrt(3)*sigma");
    const double cap = radius_cap.value_or(default_radius_cap(net));
    const LatticeIndex k = net.nearest(obs.x);
    const double dist = net.spacing() * (k - anchor).cast<double>().norm();
    if (dist > cap) throw std::out_of_range("nearest lattice point lies outside the radius cap");
    return k;
}

namespace {

struct BallWalk {
    const std::vector<double>& c;  // center in lattice units
    double spacing;
    std::uint64_t budget;
    std::uint64_t nodes = 0;

    void tick() {
        if (++nodes > budget) throw std::length_error("lattice enumeration budget exceeded");
    }

    // Index range of coordinate i reachable with squared radius r2 (lattice units).
    std::pair<long long, long long> range(std::size_t i, double r2) const {
        const double r = std::sqrt(std::max(r2, 0.0));
        return {static_cast<long long>(std::ceil(c[i] - r)), static_cast<long long>(std::floor(c[i] + r))};
    }
};

}  // namespace

void for_each_lattice_point_in_ball(const LatticeNet& net, const Vector& center, double radius,
                                    const std::function<void(const LatticeIndex&)>& visit, std::uint64_t budget) {
    if (!(radius >= 0.0)) throw std::invalid_argument("radius must be nonnegative");
    const double sp = net.spacing();
    const Vector cc = net.model().coordinates(center);
    const double perp2 = net.model().residual_squared(center);
    std::vector<double> c(cc.data(), cc.data() + cc.size());
    for (double& v : c) v /= sp;
    const double r2 = (radius * radius - perp2) / (sp * sp);
    if (r2 < 0.0) return;
    BallWalk walk{c, sp, budget};
    const std::size_t D = c.size();
    LatticeIndex k(static_cast<Eigen::Index>(D));
    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double rem) {
        const auto [lo, hi] = walk.range(i, rem);
        for (long long j = lo; j <= hi; ++j) {
            walk.tick();
            const double d = static_cast<double>(j) - c[i];
            const double left = rem - d * d;
            if (left < 0.0) continue;
            k[static_cast<Eigen::Index>(i)] = static_cast<int>(j);
            if (i + 1 == D) {
                visit(k);
            } else {
                rec(i + 1, left);
            }
        }
    };
    rec(0, r2);
}

std::uint64_t count_lattice_in_ball(const LatticeNet& net, const Vector& center, double radius,
                                    std::uint64_t budget) {
    if (!(radius >= 0.0)) throw std::invalid_argument("radius must be nonnegative");
    const double sp = net.spacing();
    const Vector cc = net.model().coordinates(center);
    const double perp2 = net.model().residual_squared(center);
    std::vector<double> c(cc.data(), cc.data() + cc.size());
    for (double& v : c) v /= sp;
    const double r2 = (radius * radius - perp2) / (sp * sp);
    if (r2 < 0.0) return 0;
    BallWalk walk{c, sp, budget};
    const std::size_t D = c.size();
    // The last coordinate is counted in closed form; exact points on the
    // sphere are kept by re-checking the range ends.
    std::function<std::uint64_t(std::size_t, double)> rec = [&](std::size_t i, double rem) -> std::uint64_t {
        auto [lo, hi] = walk.range(i, rem);
        if (i + 1 == D) {
            walk.tick();
            auto inside = [&](long long j) {
                const double d = static_cast<double>(j) - c[i];
                return rem - d * d >= 0.0;
            };
            while (lo <= hi && !inside(lo)) ++lo;
            while (hi >= lo && !inside(hi)) --hi;
            return hi >= lo ? static_cast<std::uint64_t>(hi - lo + 1) : 0;
        }
        std::uint64_t total = 0;
        for (long long j = lo; j <= hi; ++j) {
            walk.tick();
            const double d = static_cast<double>(j) - c[i];
            const double left = rem - d * d;
            if (left >= 0.0) total += rec(i + 1, left);
        }
        return total;
    };
    return rec(0, r2);
}

double lattice_ball_bound(std::size_t D, double x) {
    if (!(x >= 2.0)) throw std::domain_error("ball-count bound needs x >= 2");
    return std::exp(x * x * static_cast<double>(D) / 2.0);
}

NetCheck verify_net_property(const LinearModel& model, double eta, std::uint64_t seed, std::size_t cover_samples,
                             std::size_t count_centers) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    NetCheck r;
    r.D = model.dim();
    r.eta = eta;
    r.lambda = eta / std::sqrt(static_cast<double>(r.D));
    const LatticeNet net(model, r.lambda);
    Rng rng(seed);
    std::uniform_real_distribution<double> box(-5.0 * eta, 5.0 * eta);
    const auto D = static_cast<Eigen::Index>(r.D);

    auto random_model_point = [&] {
        Vector c(D);
        for (Eigen::Index i = 0; i < D; ++i) c[i] = box(rng);
        return Vector(model.orthonormal() * c);
    };

    for (std::size_t i = 0; i < cover_samples; ++i) {
        const Vector t = random_model_point();
        r.max_cover_distance = std::max(r.max_cover_distance, (t - net.point(net.nearest(t))).norm());
    }
    r.covering_ok = r.max_cover_distance <= eta * (1.0 + 1e-12);

    // A lattice point and a deep hole, then random centers.
    std::vector<Vector> centers;
    centers.push_back(net.point(LatticeIndex::Ones(D)));
    centers.push_back(Vector(model.orthonormal() * Vector::Constant(D, r.lambda)));
    while (centers.size() < std::max<std::size_t>(count_centers, 2)) centers.push_back(random_model_point());

    r.x_values = {2.0, 3.0, 4.0};
    r.counts_ok = true;
    for (double x : r.x_values) {
        std::uint64_t worst = 0;
        for (const Vector& t : centers) worst = std::max(worst, count_lattice_in_ball(net, t, x * eta));
        const double bound = std::exp(x * x * model.metric_dimension());
        r.max_counts.push_back(worst);
        r.count_bounds.push_back(bound);
        if (static_cast<double>(worst) > bound) r.counts_ok = false;
    }

    r.min_floor_count = std::numeric_limits<std::uint64_t>::max();
    for (const Vector& t : centers) r.min_floor_count = std::min(r.min_floor_count, count_lattice_in_ball(net, t, 3.0 * eta));
    r.floor_ok = static_cast<double>(r.min_floor_count) >= std::ldexp(1.0, static_cast<int>(r.D));
    return r;
}

// ---------------------------------------------------------------------------
// Penalized selection

double kraft_sum(std::span<const LinearModel> models) {
    long double acc = 0.0L;
    for (const auto& m : models) acc += std::exp(-static_cast<long double>(m.weight()));
    return static_cast<double>(acc);
}

PenalizedChoice penalized_select(const GaussianObservation& obs, std::span<const LinearModel> models, double kappa) {
    if (models.empty()) throw std::invalid_argument("empty model list");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    if (kraft_sum(models) > 1.0 + 1e-12) throw std::invalid_argument("model weights violate the Kraft condition");
    const double s2 = obs.sigma * obs.sigma;
    PenalizedChoice r{0, {}, {}};
    r.criterion.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        if (m.ambient_dimension() != static_cast<std::size_t>(obs.x.size()))
            throw std::invalid_argument("observation and model dimensions differ");
        const double pen = kappa * s2 * std::max(static_cast<double>(m.dim()), m.weight());
        r.criterion.push_back(m.residual_squared(obs.x) + pen);
        if (i == 0) continue;
        const auto& best = models[r.index];
        const double c = r.criterion[i];
        const double b = r.criterion[r.index];
        const bool better =
            c < b || (c == b && (m.dim() < best.dim() || (m.dim() == best.dim() && m.label() < best.label())));
        if (better) r.index = i;
    }
    r.estimate = models[r.index].project(obs.x);
    return r;
}

double projection_oracle(const Vector& s, std::span<const LinearModel> models, double sigma) {
    if (models.empty()) throw std::invalid_argument("empty model list");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : models) best = std::min(best, projection_risk_exact(s, m, sigma));
    return best;
}

PenalizedRisk penalized_risk_mc(const Vector& s, std::span<const LinearModel> models, double sigma, double kappa,
                                std::size_t reps, std::uint64_t seed) {
    if (reps == 0) throw std::invalid_argument("reps must be positive");
    struct One {
        double loss;
        std::size_t index;
    };
    const auto out = replicate(reps, seed, [&](Rng& rng, std::size_t) {
        const auto obs = gaussian_sample(s, sigma, rng);
        const auto choice = penalized_select(obs, models, kappa);
        return One{(choice.estimate - s).squaredNorm(), choice.index};
    });
    std::vector<double> losses(reps);
    PenalizedRisk r;
    r.selected.assign(models.size(), 0);
    for (std::size_t i = 0; i < reps; ++i) {
        losses[i] = out[i].loss;
        ++r.selected[out[i].index];
    }
    const MeanSe ms = summarize(losses);
    r.risk = {ms.mean, ms.se, reps, projection_oracle(s, models, sigma), seed};
    return r;
}

// ---------------------------------------------------------------------------
// Variable selection

VariableSelectionMode parse_variable_selection_mode(const std::string& name) {
    if (name == "ordered") return VariableSelectionMode::ordered;
    if (name == "all-subsets") return VariableSelectionMode::all_subsets;
    if (name == "mixed") return VariableSelectionMode::mixed;
    throw std::invalid_argument("unknown variable selection mode: " + name);
}

std::string to_string(VariableSelectionMode mode) {
    switch (mode) {
        case VariableSelectionMode::ordered: return "ordered";
        case VariableSelectionMode::all_subsets: return "all-subsets";
        case VariableSelectionMode::mixed: return "mixed";
    }
    return "?";
}

namespace {

std::string subset_label(const std::vector<std::size_t>& cols) {
    std::string s = "{";
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(cols[i] + 1);
    }
    return s + "}";
}

Matrix columns(const Matrix& Z, const std::vector<std::size_t>& cols) {
    Matrix B(Z.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) B.col(static_cast<Eigen::Index>(i)) = Z.col(static_cast<Eigen::Index>(cols[i]));
    return B;
}

bool is_prefix(const std::vector<std::size_t>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i] != i) return false;
    return true;
}

}  // namespace

std::vector<LinearModel> build_variable_selection_family(const Matrix& Z, VariableSelectionMode mode,
                                                         std::size_t max_card, std::size_t max_models) {
    const auto p = static_cast<std::size_t>(Z.cols());
    if (p == 0 || Z.rows() == 0) throw std::invalid_argument("design matrix is empty");
    if (max_card == 0 || max_card > p) max_card = p;
    std::vector<LinearModel> out;

    if (mode == VariableSelectionMode::ordered) {
        if (max_card > max_models) throw std::length_error("variable selection family exceeds the model cap");
        std::vector<std::size_t> cols;
        for (std::size_t q = 1; q <= max_card; ++q) {
            cols.push_back(q - 1);
            out.emplace_back(columns(Z, cols), static_cast<double>(q), subset_label(cols));
        }
        return out;
    }

    long double total = 0.0L;
    long double binom = 1.0L;
    for (std::size_t q = 1; q <= max_card; ++q) {
        binom = binom * static_cast<long double>(p - q + 1) / static_cast<long double>(q);
        total += binom;
    }
    if (total > static_cast<long double>(max_models))
        throw std::length_error("variable selection family exceeds the model cap");

    const double logp = std::log(static_cast<double>(p));
    for (std::size_t q = 1; q <= max_card; ++q) {
        std::vector<std::size_t> cols(q);
        for (std::size_t i = 0; i < q; ++i) cols[i] = i;
        while (true) {
            double w = 1.0 + static_cast<double>(q) * logp;
            if (mode == VariableSelectionMode::mixed && is_prefix(cols)) w = static_cast<double>(q) + 0.5;
            out.emplace_back(columns(Z, cols), w, subset_label(cols));
            // next combination in lexicographic order
            std::size_t i = q;
            while (i > 0 && cols[i - 1] == p - q + (i - 1)) --i;
            if (i == 0) break;
            ++cols[i - 1];
            for (std::size_t j = i; j < q; ++j) cols[j] = cols[j - 1] + 1;
        }
    }
    return out;
}

Matrix read_design_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (rows.empty() && lineno == 1) continue;  // header
            throw std::invalid_argument("line " + std::to_string(lineno) + ": non-numeric cell");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("line " + std::to_string(lineno) + ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("design file holds no rows");
    Matrix Z(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return Z;
}

}  // namespace modsel
