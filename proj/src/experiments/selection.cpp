#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "common.hpp"
#include "modsel/gaussian.hpp"
#include "modsel/histograms.hpp"
#include "modsel/selection.hpp"

namespace modsel::exp {

namespace {

std::string density_label(const nlohmann::json& spec) {
    std::string name = spec["kind"].get<std::string>();
    for (const auto& [k, v] : spec.items())
        if (k != "kind") name += "," + k + "=" + v.dump();
    return name;
}

int floor_log2(std::size_t n) {
    int k = 0;
    while ((std::size_t{2} << k) <= n) ++k;
    return k;
}

WeightedFamily regular_family(int max_k) {
    std::vector<Partition> parts;
    for (int k = 0; k <= max_k; ++k) parts.push_back(regular_dyadic_partition(k));
    return assign_weights(parts, WeightScheme::mixed, "regular");
}

// Dyadic partitions up to resolution max_dyadic, regular partitions up to
// 2^max_regular cells and tree partitions up to max_leaves leaves.
WeightedFamily mixed_family(int max_dyadic, int max_regular, std::size_t max_leaves) {
    std::vector<Partition> parts;
    std::set<std::vector<double>> seen;
    auto insert = [&](const Partition& m) {
        const auto b = m.breakpoints();
        if (seen.emplace(b.begin(), b.end()).second) parts.push_back(m);
    };
    insert(Partition::trivial());
    for (int k = 1; k <= max_dyadic; ++k)
        for (std::size_t D = 1; D < (std::size_t{1} << k); ++D)
            for (const auto& m : enumerate_dyadic_family(DyadicIndex(k, D))) insert(m);
    for (int k = 0; k <= max_regular; ++k) insert(regular_dyadic_partition(k));
    for (const auto& m : enumerate_tree_partitions(max_leaves)) insert(m);
    return assign_weights(parts, WeightScheme::mixed, "mixed");
}

// Least-squares slope of log y on log x and its delta-method standard error.
std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                                       const std::vector<double>& se) {
    const std::size_t k = x.size();
    double mx = 0.0;
    for (double v : x) mx += std::log(v);
    mx /= static_cast<double>(k);
    double sxx = 0.0;
    for (double v : x) sxx += (std::log(v) - mx) * (std::log(v) - mx);
    double slope = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double w = (std::log(x[i]) - mx) / sxx;
        slope += w * std::log(y[i]);
        var += w * w * (se[i] / y[i]) * (se[i] / y[i]);
    }
    return {slope, std::sqrt(var)};
}

Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = nd(rng);
    return M;
}

// inf_m {σ² max(D̄_m, Δ_m) + inf_t ‖s - t‖²}
double gaussian_oracle(const Vector& s, std::span<const LinearModel> models, double sigma) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : models)
        best = std::min(best, sigma * sigma * std::max(m.metric_dimension(), m.weight()) + m.bias_squared(s));
    return best;
}

}  // namespace

RiskReport rate_holder(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const nlohmann::json fallback = nlohmann::json::array(
        {{{"density", {{"kind", "holder-triangle"}, {"L", 1.0}}}, {"L", 1.0}, {"beta", 1.0}},
         {{"density", {{"kind", "holder-weierstrass"}, {"L", 1.0}, {"beta", 0.5}}}, {"L", 1.0}, {"beta", 0.5}}});
    const auto scenarios = cfg.params.contains("scenarios") ? cfg.params["scenarios"] : fallback;
    const double tol = param<double>(cfg, "slope_tolerance", 0.15);
    const auto tuned_reps = param<std::size_t>(cfg, "tuned_reps", 500);

    for (const auto& sc : scenarios) {
        const GridDensity s = make_density(sc["density"]);
        const HolderClass H(sc["L"].get<double>(), sc["beta"].get<double>());
        const std::string name = density_label(sc["density"]);
        const double target = -2.0 * H.beta / (2.0 * H.beta + 1.0);

        std::vector<double> xs, ys, ses;
        for (std::size_t n : cfg.n_grid) {
            const std::size_t half = n / 2;
            const WeightedFamily fam = regular_family(floor_log2(half));
            const std::uint64_t seed = rows.next_seed();
            const auto loss = replicate(cfg.reps, seed, [&](Rng& rng, std::size_t) {
                const auto x = draw(s, 2 * half, rng);
                return hellinger_squared(s, holdout_select(x, fam).density);
            });
            const MeanSe e = summarize(loss);
            xs.push_back(static_cast<double>(n));
            ys.push_back(e.mean);
            ses.push_back(e.se);
            rows.add(Gate::report_only(rows.make(name, n, "holdout-regular", static_cast<double>(fam.size()), e.mean,
                                                 e.se, H.rate(static_cast<double>(n)), cfg.reps, seed)));

            // Regular partition tuned to (L, β) with the whole sample.
            const std::size_t D = H.tuned_dimension(static_cast<double>(n));
            const std::uint64_t tseed = rows.next_seed();
            const RiskEstimate t = hellinger_risk_mc(s, regular_partition(D), n, tuned_reps, tseed);
            const double nd = static_cast<double>(n);
            const double bound =
                std::max(2.5 * std::pow(H.L * std::pow(nd, -H.beta), 2.0 / (2.0 * H.beta + 1.0)), 1.0 / nd);
            rows.add(rows.gate().at_most(
                rows.make(name + ":tuned", n, "regular", static_cast<double>(D), t.mean, t.se, bound, t.reps, tseed)));
        }
        const auto [slope, slope_se] = loglog_slope(xs, ys, ses);
        rows.add(Gate::within(rows.make(name + ":loglog-slope", cfg.n_grid.back(), "holdout-regular", H.beta, slope,
                                        slope_se, target, cfg.reps, cfg.seed),
                              target - tol, target + tol));
    }
    return rows.finish();
}

RiskReport oracle_ratio_gaussian(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const auto p = param<std::size_t>(cfg, "p", 10);
    const auto N = static_cast<Eigen::Index>(cfg.n_grid.front());
    const double sigma = param<double>(cfg, "sigma", 1.0);
    const double kappa = param<double>(cfg, "kappa", default_kappa);
    const double cap = param<double>(cfg, "ratio_cap", 10.0);

    Rng rng = make_rng(cfg.seed, 0);
    const Matrix Z = gaussian_matrix(rng, N, static_cast<Eigen::Index>(p));
    const auto P = static_cast<Eigen::Index>(p);

    std::vector<std::pair<std::string, Vector>> scenarios;
    auto coef = [&](std::initializer_list<std::pair<Eigen::Index, double>> entries) {
        Vector b = Vector::Zero(P);
        for (auto [i, v] : entries) b[i] = v;
        return b;
    };
    scenarios.emplace_back("null", Vector::Zero(P));
    scenarios.emplace_back("sparse-leading", coef({{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}));
    scenarios.emplace_back("sparse-misordered", coef({{0, 1.0}, {1, 1.0}, {2, 1.0}, {P - 1, 1.0}}));
    Vector decay(P);
    for (Eigen::Index j = 0; j < P; ++j) decay[j] = 1.0 / static_cast<double>(j + 1);
    scenarios.emplace_back("decaying", decay);
    scenarios.emplace_back("weak-dense", Vector::Constant(P, 0.15));

    for (const auto mode :
         {VariableSelectionMode::ordered, VariableSelectionMode::all_subsets, VariableSelectionMode::mixed}) {
        const auto models = build_variable_selection_family(Z, mode);
        for (const auto& [name, beta] : scenarios) {
            const Vector s = Z * beta;
            const double oracle = gaussian_oracle(s, models, sigma);
            const std::uint64_t seed = rows.next_seed();
            const PenalizedRisk r = penalized_risk_mc(s, models, sigma, kappa, cfg.reps, seed);
            rows.add(Gate::ratio_at_most(rows.make(name, static_cast<std::size_t>(N), to_string(mode),
                                                   static_cast<double>(models.size()), r.risk.mean, r.risk.se, oracle,
                                                   cfg.reps, seed),
                                         cap));
        }
    }
    return rows.finish();
}

RiskReport oracle_ratio_holdout(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const nlohmann::json fallback = nlohmann::json::array({
        {{"kind", "uniform"}},
        {{"kind", "linear"}, {"slope", 2.0}},
        {{"kind", "beta"}, {"a", 2.0}, {"b", 5.0}},
        {{"kind", "bimodal"}, {"width", 0.08}},
        {{"kind", "holder-triangle"}, {"L", 1.0}},
        {{"kind", "spiky"}, {"width", 0.01}, {"height", 20.0}},
        {{"kind", "step"}, {"heights", {0.5, 1.5, 0.5, 1.5, 1.0}}},
    });
    const auto specs = cfg.params.contains("densities") ? cfg.params["densities"] : fallback;
    const double cap = param<double>(cfg, "ratio_cap", 10.0);
    const std::vector<WeightedFamily> families{regular_family(param<int>(cfg, "max_regular", 8)),
                                               mixed_family(param<int>(cfg, "max_dyadic", 3),
                                                            param<int>(cfg, "max_regular", 8),
                                                            param<std::size_t>(cfg, "max_leaves", 5))};

    for (const auto& spec : specs) {
        const GridDensity s = make_density(spec);
        const std::string name = density_label(spec);
        for (const auto& fam : families) {
            std::vector<double> inf_h2(fam.size());
            for (std::size_t i = 0; i < fam.size(); ++i)
                inf_h2[i] = hellinger_projection_bound(s, fam.members()[i].partition).inf_h2;
            for (std::size_t n : cfg.n_grid) {
                const std::size_t half = n / 2;
                double oracle = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < fam.size(); ++i) {
                    const auto& m = fam.members()[i];
                    const double size = std::max(static_cast<double>(m.partition.size()), m.weight.value());
                    oracle = std::min(oracle, size / static_cast<double>(half) + inf_h2[i]);
                }
                const std::uint64_t seed = rows.next_seed();
                struct Out {
                    double tournament;
                    double baseline;
                };
                const auto outs = replicate(cfg.reps, seed, [&](Rng& rng, std::size_t) {
                    const auto x = draw(s, 2 * half, rng);
                    return Out{hellinger_squared(s, holdout_select(x, fam).density),
                               hellinger_squared(s, baseline_penalized_holdout(x, fam).density)};
                });
                std::vector<double> a(outs.size()), b(outs.size());
                for (std::size_t i = 0; i < outs.size(); ++i) {
                    a[i] = outs[i].tournament;
                    b[i] = outs[i].baseline;
                }
                const MeanSe ea = summarize(a);
                const MeanSe eb = summarize(b);
                const double size = static_cast<double>(fam.size());
                rows.add(Gate::ratio_at_most(
                    rows.make(name, n, fam.label() + ":holdout", size, ea.mean, ea.se, oracle, cfg.reps, seed), cap));
                rows.add(Gate::report_only(
                    rows.make(name, n, fam.label() + ":baseline", size, eb.mean, eb.se, oracle, cfg.reps, seed)));
            }
        }
    }
    return rows.finish();
}

RiskReport varsel_misorder(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const auto p = param<std::size_t>(cfg, "p", 20);
    const auto N = static_cast<Eigen::Index>(cfg.n_grid.front());
    const double sigma = param<double>(cfg, "sigma", 1.0);
    const double strength = param<double>(cfg, "strength", 1.5);
    const auto max_card = param<std::size_t>(cfg, "max_card", 5);
    const auto mixed_reps = param<std::size_t>(cfg, "mixed_reps", 200);
    const auto P = static_cast<Eigen::Index>(p);

    // Orthogonal design with columns of norm √n.
    Rng rng = make_rng(cfg.seed, 0);
    const Matrix G = gaussian_matrix(rng, N, P);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ() * Matrix::Identity(N, P);
    const Matrix Z = std::sqrt(static_cast<double>(N)) * Q;

    const auto ordered = build_variable_selection_family(Z, VariableSelectionMode::ordered);
    std::vector<LinearModel> mixed = build_variable_selection_family(Z, VariableSelectionMode::mixed, max_card);
    for (std::size_t q = max_card + 1; q <= p; ++q)
        mixed.emplace_back(ordered[q - 1].basis(), static_cast<double>(q) + 0.5, ordered[q - 1].label());

    auto signal = [&](std::initializer_list<Eigen::Index> idx) {
        Vector b = Vector::Zero(P);
        for (auto i : idx) b[i] = strength;
        return Vector(Z * b);
    };
    const Vector correct = signal({0, 1, 2, 3});
    const Vector misordered = signal({0, 1, 2, P - 1});
    const double l = static_cast<double>(p);
    const auto n = static_cast<std::size_t>(N);
    const double s2 = sigma * sigma;

    std::uint64_t seed = rows.next_seed();
    const PenalizedRisk rc = penalized_risk_mc(correct, ordered, sigma, default_kappa, cfg.reps, seed);
    rows.add(Gate::within(rows.make("correct-order", n, "ordered:risk/(4sigma^2)", 4.0, rc.risk.mean / (4.0 * s2),
                                    rc.risk.se / (4.0 * s2), 1.0, cfg.reps, seed),
                          0.5, 2.0));

    seed = rows.next_seed();
    const PenalizedRisk rm = penalized_risk_mc(misordered, ordered, sigma, default_kappa, cfg.reps, seed);
    rows.add(Gate::within(rows.make("misordered-l=" + std::to_string(p), n, "ordered:risk/(l*sigma^2)", l,
                                    rm.risk.mean / (l * s2), rm.risk.se / (l * s2), 1.0, cfg.reps, seed),
                          0.5, 2.0));

    seed = rows.next_seed();
    const PenalizedRisk xm = penalized_risk_mc(misordered, mixed, sigma, default_kappa, mixed_reps, seed);
    rows.add(Gate::below(rows.make("misordered-l=" + std::to_string(p), n, "mixed:risk-vs-ordered-risk", l,
                                   xm.risk.mean, xm.risk.se, rm.risk.mean, mixed_reps, seed)));

    seed = rows.next_seed();
    const PenalizedRisk xc = penalized_risk_mc(correct, mixed, sigma, default_kappa, mixed_reps, seed);
    rows.add(Gate::report_only(rows.make("correct-order", n, "mixed:risk", 4.0, xc.risk.mean, xc.risk.se,
                                         gaussian_oracle(correct, mixed, sigma), mixed_reps, seed)));
    return rows.finish();
}

RiskReport wrb_impossibility(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const auto K = param<std::size_t>(cfg, "lines", 10000);
    const double sigma = param<double>(cfg, "sigma", 1.0);
    for (std::size_t n : cfg.n_grid) {
        // K random unit directions, one-dimensional models through 0 = s.
        Rng rng = make_rng(cfg.seed, n);
        Matrix U = gaussian_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
        U.colwise().normalize();
        const std::uint64_t seed = rows.next_seed();
        // The best-fitting line keeps max_k ⟨X, u_k⟩², which is also its loss at s = 0.
        const auto loss = replicate(cfg.reps, seed, [&](Rng& r, std::size_t) {
            const auto z = standard_normal(r, n);
            const Vector x = sigma * Eigen::Map<const Vector>(z.data(), static_cast<Eigen::Index>(n));
            return (U.transpose() * x).cwiseAbs2().maxCoeff();
        });
        const MeanSe e = summarize(loss);
        rows.add(Gate::report_only(rows.make("s=0,lines=" + std::to_string(K), n, "best-fit-line:risk/(sigma^2/2)",
                                             0.5, e.mean / (0.5 * sigma * sigma), e.se / (0.5 * sigma * sigma),
                                             static_cast<double>(n) / 0.5, cfg.reps, seed)));
    }
    return rows.finish();
}

}  // namespace modsel::exp
