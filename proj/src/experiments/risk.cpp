#include <cmath>
#include <random>

#include "common.hpp"
#include "modsel/gaussian.hpp"
#include "modsel/histograms.hpp"

namespace modsel::exp {

namespace {

nlohmann::json density_specs(const ExperimentConfig& cfg, nlohmann::json fallback) {
    return cfg.params.contains("densities") ? cfg.params["densities"] : fallback;
}

std::string density_name(const nlohmann::json& spec) {
    std::string name = spec["kind"].get<std::string>();
    for (const auto& [k, v] : spec.items())
        if (k != "kind") name += "," + k + "=" + v.dump();
    return name;
}

std::string partition_name(const Partition& m) { return "|m|=" + std::to_string(m.size()) + ":" + m.to_line(); }

}  // namespace

RiskReport his_exact(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const auto specs = density_specs(cfg, nlohmann::json::array({{{"kind", "beta"}, {"a", 2.0}, {"b", 5.0}},
                                                                 {{"kind", "bimodal"}, {"width", 0.08}}}));
    const std::vector<Partition> parts{regular_partition(3), Partition({0.0, 0.1, 0.25, 0.6, 1.0})};
    const auto hell_reps = param<std::size_t>(cfg, "hellinger_reps", 2000);
    const auto sweep_reps = param<std::size_t>(cfg, "sweep_reps", 1000);
    const auto sweep_n = param<std::size_t>(cfg, "sweep_n", 64);

    for (const auto& spec : specs) {
        const GridDensity s = make_density(spec);
        const std::string name = density_name(spec);
        for (std::size_t n : cfg.n_grid) {
            for (const auto& m : parts) {
                const double D = static_cast<double>(m.size() - 1);
                const std::uint64_t seed = rows.next_seed();
                const RiskEstimate est = l2_risk_mc(s, m, n, cfg.reps, seed);
                ReportRow r = rows.make(name, n, partition_name(m), D, est.mean, est.se, est.reference, est.reps, seed);
                rows.add(rows.gate().close(r));

                // Upper bound with the sup norm of s in place of that of s_m.
                const double bias = est.reference - stochastic_error_exact(s, m, n);
                r.reference = bias + s.sup_norm() * D / static_cast<double>(n);
                r.scenario = name + ":sup-norm-bound";
                rows.add(rows.gate().at_most(r));

                // Hellinger risk against h²(s, s_m) + D/(2n).
                const std::uint64_t hseed = rows.next_seed();
                const RiskEstimate h = hellinger_risk_mc(s, m, n, hell_reps, hseed);
                const HellingerProjection hp = hellinger_projection_bound(s, m);
                rows.add(rows.gate().at_most(rows.make(name + ":hellinger", n, partition_name(m), D, h.mean, h.se,
                                                       hp.h2_sm + D / (2.0 * static_cast<double>(n)), h.reps, hseed)));
            }
            // D = 0: ŝ = 1 whatever the sample.
            const double trivial = l2_risk_exact(s, Partition::trivial(), n);
            rows.add(Gate::exact(rows.value(name + ":trivial-partition", n, "|m|=1", 0.0, trivial,
                                            l2_distance_squared(s, PiecewiseDensity::uniform())),
                                 1e-12));
        }
        // Bias/variance trade-off over regular partitions (plot data).
        for (std::size_t D : {0u, 1u, 2u, 3u, 5u, 7u, 11u, 15u, 23u, 31u, 47u, 63u}) {
            const std::uint64_t seed = rows.next_seed();
            const Partition m = regular_partition(D);
            const RiskEstimate est = l2_risk_mc(s, m, sweep_n, sweep_reps, seed);
            rows.add(Gate::report_only(rows.make(name + ":sweep", sweep_n, "regular", static_cast<double>(D), est.mean,
                                                 est.se, est.reference, est.reps, seed)));
        }
    }
    return rows.finish();
}

RiskReport gauss_risk(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const double sigma = param<double>(cfg, "sigma", 1.0);
    for (std::size_t n : cfg.n_grid) {
        Rng rng = make_rng(cfg.seed, n);
        std::normal_distribution<double> nd(0.0, 1.0);
        auto gauss_matrix = [&](std::size_t rows_, std::size_t cols) {
            Matrix M(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols));
            for (Eigen::Index j = 0; j < M.cols(); ++j)
                for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = nd(rng);
            return M;
        };
        const auto N = static_cast<Eigen::Index>(n);
        const Vector s = 2.0 * gauss_matrix(n, 1).col(0);

        std::vector<LinearModel> models;
        models.emplace_back(Matrix::Identity(N, 1), 1.0, "e1");
        models.emplace_back(gauss_matrix(n, std::max<std::size_t>(1, n / 4)), 1.0, "random-D=n/4");
        models.emplace_back(Matrix::Identity(N, N), 1.0, "full");
        Matrix with_s = gauss_matrix(n, 4);
        with_s.col(0) = s;
        models.emplace_back(with_s, 1.0, "contains-s");

        for (const auto& m : models) {
            const std::uint64_t seed = rows.next_seed();
            const RiskEstimate est = projection_risk_mc(s, m, sigma, cfg.reps, seed);
            rows.add(rows.gate().close(rows.make("sigma=" + fmt(sigma), n, m.label(), static_cast<double>(m.dim()),
                                                 est.mean, est.se, est.reference, est.reps, seed)));
        }
    }
    return rows.finish();
}

RiskReport trig_risk(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const auto specs = density_specs(cfg, nlohmann::json::array({{{"kind", "beta"}, {"a", 2.0}, {"b", 5.0}},
                                                                 {{"kind", "bimodal"}, {"width", 0.08}}}));
    for (const auto& spec : specs) {
        const GridDensity s = make_density(spec);
        const std::string name = density_name(spec);
        const double s_norm2 = l2_norm_squared(s.step());
        for (std::size_t n : cfg.n_grid) {
            for (int J : {2, 4, 8}) {
                std::vector<int> idx;
                for (int j = 1; j <= 2 * J; ++j) idx.push_back(j);
                std::vector<double> s_coef{1.0};
                for (int j : idx) s_coef.push_back(trig_coefficient(s, j));

                struct Draw {
                    double loss;
                    double c1;
                };
                const std::uint64_t seed = rows.next_seed();
                const auto draws = replicate(cfg.reps, seed, [&](Rng& rng, std::size_t) {
                    const auto x = draw(s, n, rng);
                    const TrigSeries est = trig_projection_estimator(x, idx);
                    return Draw{est.l2_distance_squared(s_norm2, s_coef), est.coefficients()[1]};
                });
                std::vector<double> loss(draws.size()), c1(draws.size());
                for (std::size_t i = 0; i < draws.size(); ++i) {
                    loss[i] = draws[i].loss;
                    c1[i] = draws[i].c1;
                }
                const MeanSe l = summarize(loss);
                const MeanSe c = summarize(c1);
                const std::string model = "trig|m|=" + std::to_string(idx.size());
                const double dim = static_cast<double>(idx.size());
                rows.add(rows.gate().close(
                    rows.make(name, n, model, dim, l.mean, l.se, trig_risk_exact(s, idx, n), cfg.reps, seed)));
                rows.add(rows.gate().at_most(rows.make(name + ":bound", n, model, dim, l.mean, l.se,
                                                       trig_risk_bound(s, idx, n), cfg.reps, seed)));
                rows.add(rows.gate().close(
                    rows.make(name + ":coef1-unbiased", n, model, dim, c.mean, c.se, s_coef[1], cfg.reps, seed)));
                const double var = c.se * c.se * static_cast<double>(c.count);
                rows.add(Gate{0.0}.at_most(
                    rows.make(name + ":coef1-variance", n, model, dim, var, 0.0, 2.0 / static_cast<double>(n), cfg.reps, seed)));
            }
        }
    }
    return rows.finish();
}

}  // namespace modsel::exp
