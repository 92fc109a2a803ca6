#include <cmath>
#include <limits>
#include <random>

#include "common.hpp"
#include "modsel/gaussian.hpp"
#include "modsel/histograms.hpp"
#include "modsel/selection.hpp"

namespace modsel::exp {

namespace {

double normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

MeanSe rate(const std::vector<double>& hits) { return summarize(hits); }

struct Pair {
    std::string name;
    PiecewiseDensity v;
    PiecewiseDensity u;
};

std::vector<Pair> density_pairs() {
    std::vector<Pair> p;
    p.push_back({"tilt", PiecewiseDensity(Partition({0.0, 0.5, 1.0}), {1.0, 1.0}),
                 PiecewiseDensity(Partition({0.0, 0.5, 1.0}), {1.5, 0.5})});
    p.push_back({"alternating", PiecewiseDensity(Partition({0.0, 0.25, 0.5, 0.75, 1.0}), {0.4, 1.6, 0.4, 1.6}),
                 PiecewiseDensity(Partition({0.0, 0.25, 0.5, 0.75, 1.0}), {1.6, 0.4, 1.6, 0.4})});
    p.push_back({"half-support", PiecewiseDensity(Partition({0.0, 0.5, 1.0}), {2.0, 0.0}),
                 PiecewiseDensity(Partition({0.0, 0.5, 1.0}), {1.0, 1.0})});
    p.push_back({"shifted-bump", PiecewiseDensity(Partition({0.0, 0.2, 0.4, 1.0}), {1.0, 2.5, 0.5}),
                 PiecewiseDensity(Partition({0.0, 0.2, 0.4, 1.0}), {2.0, 1.0, 2.0 / 3.0})});
    return p;
}

}  // namespace

RiskReport gtest(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const double sigma = param<double>(cfg, "sigma", 1.0);
    const std::size_t dim = cfg.n_grid.front();  // ambient dimension
    const auto N = static_cast<Eigen::Index>(dim);
    for (double ratio : {3.0, 6.0, 12.0}) {
        const double d = ratio * sigma;
        const Vector v = Vector::Zero(N);
        Vector u = Vector::Zero(N);
        u[0] = d;
        for (double frac : {0.0, 1.0 / 12.0, 1.0 / 6.0}) {
            // s sits between v and u, at distance frac·d from v.
            Vector s = Vector::Zero(N);
            s[0] = frac * d;
            const std::uint64_t seed = rows.next_seed();
            const auto hits = replicate(cfg.reps, seed, [&](Rng& rng, std::size_t) {
                const GaussianObservation obs = gaussian_sample(s, sigma, rng);
                return gaussian_two_point_test(obs, v, u) == TwoPointChoice::u ? 1.0 : 0.0;
            });
            const MeanSe e = rate(hits);
            const std::string scenario = "|v-u|/sigma=" + fmt(ratio) + ",|s-v|/|v-u|=" + fmt(frac);
            ReportRow r = rows.make(scenario, dim, "error-vs-exp(-d^2/24s^2)", ratio, e.mean, e.se,
                                    std::exp(-d * d / (24.0 * sigma * sigma)), cfg.reps, seed);
            rows.add(rows.gate().at_most(r));
            if (frac == 0.0) {
                r.model = "error-vs-exp(-d^2/8s^2)";
                r.reference = std::exp(-d * d / (8.0 * sigma * sigma));
                rows.add(rows.gate().at_most(r));
            }
            r.model = "error-vs-normal-tail";
            r.reference = normal_tail((0.5 - frac) * d / sigma);
            rows.add(Gate::report_only(r));
        }
    }
    return rows.finish();
}

RiskReport density_two_point(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    for (const auto& p : density_pairs()) {
        const double rho = affinity_value(p.u.step(), p.v.step());
        for (std::size_t n : cfg.n_grid) {
            const std::uint64_t seed = rows.next_seed();
            // s = v; ties in the likelihood count as errors.
            const auto hits = replicate(cfg.reps, seed, [&](Rng& rng, std::size_t) {
                const auto x = draw(p.v, n, rng);
                double lu = 0.0;
                double lv = 0.0;
                for (double xi : x) {
                    const double a = p.u(xi);
                    if (a <= 0.0) return 0.0;
                    lu += std::log(a);
                    lv += std::log(p.v(xi));
                }
                return lu >= lv ? 1.0 : 0.0;
            });
            const MeanSe e = rate(hits);
            rows.add(rows.gate().at_most(rows.make(p.name, n, "likelihood-error-vs-rho^n", rho, e.mean, e.se,
                                                   std::pow(rho, static_cast<double>(n)), cfg.reps, seed)));
        }
    }
    return rows.finish();
}

RiskReport robust_test(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const auto pairs = density_pairs();
    for (const auto& p : pairs) {
        const double h2 = hellinger_squared(p.u, p.v);
        for (std::size_t n : cfg.n_grid) {
            const std::uint64_t seed = rows.next_seed();
            struct Out {
                double error;
                double disagree;
            };
            const auto outs = replicate(cfg.reps, seed, [&](Rng& rng, std::size_t) {
                const auto x = draw(p.v, n, rng);
                const TestOutcome a = robust_pair_test(x, p.u, p.v, 1.0, 1.0, "u", "v");
                const TestOutcome b = robust_pair_test(x, p.v, p.u, 1.0, 1.0, "v", "u");
                const bool u_first = a.winner == PairWinner::u;
                const bool u_second = b.winner == PairWinner::v;
                return Out{u_first ? 1.0 : 0.0, u_first != u_second ? 1.0 : 0.0};
            });
            std::vector<double> err(outs.size());
            double disagreements = 0.0;
            for (std::size_t i = 0; i < outs.size(); ++i) {
                err[i] = outs[i].error;
                disagreements += outs[i].disagree;
            }
            const MeanSe e = summarize(err);
            // ψ ∈ [-1,1], E_v ψ ≤ -h²/2 and E_v ψ² ≤ 2h²; Bernstein gives exp(-3nh²/56).
            rows.add(rows.gate().at_most(rows.make(p.name, n, "error-vs-exp(-3nh^2/56)", h2, e.mean, e.se,
                                                   std::exp(-3.0 * static_cast<double>(n) * h2 / 56.0), cfg.reps,
                                                   seed)));
            rows.add(Gate::exact(rows.make(p.name + ":role-swap", n, "disagreements", h2, disagreements, 0.0, 0.0,
                                           cfg.reps, seed),
                                 0.0));
        }
    }

    // Tournament among the distinct pair densities with s one of them.
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        cands.push_back({pairs[i].v, 2.0, "v" + std::to_string(i)});
        cands.push_back({pairs[i].u, 2.0, "u" + std::to_string(i)});
    }
    // tilt.v and half-support.u are both uniform; keep one.
    cands.erase(cands.begin() + 5);
    const CandidateSet set(cands);
    const std::size_t truth = 2;  // alternating.v
    for (std::size_t n : cfg.n_grid) {
        const std::uint64_t seed = rows.next_seed();
        const auto hits = replicate(cfg.reps, seed, [&](Rng& rng, std::size_t) {
            const auto x = draw(set[truth].density, n, rng);
            const TournamentResult t = tournament_select(x, set);
            return hellinger_squared(set[t.index].density, set[truth].density);
        });
        const MeanSe e = summarize(hits);
        rows.add(Gate::report_only(rows.make("tournament:" + set[truth].label, n, "hellinger-risk",
                                             static_cast<double>(set.size()), e.mean, e.se, 0.0, cfg.reps, seed)));
    }
    return rows.finish();
}

RiskReport lattice_deviation(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const double sigma = param<double>(cfg, "sigma", 1.0);
    const double lambda = minimum_lambda(sigma);
    for (std::size_t D : cfg.n_grid) {
        const auto Dn = static_cast<Eigen::Index>(D);
        const Eigen::Index N = Dn + 2;
        const LatticeNet net(LinearModel(Matrix::Identity(N, Dn), 1.0, "V"), lambda);
        const double y0_base = lambda * std::sqrt(2.0 * static_cast<double>(D));
        for (double off_frac : {0.0, 1.0}) {
            // ‖s - s'‖ = off_frac·λ√(2D)/6, half inside the model, half orthogonal.
            const double off = off_frac * y0_base / 6.0;
            Vector s = Vector::Zero(N);
            s[0] = off / std::sqrt(2.0);
            s[Dn] = off / std::sqrt(2.0);
            const double y0 = std::max(y0_base, 6.0 * off);
            const std::vector<double> ys{y0, 1.5 * y0, 2.0 * y0};

            const std::uint64_t seed = rows.next_seed();
            struct Out {
                double reach;  // max ‖t - s'‖ over t with g_t(X) ≥ g_{s'}(X)
                double loss;   // ‖ŝ - s‖² for the lattice MLE
            };
            const auto outs = replicate(cfg.reps, seed, [&](Rng& rng, std::size_t) {
                const GaussianObservation obs = gaussian_sample(s, sigma, rng);
                const double r = std::sqrt(obs.x.squaredNorm());  // ‖X - s'‖, s' = 0
                double reach = 0.0;
                // Any such t has ‖t - s'‖ ≤ 2‖PX - s'‖.
                if (2.0 * net.model().coordinates(obs.x).norm() >= ys.front()) {
                    for_each_lattice_point_in_ball(net, obs.x, r, [&](const LatticeIndex& k) {
                        reach = std::max(reach, net.spacing() * k.cast<double>().norm());
                    });
                }
                const LatticeIndex k = lattice_mle(obs, net, LatticeIndex::Zero(Dn));
                return Out{reach, (net.point(k) - s).squaredNorm()};
            });
            const std::string scenario = "6|s-s'|/(lambda*sqrt(2D))=" + fmt(off_frac);
            for (double y : ys) {
                std::vector<double> hit(outs.size());
                for (std::size_t i = 0; i < outs.size(); ++i) hit[i] = outs[i].reach >= y ? 1.0 : 0.0;
                const MeanSe e = summarize(hit);
                rows.add(rows.gate().at_most(rows.make(scenario + ",y/y0=" + fmt(y / y0), D, "deviation-tail",
                                                       static_cast<double>(D), e.mean, e.se,
                                                       1.14 * std::exp(-y * y / (48.0 * sigma * sigma)), cfg.reps,
                                                       seed)));
            }
            std::vector<double> loss(outs.size());
            for (std::size_t i = 0; i < outs.size(); ++i) loss[i] = outs[i].loss;
            const MeanSe e = summarize(loss);
            const double bound = 148.0 * net.model().bias_squared(s) + 7311.0 * sigma * sigma * static_cast<double>(D);
            rows.add(rows.gate().at_most(
                rows.make(scenario, D, "lattice-mle-risk", static_cast<double>(D), e.mean, e.se, bound, cfg.reps, seed)));
        }
    }
    return rows.finish();
}

RiskReport net_check(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const double lambda = minimum_lambda(param<double>(cfg, "sigma", 1.0));
    const auto samples = param<std::size_t>(cfg, "cover_samples", 1000);
    for (std::size_t D : cfg.n_grid) {
        Rng rng = make_rng(cfg.seed, D);
        std::normal_distribution<double> nd(0.0, 1.0);
        Matrix B(static_cast<Eigen::Index>(D + 2), static_cast<Eigen::Index>(D));
        for (Eigen::Index j = 0; j < B.cols(); ++j)
            for (Eigen::Index i = 0; i < B.rows(); ++i) B(i, j) = nd(rng);
        const LinearModel model(B, 1.0, "random-D=" + std::to_string(D));
        const double eta = lambda * std::sqrt(static_cast<double>(D));
        const std::uint64_t seed = rows.next_seed();
        const NetCheck c = verify_net_property(model, eta, seed, samples, 4);
        const double Dd = static_cast<double>(D);
        rows.add(Gate{0.0}.at_most(rows.make("covering", D, model.label(), Dd, c.max_cover_distance, 0.0, eta, samples, seed)));
        for (std::size_t i = 0; i < c.x_values.size(); ++i)
            rows.add(Gate::below(rows.make("ball-count,x=" + fmt(c.x_values[i]), D, model.label(), Dd,
                                           static_cast<double>(c.max_counts[i]), 0.0, c.count_bounds[i], 4, seed)));
        rows.add(Gate::not_below(rows.make("floor-count-3eta", D, model.label(), Dd,
                                           static_cast<double>(c.min_floor_count), 0.0, std::ldexp(1.0, static_cast<int>(D)),
                                           4, seed)));
    }

    // D = 1: ball counts against floor((c + r)/2λ) - ceil((c - r)/2λ) + 1.
    const LatticeNet line(LinearModel(Matrix::Identity(1, 1), 1.0, "R"), lambda);
    Rng rng = make_rng(cfg.seed, 1000);
    std::uniform_real_distribution<double> cu(-50.0, 50.0);
    std::uniform_real_distribution<double> ru(0.0, 100.0);
    double worst = 0.0;
    const std::size_t trials = 200;
    for (std::size_t i = 0; i < trials; ++i) {
        const double c = cu(rng);
        const double r = ru(rng);
        Vector x(1);
        x[0] = c;
        const double sp = line.spacing();
        const double closed = std::floor((c + r) / sp) - std::ceil((c - r) / sp) + 1.0;
        worst = std::max(worst, std::abs(static_cast<double>(count_lattice_in_ball(line, x, r)) - closed));
    }
    rows.add(Gate::exact(rows.value("closed-form-count-D1", 1, "max-abs-diff", 1.0, worst, 0.0), 0.0));
    return rows.finish();
}

}  // namespace modsel::exp
