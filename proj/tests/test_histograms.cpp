#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "modsel/histograms.hpp"
#include "support.hpp"

using namespace modsel;
using doctest::Approx;

namespace {

GridDensity random_grid(Rng& rng, std::size_t N = 1024) {
    std::uniform_real_distribution<double> u(0.4, 2.0);
    std::vector<double> v(N);
    double level = 1.0;
    for (std::size_t i = 0; i < N; ++i) {
        if (i % 64 == 0) level = u(rng);
        v[i] = level + 0.3 * std::sin(0.01 * static_cast<double>(i));
    }
    return GridDensity::from_unnormalized(std::move(v));
}

// A partition with breakpoints on the 2^-k mesh.
Partition random_dyadic(Rng& rng, int k, std::size_t interior) {
    std::uniform_int_distribution<std::size_t> pick(1, (std::size_t{1} << k) - 1);
    std::set<std::size_t> ids;
    while (ids.size() < interior) ids.insert(pick(rng));
    std::vector<double> y{0.0};
    for (auto i : ids) y.push_back(std::ldexp(static_cast<double>(i), -k));
    y.push_back(1.0);
    return Partition(y);
}

}  // namespace

TEST_CASE("sampling is deterministic and validated") {
    const auto s = GridDensity::uniform(256);
    CHECK(sample(s, 50, 9).points == sample(s, 50, 9).points);
    CHECK(sample(s, 50, 9).points != sample(s, 50, 10).points);
    CHECK_THROWS_AS(sample(s, 0, 1), std::invalid_argument);
}

TEST_CASE("uniform samples pass a Kolmogorov-Smirnov test at the 5% level") {
    const std::size_t n = 2000;
    int rejected = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto x = sample(GridDensity::uniform(), n, seed).points;
        std::sort(x.begin(), x.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - x[i]));
            ks = std::max(ks, std::abs(x[i] - static_cast<double>(i) / n));
        }
        if (ks >= 1.36 / std::sqrt(static_cast<double>(n))) ++rejected;
    }
    // Binomial(200, 0.05): mean 10, P(X > 22) < 1e-3.
    CHECK(rejected <= 22);
}

TEST_CASE("sample file round trip") {
    const auto x = sample(GridDensity::uniform(64), 40, 3);
    std::stringstream io;
    write_sample(io, x);
    CHECK(read_sample(io).points == x.points);
    std::stringstream bad("0.5\n1.5\n");
    CHECK_THROWS(read_sample(bad));
}

TEST_CASE("histogram basics") {
    const Partition m({0.0, 0.25, 1.0});
    const std::vector<double> pts{0.0, 0.1, 0.2, 0.24};
    const auto h = histogram(pts, m);
    CHECK(h.heights()[0] == Approx(4.0));
    CHECK(h.heights()[1] == 0.0);
    const auto h0 = histogram(pts, Partition::trivial());
    CHECK(h0.heights()[0] == 1.0);
    const auto c = count_cells(std::vector<double>{0.25, 1.0, 0.3}, m);
    CHECK(c.counts == std::vector<std::size_t>{0, 3});
}

TEST_CASE("histogram maximizes the likelihood over the simplex") {
    Rng rng(31);
    // D = 1, n = 5: one free mass a on I_0.
    for (int t = 0; t < 10; ++t) {
        const Partition m({0.0, 0.3, 1.0});
        const auto x = draw(GridDensity::uniform(64), 5, rng);
        const auto c = count_cells(x, m);
        double best = -INFINITY, best_a = 0.0;
        for (int i = 0; i <= 10000; ++i) {
            const double a = i / 10000.0;
            double ll = 0.0;
            if (c.counts[0]) ll += c.counts[0] * std::log(a / 0.3);
            if (c.counts[1]) ll += c.counts[1] * std::log((1.0 - a) / 0.7);
            if (ll > best) best = ll, best_a = a;
        }
        const auto h = histogram(x, m);
        CHECK(h.heights()[0] * 0.3 == Approx(best_a).epsilon(1e-4));
    }
    // D = 2, n = 6: two free masses.
    const Partition m3({0.0, 0.2, 0.5, 1.0});
    const auto x = draw(GridDensity::uniform(64), 6, rng);
    const auto c = count_cells(x, m3);
    double best = -INFINITY, ba = 0, bb = 0;
    for (int i = 0; i <= 300; ++i)
        for (int j = 0; i + j <= 300; ++j) {
            const double a = i / 300.0, b = j / 300.0, r = 1.0 - a - b;
            double ll = 0.0;
            const double p[3] = {a, b, r};
            for (int q = 0; q < 3; ++q)
                if (c.counts[q]) ll += c.counts[q] * std::log(p[q] / m3.length(q));
            if (ll > best) best = ll, ba = a, bb = b;
        }
    const auto h = histogram(x, m3);
    CHECK(h.heights()[0] * 0.2 == Approx(ba).epsilon(1e-2));
    CHECK(h.heights()[1] * 0.3 == Approx(bb).epsilon(1e-2));
}

TEST_CASE("L2 projection") {
    const auto u = GridDensity::uniform(128);
    const auto pu = l2_projection(u, Partition({0.0, 0.3, 0.9, 1.0}));
    for (double h : pu.heights()) CHECK(h == Approx(1.0));
    const auto lin = GridDensity::tabulate([](double x) { return 2.0 * x; }, 1024);
    const auto p = l2_projection(lin, regular_partition(1));
    CHECK(p.heights()[0] == Approx(0.5).epsilon(1e-12));
    CHECK(p.heights()[1] == Approx(1.5).epsilon(1e-12));
}

TEST_CASE("L2 projection solves the normal equations") {
    Rng rng(32);
    for (int t = 0; t < 10; ++t) {
        const auto s = random_grid(rng);
        const Partition m = random_dyadic(rng, 6, 1 + t);
        const std::size_t N = s.grid_size(), K = m.size();
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(K));
        Eigen::VectorXd y(static_cast<Eigen::Index>(N));
        for (std::size_t i = 0; i < N; ++i) {
            const double x = (i + 0.5) / N;
            B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m.locate(x))) = 1.0;
            y(static_cast<Eigen::Index>(i)) = s.values()[i];
        }
        const Eigen::VectorXd c = (B.transpose() * B).ldlt().solve(B.transpose() * y);
        const auto p = l2_projection(s, m);
        for (std::size_t j = 0; j < K; ++j) CHECK(p.heights()[j] == Approx(c(static_cast<Eigen::Index>(j))).epsilon(1e-10));
    }
}

TEST_CASE("property: Pythagoras on random densities and partitions") {
    Rng rng(33);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int t = 0; t < 50; ++t) {
        const auto s = random_grid(rng);
        const Partition m = random_dyadic(rng, 8, 1 + t % 9);
        const auto sm = l2_projection(s, m);
        std::vector<double> h(m.size());
        double mass = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) mass += (h[j] = u(rng)) * m.length(j);
        for (auto& v : h) v /= mass;
        const PiecewiseDensity tt(m, h);
        CHECK(l2_distance_squared(s, tt) ==
              Approx(l2_distance_squared(s, sm) + l2_distance_squared(sm, tt)).epsilon(1e-8));
    }
}

TEST_CASE("stochastic error closed forms") {
    const auto u = GridDensity::uniform(1024);
    for (std::size_t D : {0u, 1u, 3u, 7u, 15u})
        CHECK(stochastic_error_exact(u, regular_partition(D), 100) == Approx(static_cast<double>(D) / 100.0).epsilon(1e-12));

    // Mass spread evenly over the first D of D + 1 equal cells.
    for (std::size_t D : {3u, 7u}) {
        const double alpha = 1.0 / static_cast<double>(D + 1);
        const auto s = GridDensity::tabulate([&](double x) { return x < 1.0 - alpha ? 1.0 / (alpha * D) : 0.0; }, 1024);
        const auto m = regular_partition(D);
        const double sup = l2_projection(s, m).sup_norm();
        CHECK(sup == Approx(1.0 / (alpha * D)).epsilon(1e-12));
        CHECK(stochastic_error_exact(s, m, 50) == Approx((D - 1.0) * sup / 50.0).epsilon(1e-12));
    }
}

TEST_CASE("property: stochastic error bounds") {
    Rng rng(34);
    for (int t = 0; t < 50; ++t) {
        const auto s = random_grid(rng);
        const std::size_t n = 10 + t;
        for (std::size_t D : {1u, 4u, 15u, 63u})
            CHECK(stochastic_error_exact(s, regular_partition(D), n) <= static_cast<double>(D) / n + 1e-15);
        const Partition m = random_dyadic(rng, 7, 1 + t % 11);
        const double D = static_cast<double>(m.size() - 1);
        CHECK(stochastic_error_exact(s, m, n) <= D * l2_projection(s, m).sup_norm() / n + 1e-12);
    }
}

TEST_CASE("L2 risk Monte Carlo agrees with the exact decomposition") {
    const auto s = GridDensity::tabulate([](double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }, 1024);
    for (std::size_t D : {0u, 3u, 9u}) {
        const auto r = l2_risk_mc(s, regular_partition(D), 32, 4000, 5 + D);
        CHECK(r.reference == Approx(l2_risk_exact(s, regular_partition(D), 32)));
        CHECK(std::abs(r.mean - r.reference) <= 3.0 * r.se + 1e-12 * r.reference);
        CHECK(r.mean <= l2_distance_squared(s, l2_projection(s, regular_partition(D))) + s.sup_norm() * D / 32.0 + 3 * r.se);
    }
    const auto r0 = l2_risk_mc(s, Partition::trivial(), 32, 100, 1);
    CHECK(r0.mean == Approx(l2_distance_squared(s, PiecewiseDensity::uniform())).epsilon(1e-12));
    CHECK(r0.se < 1e-12);
}

TEST_CASE("Hellinger projection chain") {
    const auto u = GridDensity::uniform(256);
    const auto z = hellinger_projection_bound(u, regular_partition(3));
    CHECK(z.h2_sm < 1e-15);
    CHECK(z.sqrt_projection < 1e-15);
    CHECK(z.inf_h2 < 1e-15);

    Rng rng(35);
    for (int t = 0; t < 50; ++t) {
        const auto s = random_grid(rng);
        const Partition m = random_dyadic(rng, 6, 1 + t % 7);
        const auto r = hellinger_projection_bound(s, m);
        CHECK(r.h2_sm <= r.sqrt_projection + 1e-14);
        CHECK(r.sqrt_projection <= 2.0 * r.inf_h2 + 1e-14);
        CHECK(r.h2_sm == Approx(hellinger_squared(s, l2_projection(s, m))).epsilon(1e-12));
    }
}

TEST_CASE("inf of h^2 over two-cell histograms matches grid search") {
    Rng rng(36);
    for (int t = 0; t < 5; ++t) {
        const auto s = random_grid(rng);
        const Partition m({0.0, 0.375, 1.0});
        const auto f = [&](double a) {
            return hellinger_squared(s, PiecewiseDensity(m, {a / 0.375, (1.0 - a) / 0.625}));
        };
        double lo = 0.0, hi = 1.0, best = INFINITY;
        for (int round = 0; round < 6; ++round) {
            double arg = lo;
            for (int i = 0; i <= 200; ++i) {
                const double a = lo + (hi - lo) * i / 200.0;
                const double v = f(a);
                if (v < best) best = v, arg = a;
            }
            const double w = (hi - lo) / 100.0;
            lo = std::max(0.0, arg - w), hi = std::min(1.0, arg + w);
        }
        CHECK(hellinger_projection_bound(s, m).inf_h2 == Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("Hellinger risk of a correct model") {
    const auto u = GridDensity::uniform(256);
    for (std::size_t D : {1u, 7u}) {
        const auto r = hellinger_risk_mc(u, regular_partition(D), 64, 2000, 40 + D);
        CHECK(r.reference == Approx(D / 128.0));
        CHECK(r.mean <= static_cast<double>(D) / 128.0 + 3.0 * r.se);
    }
}

TEST_CASE("Holder tuning") {
    const HolderClass H(1.0, 1.0);
    CHECK(H.tuned_dimension(1000.0) == 9);  // D + 1 = ceil(1000^{1/3}) = 10
    CHECK(H.tuned_dimension(1001.0) == 10);
    CHECK(HolderClass(2.0, 0.5).tuned_dimension(100.0) == 19);  // ceil(sqrt(400)) - 1
    CHECK(HolderClass(0.01, 1.0).tuned_dimension(10.0) == 0);
    CHECK(H.rate(1000.0) == Approx(std::pow(1e-3, 2.0 / 3.0)));
    CHECK(HolderClass(1e-3, 1.0).rate(10.0) == Approx(0.1));
    CHECK_THROWS(HolderClass(1.0, 1.5));
}

TEST_CASE("trigonometric basis and coefficients") {
    CHECK(trig_basis(0, 0.3) == 1.0);
    CHECK(trig_basis(1, 0.0) == Approx(std::sqrt(2.0)));
    CHECK(trig_basis(2, 0.25) == Approx(std::sqrt(2.0)));
    Rng rng(37);
    const auto s = test::random_step(rng, 16);
    for (int j = 0; j <= 9; ++j) {
        const double quad = test::midpoint_sum([&](double x) { return s(x) * trig_basis(j, x); }, 1 << 16);
        CHECK(trig_coefficient(s.step(), j) == Approx(quad).epsilon(1e-7));
    }
    const std::vector<double> pts{0.1, 0.7};
    const auto e = trig_projection_estimator(pts, std::vector<int>{});
    CHECK(e.indices().size() == 1);
    CHECK(e(0.42) == 1.0);
}

TEST_CASE("trigonometric estimator is unbiased with bounded variance") {
    const auto s = GridDensity::tabulate([](double x) { return 1.0 + 0.8 * std::cos(2 * std::numbers::pi * x); }, 4096);
    const std::vector<int> idx{1, 2, 3, 4};
    const std::size_t n = 64;
    const auto coefs = replicate(4000, 91, [&](Rng& rng, std::size_t) {
        const auto e = trig_projection_estimator(draw(s, n, rng), idx);
        return std::vector<double>(e.coefficients().begin(), e.coefficients().end());
    });
    for (std::size_t k = 1; k <= idx.size(); ++k) {
        std::vector<double> col;
        for (const auto& c : coefs) col.push_back(c[k]);
        const MeanSe ms = summarize(col);
        CHECK(std::abs(ms.mean - trig_coefficient(s, idx[k - 1])) <= 3.0 * ms.se);
        const double var = ms.se * ms.se * static_cast<double>(col.size());
        CHECK(var <= 2.0 / n);
    }
    CHECK(trig_risk_exact(s, idx, n) <= trig_risk_bound(s, idx, n));
}

TEST_CASE("histogram oracle") {
    const auto u = GridDensity::uniform(256);
    std::vector<Partition> fam;
    for (std::size_t D = 0; D < 10; ++D) fam.push_back(regular_partition(D));
    CHECK(histogram_oracle(u, fam, 100).index == 0);

    Rng rng(38);
    const auto s = random_grid(rng);
    std::vector<Partition> mixed;
    for (int t = 0; t < 50; ++t) mixed.push_back(random_dyadic(rng, 8, t % 12 + 1));
    for (auto loss : {OracleLoss::l2, OracleLoss::hellinger}) {
        const auto o = histogram_oracle(s, mixed, 200, loss);
        std::size_t best = 0;
        double best_v = INFINITY;
        for (std::size_t i = 0; i < mixed.size(); ++i) {
            const double D = static_cast<double>(mixed[i].size() - 1);
            const double v = loss == OracleLoss::l2
                                 ? l2_distance_squared(s, l2_projection(s, mixed[i])) + D / 200.0
                                 : 2.0 * hellinger_projection_bound(s, mixed[i]).inf_h2 + D / 400.0;
            if (v < best_v - 1e-15 || (std::abs(v - best_v) <= 1e-15 && mixed[i].size() < mixed[best].size()))
                best = i, best_v = v;
        }
        CHECK(o.index == best);
        CHECK(o.value == Approx(best_v).epsilon(1e-12));
    }
}
