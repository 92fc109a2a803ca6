#include <doctest.h>

#include <cmath>
#include <numbers>

#include "modsel/metrics.hpp"
#include "support.hpp"

using namespace modsel;
using doctest::Approx;

namespace {

PiecewiseDensity half_block(bool right) {
    return PiecewiseDensity(regular_partition(1), right ? std::vector<double>{0.0, 2.0} : std::vector<double>{2.0, 0.0});
}

}  // namespace

TEST_CASE("identical densities are at distance zero") {
    const auto u = PiecewiseDensity::uniform();
    CHECK(l2_distance(u, u) == 0.0);
    CHECK(hellinger_distance(u, u) == 0.0);
    CHECK(hellinger_affinity(u, u).value() == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("block against uniform has unit L2 distance") {
    CHECK(l2_distance_squared(half_block(false), PiecewiseDensity::uniform()) == Approx(1.0).epsilon(1e-15));
    CHECK(l2_distance(half_block(false), PiecewiseDensity::uniform()) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("disjoint supports") {
    CHECK(hellinger_distance(half_block(false), half_block(true)) == Approx(1.0).epsilon(1e-15));
    CHECK(hellinger_affinity(half_block(false), half_block(true)).value() == 0.0);
    CHECK(overlap(half_block(false), half_block(true)) == 0.0);
}

TEST_CASE("distances match midpoint sums on a mesh that resolves both densities") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        const auto f = test::random_step(rng, 16, true);
        const auto g = test::random_step(rng, 64, true);
        const double l2 = test::midpoint_sum([&](double x) { return (f(x) - g(x)) * (f(x) - g(x)); }, 1024);
        const double rho = test::midpoint_sum([&](double x) { return std::sqrt(f(x) * g(x)); }, 1024);
        const double h2 = test::midpoint_sum(
            [&](double x) { return 0.5 * std::pow(std::sqrt(f(x)) - std::sqrt(g(x)), 2); }, 1024);
        CHECK(l2_distance_squared(f, g) == Approx(l2).epsilon(1e-12));
        CHECK(affinity_value(f.step(), g.step()) == Approx(rho).epsilon(1e-12));
        CHECK(hellinger_squared(f, g) == Approx(h2).epsilon(1e-12));
    }
}

TEST_CASE("grid and piecewise representations of the same step function agree") {
    Rng rng(12);
    const auto f = test::random_step(rng, 8);
    std::vector<double> vals(256);
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = f((static_cast<double>(i) + 0.5) / 256.0);
    const GridDensity g(vals);
    CHECK(l2_distance_squared(f, g) < 1e-24);
    CHECK(hellinger_squared(f, g) < 1e-24);
}

TEST_CASE("grid density normalization") {
    CHECK_THROWS_AS(GridDensity(std::vector<double>{1.0, 1.2}), std::invalid_argument);
    CHECK_THROWS_AS(GridDensity(std::vector<double>{2.0, -0.0001}), std::invalid_argument);
    const GridDensity g(std::vector<double>{1.0 + 4e-7, 1.0});
    CHECK(g.integral(0.0, 1.0) == Approx(1.0).epsilon(1e-15));
    const auto h = GridDensity::from_unnormalized({3.0, 1.0});
    CHECK(h(0.25) == Approx(1.5));
    CHECK(h(0.75) == Approx(0.5));
    CHECK(h.integral(0.0, 0.5) == Approx(0.75));
}

TEST_CASE("affinity construction clamps within tolerance") {
    CHECK(Affinity(1.0 + 1e-10).value() == 1.0);
    CHECK(Affinity(-1e-10).value() == 0.0);
    CHECK_THROWS_AS(Affinity(1.01), std::domain_error);
    CHECK_THROWS_AS(Affinity(-0.1), std::domain_error);
}

TEST_CASE("property: identities on random pairs") {
    Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        const auto f = test::random_irregular(rng, 1 + t % 12);
        const auto g = test::random_irregular(rng, 1 + (t * 7) % 15);
        const double rho = affinity_value(f.step(), g.step());
        const double h2 = hellinger_squared(f, g);
        const double ov = overlap(f, g);
        CHECK(rho >= 0.0);
        CHECK(rho <= 1.0 + 1e-12);
        CHECK(std::abs(h2 - (1.0 - rho)) <= 1e-12);
        CHECK(rho >= ov - 1e-12);
        CHECK(ov >= 1.0 - std::sqrt(std::max(0.0, 1.0 - rho * rho)) - 1e-12);
    }
}

TEST_CASE("property: Hellinger and L2 triangle inequalities") {
    Rng rng(14);
    for (int t = 0; t < 200; ++t) {
        const auto a = test::random_irregular(rng, 5);
        const auto b = test::random_step(rng, 7, true);
        const auto c = test::random_irregular(rng, 3);
        CHECK(hellinger_distance(a, c) <= hellinger_distance(a, b) + hellinger_distance(b, c) + 1e-12);
        CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-12);
    }
}

TEST_CASE("affinity tensor power") {
    CHECK(affinity_tensor_power(Affinity(1.0), 17).value() == 1.0);
    CHECK(affinity_tensor_power(Affinity(0.5), 2).value() == Approx(0.25).epsilon(1e-15));
    CHECK_THROWS(affinity_tensor_power(Affinity(0.5), 0));
}

TEST_CASE("tensorization against the product-density double sum") {
    Rng rng(15);
    for (int t = 0; t < 20; ++t) {
        const auto f = test::random_step(rng, 8);
        const auto g = test::random_step(rng, 4);
        // ∫∫ sqrt(f(x)f(y) g(x)g(y)) over the 2-fold product, cell by cell.
        const std::size_t N = 8;
        double rho2 = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                const double x = (i + 0.5) / N, y = (j + 0.5) / N;
                rho2 += std::sqrt(f(x) * f(y) * g(x) * g(y)) / (N * N);
            }
        const Affinity rho = hellinger_affinity(f, g);
        CHECK(affinity_tensor_power(rho, 2).value() == Approx(rho2).epsilon(1e-12));
    }
}

TEST_CASE("Gaussian affinity closed form") {
    const std::vector<double> u{0.0, 0.0}, v{2.0, 0.0}, w{0.0, 0.0};
    CHECK(gaussian_affinity(u, w, 1.3).value() == 1.0);
    // ‖u - v‖² = 4 = 8σ² with σ² = 1/2.
    CHECK(gaussian_affinity(u, v, std::sqrt(0.5)).value() == Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK_THROWS(gaussian_affinity(u, std::vector<double>{1.0}, 1.0));
    CHECK_THROWS(gaussian_affinity(u, v, 0.0));
}

TEST_CASE("Gaussian affinity against quadrature of sqrt(g_u g_v)") {
    const auto quad = [](double a, double b, double sigma) {
        const double h = sigma / 64.0;
        double acc = 0.0;
        for (double x = std::min(a, b) - 14 * sigma; x <= std::max(a, b) + 14 * sigma; x += h) {
            const double ga = std::exp(-(x - a) * (x - a) / (2 * sigma * sigma));
            const double gb = std::exp(-(x - b) * (x - b) / (2 * sigma * sigma));
            acc += std::sqrt(ga * gb);
        }
        return acc * h / (sigma * std::sqrt(2 * std::numbers::pi));
    };
    const double one[] = {0.0}, other[] = {1.0};
    CHECK(gaussian_affinity(one, other, 1.0).value() == Approx(std::exp(-1.0 / 8.0)).epsilon(1e-15));
    CHECK(std::abs(gaussian_affinity(one, other, 1.0).value() - quad(0.0, 1.0, 1.0)) < 1e-8);
    for (double sigma : {0.3, 1.0, 2.5})
        for (double d : {0.1, 1.0, 4.0}) {
            const double b[] = {d};
            CHECK(std::abs(gaussian_affinity(one, b, sigma).value() - quad(0.0, d, sigma)) < 1e-8);
        }
}
