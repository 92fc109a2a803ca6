#include <doctest.h>

#include <cmath>

#include "modsel/histograms.hpp"
#include "modsel/lowerbounds.hpp"
#include "support.hpp"

using namespace modsel;
using doctest::Approx;

namespace {

// Hand formulas for the bump on one cell of width w = 1/D:
// value -a on a share 1 - theta, +L on a share theta.
double bump_l2(double a, double theta, double L, double D) {
    return (a * a * (1.0 - theta) + L * L * theta) / D;
}

double bump_h2(double a, double theta, double L, double D) {
    const double left = 1.0 - std::sqrt(1.0 - a);
    const double right = std::sqrt(1.0 + L) - 1.0;
    return 0.5 * ((1.0 - theta) * left * left + theta * right * right) / D;
}

}  // namespace

TEST_CASE("hypercube family closed forms") {
    struct Case {
        std::size_t D;
        double L;
        std::size_t n;
    };
    for (const Case c : {Case{1, 1.0, 1}, Case{2, 4.0, 8}, Case{8, 16.0, 64}, Case{12, 0.5, 4}}) {
        const AssouadFamily F(c.D, c.L, c.n);
        const double D = static_cast<double>(c.D), n = static_cast<double>(c.n);
        CHECK(F.a() == Approx(D / (4.0 * n)));
        CHECK(F.theta() == Approx(D / (D + 4.0 * n * c.L)));
        CHECK(F.bump_norm_squared() == Approx(c.L / (4.0 * n)).epsilon(1e-12));
        CHECK(bump_l2(F.a(), F.theta(), c.L, D) == Approx(c.L / (4.0 * n)).epsilon(1e-12));
        CHECK(F.bump_hellinger_squared() == Approx(bump_h2(F.a(), F.theta(), c.L, D)).epsilon(1e-10));
        CHECK(F.bump_hellinger_squared() <= 1.0 / (6.0 * n) + 1e-15);

        HammingIndex zero(c.D, false), first(c.D, false);
        first[0] = true;
        const auto f0 = F.member(zero), f1 = F.member(first);
        CHECK(cell_integrals(f0.step(), Partition::trivial())[0] == Approx(1.0));
        CHECK(cell_integrals(f1.step(), Partition::trivial())[0] == Approx(1.0).epsilon(1e-14));
        CHECK(l2_distance_squared(f0, f1) == Approx(c.L / (4.0 * n)).epsilon(1e-12));
        CHECK(hellinger_squared(f0, f1) == Approx(bump_h2(F.a(), F.theta(), c.L, D)).epsilon(1e-10));

        // g = f1 - f0 integrates to zero on its cell, with sup L and inf -a.
        const double w = 1.0 / D;
        const Partition first_cell(c.D == 1 ? std::vector<double>{0.0, 1.0} : std::vector<double>{0.0, w, 1.0});
        const double left = cell_integrals(f1.step(), first_cell)[0] - cell_integrals(f0.step(), first_cell)[0];
        CHECK(std::abs(left) < 1e-14);
        CHECK(f1.sup_norm() == Approx(1.0 + c.L));
        CHECK(f1(0.5 * (1.0 - F.theta()) * w) - 1.0 == Approx(-F.a()));
    }
}

TEST_CASE("isometry over all vertex pairs") {
    const AssouadFamily F(5, 2.0, 10);
    const auto V = F.vertices();
    REQUIRE(V.size() == 32);
    std::vector<PiecewiseDensity> members;
    for (const auto& v : V) members.push_back(F.member(v));
    for (std::size_t i = 0; i < V.size(); ++i)
        for (std::size_t j = 0; j < V.size(); ++j)
            CHECK(l2_distance_squared(members[i], members[j]) ==
                  Approx(2.0 / 40.0 * static_cast<double>(hamming_distance(V[i], V[j]))).epsilon(1e-12));
    CHECK(F.isometry_distance_squared(V[0], V[31]) == Approx(5 * 2.0 / 40.0));
}

TEST_CASE("hypercube family validation") {
    CHECK_THROWS(AssouadFamily(0, 1.0, 1));
    CHECK_THROWS(AssouadFamily(7, 1.0, 2));
    CHECK_NOTHROW(AssouadFamily(6, 1.0, 2));
    CHECK_THROWS(AssouadFamily(2, 0.0, 2));
    CHECK_THROWS(AssouadFamily(17, 1.0, 20).vertices());
    CHECK_THROWS(hamming_distance(HammingIndex(2), HammingIndex(3)));
}

TEST_CASE("Assouad bound") {
    CHECK(assouad_bound(4, Affinity(1.0), 10) == Approx(2.0));
    CHECK(assouad_bound(4, Affinity(0.0), 10) == 0.0);
    CHECK(assouad_bound(6, Affinity(5.0 / 6.0), 1) == Approx(3.0 * (1.0 - std::sqrt(11.0) / 6.0)));
    CHECK(assouad_bound_weak(4, Affinity(1.0), 3) == Approx(1.0));
    // The weak form never exceeds the sharp one.
    for (double rho = 0.05; rho < 1.0; rho += 0.05)
        for (std::size_t n : {1u, 5u, 50u})
            CHECK(assouad_bound_weak(3, Affinity(rho), n) <= assouad_bound(3, Affinity(rho), n) + 1e-15);
}

TEST_CASE("minimax floor") {
    const double c = (1.0 - std::sqrt(11.0) / 6.0) / 32.0;
    CHECK(l2_minimax_floor(4, 2.0, 100) == Approx(c * 8.0 / 100.0));
    CHECK(c > 0.0139);
    CHECK(l2_minimax_floor(4, 6.0, 100) == Approx(3.0 * l2_minimax_floor(4, 2.0, 100)));
    CHECK(l2_minimax_floor(8, 2.0, 100) == Approx(2.0 * l2_minimax_floor(4, 2.0, 100)));
    // Family-valued estimators skip the factor 1/4 of the general reduction;
    // at n = 1 the neighbour affinity is exactly 5/6.
    CHECK(family_valued_floor(AssouadFamily(3, 2.0, 1)) == Approx(4.0 * l2_minimax_floor(3, 2.0, 1)));
    CHECK(family_valued_floor(AssouadFamily(4, 2.0, 100)) >= 4.0 * l2_minimax_floor(4, 2.0, 100));
}

TEST_CASE("nearest member recovers the index") {
    const AssouadFamily F(6, 1.5, 20);
    for (const auto& v : F.vertices()) CHECK(nearest_member(F, F.member(v).step()) == v);

    // Nearest vertex in L2, checked by exhaustive search on perturbed members.
    Rng rng(51);
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < 20; ++t) {
        HammingIndex d(6);
        for (std::size_t j = 0; j < 6; ++j) d[j] = coin(rng);
        const auto noise = test::random_step(rng, 16);
        std::vector<double> y, h;
        const auto fm = F.member(d);
        const auto& ref = common_refinement(fm.partition(), noise.partition());
        for (std::size_t k = 0; k < ref.size(); ++k) {
            const double mid = 0.5 * (ref.breakpoints()[k] + ref.breakpoints()[k + 1]);
            h.push_back(0.95 * fm(mid) + 0.05 * noise(mid));
        }
        const PiecewiseDensity f(ref, h);
        const auto got = nearest_member(F, f.step());
        double best = INFINITY;
        for (const auto& v : F.vertices()) best = std::min(best, l2_distance_squared(f, F.member(v)));
        CHECK(l2_distance_squared(f, F.member(got)) == Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("hypercube report") {
    const auto j = assouad_report(AssouadFamily(8, 16.0, 64));
    CHECK(j["checks_passed"].get<bool>());
    CHECK(j["D"].get<int>() == 8);
    CHECK(j["bump_norm_squared_quadrature"].get<double>() == Approx(16.0 / 256.0));
    CHECK(j["sup_norm"].get<double>() == Approx(17.0));
}
