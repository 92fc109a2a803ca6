#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "modsel/gaussian.hpp"

using namespace modsel;
using doctest::Approx;

namespace {

LinearModel coordinate_model(std::size_t n, std::size_t D, double weight) {
    Matrix B = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(D));
    for (std::size_t i = 0; i < D; ++i) B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    return LinearModel(B, weight, "S_" + std::to_string(D));
}

std::vector<LinearModel> nested(std::size_t n, std::size_t max_dim) {
    std::vector<LinearModel> out;
    for (std::size_t D = 1; D <= max_dim; ++D) out.push_back(coordinate_model(n, D, static_cast<double>(D)));
    return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

TEST_CASE("Gaussian sampling") {
    const Vector s = Vector::LinSpaced(5, 0.0, 4.0);
    CHECK(gaussian_sample(s, 0.0, 1).x == s);
    CHECK(gaussian_sample(s, 1.0, 7).x == gaussian_sample(s, 1.0, 7).x);
    CHECK(gaussian_sample(s, 1.0, 7).x != gaussian_sample(s, 1.0, 8).x);
    CHECK_THROWS(gaussian_sample(s, -1.0, 1));

    // Coordinate means of 4000 draws, each within 4 standard errors.
    const Vector zero = Vector::Zero(3);
    Vector acc = Vector::Zero(3);
    Rng rng(5);
    for (int i = 0; i < 4000; ++i) acc += gaussian_sample(zero, 2.0, rng).x;
    for (int j = 0; j < 3; ++j) CHECK(std::abs(acc[j] / 4000.0) <= 4.0 * 2.0 / std::sqrt(4000.0));
}

TEST_CASE("projection risk") {
    const std::size_t n = 10;
    Vector s = Vector::Zero(n);
    s[0] = 3.0;
    s[4] = 1.0;
    const auto e1 = coordinate_model(n, 1, 1.0);
    CHECK(projection_risk_exact(s, e1, 0.5) == Approx(0.25 + 1.0));
    const auto mc = projection_risk_mc(s, e1, 0.5, 4000, 3);
    CHECK(std::abs(mc.mean - mc.reference) <= 3.0 * mc.se);

    const LinearModel full(Matrix::Identity(n, n), 1.0, "full");
    CHECK(projection_risk_exact(s, full, 0.5) == Approx(2.5));
    CHECK(full.bias_squared(s) < 1e-24);
    CHECK(e1.metric_dimension() == 0.5);
    CHECK_THROWS(LinearModel(Matrix::Zero(3, 2), 1.0, "rank0"));
    CHECK_THROWS(LinearModel(Matrix::Identity(2, 3), 1.0, "wide"));
}

TEST_CASE("projection agrees with the normal-equations solution") {
    Rng rng(6);
    std::normal_distribution<double> z;
    for (int t = 0; t < 20; ++t) {
        Matrix B(12, 4);
        for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = z(rng);
        Vector x(12);
        for (Eigen::Index i = 0; i < 12; ++i) x[i] = z(rng);
        const LinearModel m(B, 1.0, "rand");
        const Vector beta = (B.transpose() * B).ldlt().solve(B.transpose() * x);
        const Vector p = project_mle({x, 1.0}, m);
        CHECK((p - B * beta).norm() < 1e-10);
        CHECK(m.residual_squared(x) == Approx((x - B * beta).squaredNorm()).epsilon(1e-10));
    }
}

TEST_CASE("Gaussian two-point test") {
    const Vector v = Vector::Zero(4);
    Vector u = Vector::Zero(4);
    u[1] = 2.0;
    CHECK_THROWS(gaussian_two_point_test({v, 1.0}, v, v));
    CHECK(gaussian_two_point_test({u, 1.0}, v, u) == TwoPointChoice::u);
    CHECK(gaussian_two_point_test({v, 1.0}, v, u) == TwoPointChoice::v);
    // Equidistant: ties go to v, from either side.
    Vector mid = 0.5 * (u + v);
    CHECK(gaussian_two_point_test({mid, 1.0}, v, u) == TwoPointChoice::v);
    CHECK(gaussian_two_point_test({mid, 1.0}, u, v) == TwoPointChoice::v);

    // Error probability is Phi(-|u - v| / (2 sigma)), below exp(-|u - v|^2 / (8 sigma^2)).
    const double sigma = 0.8;
    const std::size_t reps = 20000;
    const auto err = replicate(reps, 17, [&](Rng& rng, std::size_t) {
        return gaussian_two_point_test(gaussian_sample(v, sigma, rng), v, u) == TwoPointChoice::u ? 1.0 : 0.0;
    });
    const MeanSe ms = summarize(err);
    const double exact = normal_cdf(-2.0 / (2.0 * sigma));
    CHECK(std::abs(ms.mean - exact) <= 3.0 * ms.se);
    CHECK(exact <= std::exp(-4.0 / (8.0 * sigma * sigma)));
}

TEST_CASE("lattice estimator") {
    const auto m = coordinate_model(6, 3, 3.0);
    const double sigma = 0.5;
    CHECK_THROWS(LatticeNet(m, 0.0));
    const LatticeNet net(m, minimum_lambda(sigma));
    CHECK(net.spacing() == Approx(8.0 * std::sqrt(3.0) * sigma));
    const LatticeIndex k = (LatticeIndex(3) << 2, -1, 0).finished();
    CHECK(lattice_mle({net.point(k), sigma}, net, LatticeIndex::Zero(3)) == k);
    CHECK(lattice_mle({net.point(k), sigma}, net, k) == k);

    const LatticeNet tight(m, 0.9 * minimum_lambda(sigma));
    CHECK_THROWS_AS(lattice_mle({Vector::Zero(6), sigma}, tight, LatticeIndex::Zero(3)), std::invalid_argument);

    const LatticeIndex far = LatticeIndex::Constant(3, 1000);
    CHECK_THROWS_AS(lattice_mle({net.point(far), sigma}, net, LatticeIndex::Zero(3)), std::out_of_range);
}

TEST_CASE("lattice ball counts") {
    const auto m1 = coordinate_model(2, 1, 1.0);
    const LatticeNet net1(m1, 0.5);  // spacing 1
    CHECK(count_lattice_in_ball(net1, Vector::Zero(2), 0.4) == 1);
    CHECK(count_lattice_in_ball(net1, Vector::Zero(2), 1.0) == 3);  // boundary points count

    // D = 1: floor((c + r) / a) - ceil((c - r) / a) + 1 when the orthogonal part is zero.
    Rng rng(8);
    std::uniform_real_distribution<double> u(-3.0, 3.0), rr(0.0, 6.0);
    const LatticeNet net(m1, 0.35);
    for (int t = 0; t < 200; ++t) {
        const double c = u(rng), r = rr(rng), a = net.spacing();
        const Vector center = (Vector(2) << c, 0.0).finished();
        const auto expect = static_cast<std::uint64_t>(std::floor((c + r) / a) - std::ceil((c - r) / a) + 1);
        CHECK(count_lattice_in_ball(net, center, r) == expect);
    }

    // D = 2 brute force, including an orthogonal offset.
    const auto m2 = coordinate_model(3, 2, 2.0);
    const LatticeNet net2(m2, 0.4);
    for (int t = 0; t < 100; ++t) {
        const Vector center = (Vector(3) << u(rng), u(rng), 0.3 * u(rng)).finished();
        const double r = rr(rng);
        std::uint64_t brute = 0;
        for (int i = -40; i <= 40; ++i)
            for (int j = -40; j <= 40; ++j)
                if ((net2.point((LatticeIndex(2) << i, j).finished()) - center).squaredNorm() <= r * r) ++brute;
        CHECK(count_lattice_in_ball(net2, center, r) == brute);
        std::uint64_t visited = 0;
        for_each_lattice_point_in_ball(net2, center, r, [&](const LatticeIndex&) { ++visited; });
        CHECK(visited == brute);
    }

    // x = 2, D = 2, eta = 1: the count stays below exp(x^2 D / 2) = e^4.
    const LatticeNet net22(m2, 1.0 / std::sqrt(2.0));
    CHECK(static_cast<double>(count_lattice_in_ball(net22, Vector::Zero(3), 2.0)) < std::exp(4.0));
    CHECK(lattice_ball_bound(2, 2.0) == Approx(std::exp(4.0)));
    CHECK_THROWS(lattice_ball_bound(2, 1.5));
    CHECK_THROWS_AS(count_lattice_in_ball(net2, Vector::Zero(3), 1e4, 100), std::length_error);
}

TEST_CASE("lattice nets satisfy the covering and counting properties") {
    for (std::size_t D : {1u, 2u, 4u, 8u}) {
        const auto chk = verify_net_property(coordinate_model(D + 2, D, 1.0), 1.0, 3, 300, 3);
        CHECK(chk.covering_ok);
        CHECK(chk.counts_ok);
        CHECK(chk.floor_ok);
        CHECK(chk.max_cover_distance <= chk.eta);
        CHECK(chk.min_floor_count >= (1u << D));
    }
}

TEST_CASE("penalized selection among nested models") {
    const std::size_t n = 20;
    const double sigma = 1.0;
    Vector s = Vector::Zero(n);
    for (int i = 0; i < 3; ++i) s[i] = 10.0 * sigma;
    const auto models = nested(n, 8);
    CHECK(kraft_sum(models) <= 1.0);

    const auto r = penalized_risk_mc(s, models, sigma, default_kappa, 1000, 21);
    CHECK(static_cast<double>(r.selected[2]) / 1000.0 >= 0.9);
    CHECK(r.risk.reference == Approx(3.0));

    // The selection is invariant under a joint rescaling of the data and sigma.
    Rng rng(22);
    for (int t = 0; t < 50; ++t) {
        const auto obs = gaussian_sample(s, sigma, rng);
        const auto a = penalized_select(obs, models);
        const auto b = penalized_select({7.5 * obs.x, 7.5 * sigma}, models);
        CHECK(a.index == b.index);
    }

    std::vector<LinearModel> heavy{coordinate_model(n, 1, 0.1), coordinate_model(n, 2, 0.1)};
    CHECK_THROWS_AS(penalized_select({s, sigma}, heavy), std::invalid_argument);
    CHECK_THROWS(penalized_select({s, sigma}, std::span<const LinearModel>{}));
}

TEST_CASE("penalized criterion values") {
    const std::size_t n = 4;
    const Vector x = (Vector(4) << 3.0, 1.0, 0.5, 0.0).finished();
    const auto models = nested(n, 3);
    const auto c = penalized_select({x, 1.0}, models, 2.0);
    CHECK(c.criterion[0] == Approx(1.25 + 2.0));
    CHECK(c.criterion[1] == Approx(0.25 + 4.0));
    CHECK(c.criterion[2] == Approx(0.0 + 6.0));
    CHECK(c.index == 0);
    CHECK(c.estimate == (Vector(4) << 3.0, 0.0, 0.0, 0.0).finished());
}

TEST_CASE("variable selection families") {
    Rng rng(23);
    std::normal_distribution<double> z;
    Matrix Z(10, 5);
    for (Eigen::Index i = 0; i < Z.size(); ++i) Z.data()[i] = z(rng);

    const auto ord = build_variable_selection_family(Z, VariableSelectionMode::ordered);
    REQUIRE(ord.size() == 5);
    for (std::size_t q = 0; q < 5; ++q) {
        CHECK(ord[q].dim() == q + 1);
        CHECK(ord[q].weight() == static_cast<double>(q + 1));
    }
    CHECK(ord[2].label() == "{1,2,3}");

    const auto all = build_variable_selection_family(Z.leftCols(3), VariableSelectionMode::all_subsets);
    REQUIRE(all.size() == 7);
    for (const auto& m : all) CHECK(m.weight() == Approx(1.0 + static_cast<double>(m.dim()) * std::log(3.0)));
    CHECK(all.back().label() == "{1,2,3}");

    const auto mixed = build_variable_selection_family(Z, VariableSelectionMode::mixed, 2);
    CHECK(mixed.size() == 15);
    for (const auto& m : mixed) {
        if (m.label() == "{1}") CHECK(m.weight() == 1.5);
        if (m.label() == "{1,2}") CHECK(m.weight() == 2.5);
        if (m.label() == "{2,3}") CHECK(m.weight() == Approx(1.0 + 2.0 * std::log(5.0)));
    }
    CHECK(parse_variable_selection_mode("all-subsets") == VariableSelectionMode::all_subsets);
    CHECK(to_string(VariableSelectionMode::mixed) == "mixed");
    CHECK_THROWS(parse_variable_selection_mode("forward"));
    CHECK_THROWS_AS(build_variable_selection_family(Z, VariableSelectionMode::all_subsets, 0, 10), std::length_error);
}

TEST_CASE("design matrix CSV") {
    std::stringstream ok("z1,z2\n1,2\n3.5,-4\n");
    const Matrix Z = read_design_csv(ok);
    CHECK(Z.rows() == 2);
    CHECK(Z(1, 1) == -4.0);
    std::stringstream ragged("1,2\n3\n");
    CHECK_THROWS(read_design_csv(ragged));
    std::stringstream text("1,2\nx,3\n");
    CHECK_THROWS(read_design_csv(text));
    std::stringstream empty("a,b\n");
    CHECK_THROWS(read_design_csv(empty));
}
