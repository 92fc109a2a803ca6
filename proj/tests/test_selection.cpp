#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "modsel/histograms.hpp"
#include "modsel/selection.hpp"
#include "support.hpp"

using namespace modsel;
using doctest::Approx;

namespace {

WeightedFamily regular_family(std::size_t max_dim) {
    std::vector<Partition> parts;
    for (std::size_t D = 0; D <= max_dim; ++D) parts.push_back(regular_partition(D));
    return assign_weights(parts, WeightScheme::ordered_nested, "regular");
}

double psi_ref(double u, double v) {
    if (u == 0.0 && v == 0.0) return 0.0;
    return (std::sqrt(u) - std::sqrt(v)) / (std::sqrt(u) + std::sqrt(v));
}

}  // namespace

TEST_CASE("candidate set validation") {
    const auto u = PiecewiseDensity::uniform();
    CHECK_THROWS(CandidateSet({}));
    CHECK_THROWS(CandidateSet({{u, 0.5, "a"}}));
    CHECK_THROWS(CandidateSet({{u, 1.0, "a"}, {u, 2.0, "a"}}));
    CHECK_THROWS(CandidateSet({{u, 1.0, "a"}, {u, 1.0, "b"}, {u, 1.0, "c"}}));  // 3/e > 1
    CHECK(CandidateSet({{u, 1.0, "a"}, {u, 2.0, "b"}}).size() == 2);
}

TEST_CASE("robust pair test") {
    Rng rng(41);
    const auto u = test::random_step(rng, 8, true);
    const auto v = test::random_step(rng, 4);
    CHECK_THROWS(robust_pair_test(std::vector<double>{}, u, v, 1, 1));
    CHECK_THROWS(robust_pair_test(std::vector<double>{0.5}, u, u, 1, 1));

    for (int t = 0; t < 50; ++t) {
        const auto x = draw(v, 30, rng);
        const auto a = robust_pair_test(x, u, v, 2.0, 3.0, "u", "v");
        const auto b = robust_pair_test(x, v, u, 3.0, 2.0, "v", "u");
        double T = 0.0;
        for (double p : x) T += psi_ref(u(p), v(p));
        CHECK(a.statistic == Approx(T).epsilon(1e-12));
        CHECK(b.statistic == Approx(-a.statistic).epsilon(1e-12));
        CHECK(a.threshold == -0.5);
        CHECK((a.winner == PairWinner::u) == (b.winner == PairWinner::v));
    }

    // Both densities vanish on [0, 1/2).
    const PiecewiseDensity r1(regular_partition(1), {0.0, 2.0});
    const PiecewiseDensity r2(regular_partition(3), {0.0, 0.0, 3.0, 1.0});
    const auto z = robust_pair_test(std::vector<double>{0.1, 0.2, 0.7}, r1, r2, 1, 1);
    CHECK(z.null_points == 2);
    CHECK(z.statistic == Approx(psi_ref(2.0, 3.0)));
}

TEST_CASE("pair test error probability on a separated pair") {
    const auto u = PiecewiseDensity::uniform();
    const PiecewiseDensity v(regular_partition(3), {0.2, 0.6, 1.2, 2.0});
    const double h2 = hellinger_squared(u, v);
    for (std::size_t n : {10u, 40u, 160u}) {
        const auto err = replicate(4000, 42 + n, [&](Rng& rng, std::size_t) {
            return robust_pair_test(draw(u, n, rng), u, v, 1.0, 1.0).winner == PairWinner::v ? 1.0 : 0.0;
        });
        const MeanSe ms = summarize(err);
        CHECK(ms.mean <= std::exp(-3.0 * n * h2 / 56.0) + 3.0 * ms.se);
    }
}

TEST_CASE("tournament") {
    const auto u = PiecewiseDensity::uniform();
    const std::vector<double> x{0.1, 0.5, 0.9};
    const auto one = tournament_select(x, CandidateSet({{u, 1.0, "only"}}));
    CHECK(one.index == 0);
    CHECK(one.pairs.empty());

    // Data from the uniform; the far step candidate loses.
    Rng rng(43);
    const PiecewiseDensity far(regular_partition(1), {1.9, 0.1});
    const CandidateSet two({{far, 2.0, "far"}, {u, 2.0, "u"}});
    const auto r = tournament_select(draw(u, 400, rng), two);
    CHECK(r.index == 1);
    CHECK(r.defeat_radius[1] == 0.0);
    CHECK(r.defeat_radius[0] == Approx(hellinger_distance(far, u)));

    // Reordering the candidates does not change the selected label.
    std::vector<Candidate> cs;
    for (int i = 0; i < 6; ++i) cs.push_back({test::random_step(rng, 4), 3.0, "c" + std::to_string(i)});
    const auto pts = draw(cs[2].density, 200, rng);
    const CandidateSet a(cs);
    std::reverse(cs.begin(), cs.end());
    std::rotate(cs.begin(), cs.begin() + 2, cs.end());
    const CandidateSet b(cs);
    CHECK(a[tournament_select(pts, a).index].label == b[tournament_select(pts, b).index].label);

    std::stringstream out;
    const auto tr = tournament_select(pts, a);
    write_trace_csv(out, a, tr);
    const std::string s = out.str();
    CHECK(s.rfind("record,first,second,winner,statistic,threshold,defeat_radius\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == static_cast<long>(1 + 15 + 6 + 1));
    CHECK(s.find("selected," + a[tr.index].label) != std::string::npos);
}

TEST_CASE("hold-out selection") {
    const auto m0 = assign_weights(std::vector<Partition>{Partition::trivial()}, WeightScheme::regular_bonus);
    const auto r0 = holdout_select(std::vector<double>{0.1, 0.2, 0.3, 0.4}, m0);
    CHECK(r0.index == 0);
    CHECK(r0.partition.size() == 1);
    CHECK(r0.density(0.5) == 1.0);

    const auto fam = regular_family(31);
    CHECK_THROWS_AS(holdout_select(std::vector<double>{0.1, 0.2, 0.3}, fam), std::invalid_argument);
    CHECK_THROWS_AS(holdout_select(std::vector<double>{}, fam), std::invalid_argument);
    CHECK_THROWS_AS(holdout_select(std::vector<double>{0.1, 0.2}, fam, 4), std::length_error);

    // Uniform data: the trivial partition wins most of the time.
    const auto u = GridDensity::uniform(64);
    const auto picks = replicate(100, 44, [&](Rng& rng, std::size_t) {
        return holdout_select(draw(u, 1000, rng), fam).index == 0 ? 1.0 : 0.0;
    });
    CHECK(summarize(picks).mean >= 0.8);
}

TEST_CASE("penalized hold-out likelihood baseline") {
    const auto m0 = assign_weights(std::vector<Partition>{Partition::trivial()}, WeightScheme::regular_bonus);
    const auto single = baseline_penalized_holdout(std::vector<double>{0.3, 0.7}, m0);
    CHECK(single.index == 0);
    CHECK_FALSE(single.fallback);

    // regular(3) leaves (1/4, 1/2) empty, and the hold-out point 0.3 lands there.
    const auto fam = assign_weights(std::vector<Partition>{regular_partition(3), regular_partition(1)},
                                    WeightScheme::regular_bonus);
    const std::vector<double> x{0.05, 0.1, 0.15, 0.6, 0.05, 0.1, 0.15, 0.3};
    const auto r = baseline_penalized_holdout(x, fam);
    CHECK(r.index == 1);
    CHECK_FALSE(r.fallback);

    // Every candidate vanishes at some hold-out point.
    const std::vector<double> y{0.1, 0.2, 0.9, 0.8};
    const auto f = baseline_penalized_holdout(y, fam);
    CHECK(f.fallback);
    CHECK(f.index == holdout_select(y, fam).index);
}
