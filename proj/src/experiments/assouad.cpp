#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "common.hpp"
#include "modsel/histograms.hpp"
#include "modsel/lowerbounds.hpp"
#include "modsel/selection.hpp"

namespace modsel::exp {

namespace {

enum Est { regular8, family_hist, nearest, holdout, baseline, trig16, n_est };
constexpr std::array<const char*, n_est> est_names{"regular-8-histogram", "family-partition-histogram",
                                                   "nearest-member",      "holdout-regular",
                                                   "baseline-loglik",     "trig-16"};

struct Loss {
    std::array<double, n_est> l2{};
    double h2_family = 0.0;
    double h2_holdout = 0.0;
};

// Up to 2^10 vertices: all of them when D ≤ 10, else a random sample plus
// the two extreme corners.
std::vector<HammingIndex> probe_vertices(const AssouadFamily& fam, std::uint64_t seed) {
    if (fam.D() <= 10) return fam.vertices();
    std::vector<HammingIndex> out{HammingIndex(fam.D(), false), HammingIndex(fam.D(), true)};
    Rng rng(seed);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 1024; ++i) {
        HammingIndex d(fam.D());
        for (std::size_t j = 0; j < fam.D(); ++j) d[j] = coin(rng);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace

RiskReport assouad_floor(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const auto D = param<std::size_t>(cfg, "D", 8);
    const double L = param<double>(cfg, "L", 16.0);
    const std::size_t n = cfg.n_grid.front();
    const AssouadFamily fam(D, L, n);

    const Partition reg = regular_partition(7);
    std::vector<Partition> rp;
    for (int k = 0; k <= param<int>(cfg, "holdout_max_k", 5); ++k) rp.push_back(regular_dyadic_partition(k));
    const WeightedFamily holdout_family = assign_weights(rp, WeightScheme::mixed, "regular");
    std::vector<int> trig_idx;
    for (int j = 1; j <= 16; ++j) trig_idx.push_back(j);

    const auto verts = probe_vertices(fam, rows.next_seed());
    std::array<MeanSe, n_est> sup{};
    MeanSe sup_h2_family{}, sup_h2_holdout{};
    std::uint64_t first_seed = 0;

    for (std::size_t v = 0; v < verts.size(); ++v) {
        const PiecewiseDensity s = fam.member(verts[v]);
        const double s_norm2 = l2_norm_squared(s.step());
        std::vector<double> s_coef{1.0};
        for (int j : trig_idx) s_coef.push_back(trig_coefficient(s.step(), j));

        const std::uint64_t seed = rows.next_seed();
        if (v == 0) first_seed = seed;
        const auto losses = replicate(cfg.reps, seed, [&](Rng& rng, std::size_t) {
            Loss r;
            const auto x = draw(s, n, rng);
            const PiecewiseDensity hf = histogram(x, fam.partition());
            r.l2[regular8] = l2_distance_squared(s, histogram(x, reg));
            r.l2[family_hist] = l2_distance_squared(s, hf);
            r.l2[nearest] = l2_distance_squared(s, fam.member(nearest_member(fam, hf.step())));
            const HoldoutResult h = holdout_select(x, holdout_family);
            r.l2[holdout] = l2_distance_squared(s, h.density);
            r.l2[baseline] = l2_distance_squared(s, baseline_penalized_holdout(x, holdout_family).density);
            r.l2[trig16] = trig_projection_estimator(x, trig_idx).l2_distance_squared(s_norm2, s_coef);
            r.h2_family = hellinger_squared(s, hf);
            r.h2_holdout = hellinger_squared(s, h.density);
            return r;
        });
        std::vector<double> buf(losses.size());
        auto take = [&](auto get, MeanSe& best) {
            for (std::size_t i = 0; i < losses.size(); ++i) buf[i] = get(losses[i]);
            const MeanSe e = summarize(buf);
            if (v == 0 || e.mean > best.mean) best = e;
        };
        for (int k = 0; k < n_est; ++k) take([k](const Loss& l) { return l.l2[k]; }, sup[k]);
        take([](const Loss& l) { return l.h2_family; }, sup_h2_family);
        take([](const Loss& l) { return l.h2_holdout; }, sup_h2_holdout);
    }

    const double floor = l2_minimax_floor(D, L, n);
    const double fv_floor = family_valued_floor(fam);
    const std::string scenario = "D=" + std::to_string(D) + ",L=" + fmt(L) + ",vertices=" + std::to_string(verts.size());
    const double Dd = static_cast<double>(D);
    for (int k = 0; k < n_est; ++k) {
        ReportRow r = rows.make(scenario + ":sup-l2-vs-minimax-floor", n, est_names[k], Dd, sup[k].mean, sup[k].se,
                                floor, cfg.reps, first_seed);
        rows.add(rows.gate().at_least(r));
        r.scenario = scenario + ":sup-l2-vs-family-valued-floor";
        r.reference = fv_floor;
        rows.add(k == nearest ? rows.gate().at_least(r) : Gate::report_only(r));
    }
    const double wedge = Dd / static_cast<double>(n);
    rows.add(rows.gate().at_most(rows.make(scenario + ":sup-hellinger-vs-D/n", n, est_names[family_hist], Dd,
                                           sup_h2_family.mean, sup_h2_family.se, wedge, cfg.reps, first_seed)));
    rows.add(rows.gate().at_most(rows.make(scenario + ":sup-hellinger-vs-D/n", n, est_names[holdout], Dd,
                                           sup_h2_holdout.mean, sup_h2_holdout.se, wedge, cfg.reps, first_seed)));
    return rows.finish();
}

}  // namespace modsel::exp
