#include "common.hpp"

namespace modsel {

namespace {

ExperimentConfig defaults(std::string id, std::uint64_t seed, std::size_t reps, std::vector<std::size_t> n_grid,
                          nlohmann::json params = nlohmann::json::object()) {
    ExperimentConfig c;
    c.experiment = std::move(id);
    c.seed = seed;
    c.reps = reps;
    c.n_grid = std::move(n_grid);
    c.params = std::move(params);
    return c;
}

std::vector<ExperimentInfo> build_registry() {
    using namespace exp;
    std::vector<ExperimentInfo> r;
    r.push_back({"exact-formulas",
                 "closed-form histogram variance, hypercube geometry and Kraft sums",
                 exact_formulas, defaults("exact-formulas", 101, 100, {100})});
    r.push_back({"distance-identities",
                 "Hellinger/affinity identities, overlap sandwich, tensorization, Gaussian affinity",
                 distance_identities, defaults("distance-identities", 102, 100, {1}, {{"cases", 120}})});
    r.push_back({"his-exact", "histogram L2 risk decomposition and Hellinger risk bound",
                 his_exact, defaults("his-exact", 103, 10000, {16, 64})});
    r.push_back({"gauss-risk", "projection estimator risk sigma^2 D + bias^2",
                 gauss_risk, defaults("gauss-risk", 104, 10000, {16, 64})});
    r.push_back({"trig-risk", "trigonometric projection estimator risk",
                 trig_risk, defaults("trig-risk", 105, 2000, {64})});
    r.push_back({"gtest", "Gaussian two-point likelihood test error under misspecification",
                 gtest, defaults("gtest", 106, 100000, {4})});
    r.push_back({"density-two-point", "likelihood test between two densities against rho^n",
                 density_two_point, defaults("density-two-point", 107, 10000, {4, 16, 64})});
    r.push_back({"robust-test", "bounded pairwise test and tournament selection",
                 robust_test, defaults("robust-test", 108, 2000, {16, 64, 256})});
    r.push_back({"lattice-deviation", "lattice MLE deviation tail and risk (n_grid lists model dimensions)",
                 lattice_deviation, defaults("lattice-deviation", 109, 10000, {1, 2, 4})});
    r.push_back({"net-check", "lattice covering, ball counts and 3-eta floor (n_grid lists model dimensions)",
                 net_check, defaults("net-check", 110, 100, {1, 2, 4, 8})});
    r.push_back({"rate-holder", "hold-out selected histogram Hellinger risk over n, log-log slope",
                 rate_holder, defaults("rate-holder", 111, 500, {250, 500, 1000, 2000, 4000})});
    r.push_back({"oracle-ratio-gaussian", "penalized selection risk over oracle criterion",
                 oracle_ratio_gaussian, defaults("oracle-ratio-gaussian", 112, 1000, {50}, {{"p", 10}})});
    r.push_back({"oracle-ratio-holdout", "hold-out histogram selection risk over oracle criterion",
                 oracle_ratio_holdout, defaults("oracle-ratio-holdout", 113, 200, {200, 1000})});
    r.push_back({"varsel-misorder", "cost of a misordered influential variable",
                 varsel_misorder, defaults("varsel-misorder", 114, 1000, {100}, {{"p", 20}})});
    r.push_back({"wrb-impossibility", "best-fit line among many one-dimensional models at s = 0",
                 wrb_impossibility, defaults("wrb-impossibility", 115, 200, {2, 4, 8, 16, 32})});
    r.push_back({"assouad-floor", "estimators on the hypercube family against the minimax floor",
                 assouad_floor, defaults("assouad-floor", 116, 1000, {64}, {{"D", 8}, {"L", 16.0}})});
    return r;
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_registry() {
    static const std::vector<ExperimentInfo> registry = build_registry();
    return registry;
}

}  // namespace modsel
