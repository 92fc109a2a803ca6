#pragma once

// Shared plumbing for the experiment implementations.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modsel/harness.hpp"
#include "modsel/montecarlo.hpp"

namespace modsel::exp {

template <typename T>
T param(const ExperimentConfig& cfg, const char* key, T fallback) {
    return cfg.params.contains(key) ? cfg.params[key].get<T>() : fallback;
}

/// Collects rows and hands out row seeds seed_split(root, 10^6 + k).
class Rows {
public:
    explicit Rows(const ExperimentConfig& cfg) : cfg_(cfg), gate_{cfg.se_multiplier} {}

    std::uint64_t next_seed() { return seed_split(cfg_.seed, 1'000'000 + counter_++); }
    const Gate& gate() const noexcept { return gate_; }

    ReportRow make(std::string scenario, std::size_t n, std::string model, double dim, double mean, double se,
                   double reference, std::size_t reps, std::uint64_t seed) const {
        ReportRow r;
        r.experiment = cfg_.experiment;
        r.scenario = std::move(scenario);
        r.n = n;
        r.model = std::move(model);
        r.dim = dim;
        r.mc_mean = mean;
        r.mc_se = se;
        r.reference = reference;
        r.reps = reps;
        r.seed = seed;
        return r;
    }

    /// Deterministic row: no replication, se = 0.
    ReportRow value(std::string scenario, std::size_t n, std::string model, double dim, double value,
                    double reference) const {
        return make(std::move(scenario), n, std::move(model), dim, value, 0.0, reference, 0, cfg_.seed);
    }

    void add(ReportRow r) { rows_.push_back(std::move(r)); }

    RiskReport finish() {
        RiskReport rep;
        rep.experiment = cfg_.experiment;
        rep.rows = std::move(rows_);
        return rep;
    }

private:
    const ExperimentConfig& cfg_;
    Gate gate_;
    std::vector<ReportRow> rows_;
    std::uint64_t counter_ = 0;
};

std::string fmt(double v);

RiskReport exact_formulas(const ExperimentConfig& cfg);
RiskReport distance_identities(const ExperimentConfig& cfg);
RiskReport his_exact(const ExperimentConfig& cfg);
RiskReport gauss_risk(const ExperimentConfig& cfg);
RiskReport trig_risk(const ExperimentConfig& cfg);
RiskReport gtest(const ExperimentConfig& cfg);
RiskReport density_two_point(const ExperimentConfig& cfg);
RiskReport robust_test(const ExperimentConfig& cfg);
RiskReport lattice_deviation(const ExperimentConfig& cfg);
RiskReport net_check(const ExperimentConfig& cfg);
RiskReport rate_holder(const ExperimentConfig& cfg);
RiskReport oracle_ratio_gaussian(const ExperimentConfig& cfg);
RiskReport oracle_ratio_holdout(const ExperimentConfig& cfg);
RiskReport varsel_misorder(const ExperimentConfig& cfg);
RiskReport wrb_impossibility(const ExperimentConfig& cfg);
RiskReport assouad_floor(const ExperimentConfig& cfg);

}  // namespace modsel::exp
