#pragma once

// Density selection among finitely many candidate densities: a robust pair
// test, a tournament built on it, and hold-out selection of histograms.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "modsel/metrics.hpp"
#include "modsel/partitions.hpp"

namespace modsel {

struct Candidate {
    PiecewiseDensity density;
    double weight;  // Δ ≥ 1
    std::string label;
};

/// Candidates with unique labels, Δ ≥ 1 and Σ exp(-Δ) ≤ 1.
class CandidateSet {
public:
    explicit CandidateSet(std::vector<Candidate> candidates);

    std::size_t size() const noexcept { return candidates_.size(); }
    const Candidate& operator[](std::size_t i) const { return candidates_.at(i); }
    std::span<const Candidate> all() const noexcept { return candidates_; }

private:
    std::vector<Candidate> candidates_;
};

enum class PairWinner { u, v };

struct TestOutcome {
    PairWinner winner;
    double statistic;  // T = Σ ψ(X_i)
    double threshold;  // (Δ_u - Δ_v)/2
    std::size_t null_points = 0;  // points where u and v both vanish
};

/// ψ = (√u - √v)/(√u + √v) ∈ [-1, 1], and 0 where both densities vanish.
/// u wins iff T > (Δ_u - Δ_v)/2, v wins iff T < it; on equality the smaller
/// weight wins, then the smaller label. Swapping the roles of (u, Δ_u) and
/// (v, Δ_v) negates T and the threshold, so the winner is unchanged.
/// Throws std::invalid_argument if h(u, v) = 0 or the sample is empty.
TestOutcome robust_pair_test(std::span<const double> points, const PiecewiseDensity& u, const PiecewiseDensity& v,
                             double delta_u, double delta_v, const std::string& label_u = "u",
                             const std::string& label_v = "v");

struct PairRecord {
    std::size_t first;
    std::size_t second;
    std::size_t winner;
    double statistic;  // oriented with `first` in the role of u
    double threshold;
};

struct TournamentResult {
    std::size_t index = 0;
    std::vector<double> defeat_radius;  // per candidate, Hellinger distance
    std::vector<PairRecord> pairs;
};

/// Runs robust_pair_test on every pair. The defeat radius of a candidate is
/// the largest h to a candidate that beats it (0 if unbeaten). Selects the
/// smallest radius; ties go to smaller Δ, then smaller label.
TournamentResult tournament_select(std::span<const double> points, const CandidateSet& cands);

void write_trace_csv(std::ostream& out, const CandidateSet& cands, const TournamentResult& result);

inline constexpr std::size_t default_candidate_cap = 2000;

struct HoldoutResult {
    std::size_t index;  // into the family
    Partition partition;
    PiecewiseDensity density;
    TournamentResult tournament;
    bool fallback = false;  // baseline only: every candidate scored -inf
};

/// Histograms on the first half, tournament on the second half. The sample
/// size must be even; throws std::length_error above the candidate cap.
HoldoutResult holdout_select(std::span<const double> sample2n, const WeightedFamily& family,
                             std::size_t candidate_cap = default_candidate_cap);

/// Histograms on the first half, then argmax Σ_{i>n} log ŝ_m(X_i) - Δ_m with
/// log 0 = -inf. Ties go to smaller Δ, then family order. If every candidate
/// scores -inf, falls back to holdout_select and sets `fallback`.
HoldoutResult baseline_penalized_holdout(std::span<const double> sample2n, const WeightedFamily& family,
                                         std::size_t candidate_cap = default_candidate_cap);

}  // namespace modsel
