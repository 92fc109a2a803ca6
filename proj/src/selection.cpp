#include "modsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "modsel/histograms.hpp"

namespace modsel {

CandidateSet::CandidateSet(std::vector<Candidate> candidates) : candidates_(std::move(candidates)) {
    if (candidates_.empty()) throw std::invalid_argument("candidate set is empty");
    std::set<std::string> labels;
    long double kraft = 0.0L;
    for (const auto& c : candidates_) {
        if (!(c.weight >= 1.0)) throw std::invalid_argument("candidate weights must be at least 1");
        if (!labels.insert(c.label).second) throw std::invalid_argument("duplicate candidate label: " + c.label);
        kraft += std::exp(-static_cast<long double>(c.weight));
    }
    if (kraft > 1.0L + 1e-12L) throw std::invalid_argument("candidate weights violate the Kraft condition");
}

namespace {

double psi(double u, double v) {
    const double a = std::sqrt(u);
    const double b = std::sqrt(v);
    const double d = a + b;
    return d > 0.0 ? (a - b) / d : 0.0;
}

// Decides between u and v once T and the threshold are known.
bool u_wins(double T, double threshold, double delta_u, double delta_v, const std::string& label_u,
            const std::string& label_v) {
    if (T > threshold) return true;
    if (T < threshold) return false;
    if (delta_u != delta_v) return delta_u < delta_v;
    return label_u <= label_v;
}

std::vector<double> evaluate(const PiecewiseDensity& f, std::span<const double> points) {
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = f(points[i]);
    return out;
}

}  // namespace

TestOutcome robust_pair_test(std::span<const double> points, const PiecewiseDensity& u, const PiecewiseDensity& v,
                             double delta_u, double delta_v, const std::string& label_u,
                             const std::string& label_v) {
    if (points.empty()) throw std::invalid_argument("empty sample");
    if (hellinger_squared(u, v) == 0.0) throw std::invalid_argument("the two densities coincide");
    TestOutcome r{PairWinner::v, 0.0, 0.5 * (delta_u - delta_v), 0};
    for (double x : points) {
        const double a = u(x);
        const double b = v(x);
        if (a == 0.0 && b == 0.0) ++r.null_points;
        r.statistic += psi(a, b);
    }
    r.winner = u_wins(r.statistic, r.threshold, delta_u, delta_v, label_u, label_v) ? PairWinner::u : PairWinner::v;
    return r;
}

TournamentResult tournament_select(std::span<const double> points, const CandidateSet& cands) {
    if (points.empty()) throw std::invalid_argument("empty sample");
    const std::size_t K = cands.size();
    TournamentResult r;
    r.defeat_radius.assign(K, 0.0);
    if (K == 1) return r;

    std::vector<std::vector<double>> values(K);
    for (std::size_t i = 0; i < K; ++i) values[i] = evaluate(cands[i].density, points);

    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = i + 1; j < K; ++j) {
            const auto& a = cands[i];
            const auto& b = cands[j];
            const double h = hellinger_distance(a.density, b.density);
            double T = 0.0;
            for (std::size_t k = 0; k < points.size(); ++k) T += psi(values[i][k], values[j][k]);
            const double threshold = 0.5 * (a.weight - b.weight);
            // Identical densities carry no evidence: the tie rule decides.
            const bool first = h == 0.0 ? u_wins(0.0, 0.0, a.weight, b.weight, a.label, b.label)
                                        : u_wins(T, threshold, a.weight, b.weight, a.label, b.label);
            const std::size_t winner = first ? i : j;
            const std::size_t loser = first ? j : i;
            r.defeat_radius[loser] = std::max(r.defeat_radius[loser], h);
            r.pairs.push_back({i, j, winner, T, threshold});
        }
    }

    for (std::size_t i = 1; i < K; ++i) {
        const auto& c = cands[i];
        const auto& best = cands[r.index];
        const double ri = r.defeat_radius[i];
        const double rb = r.defeat_radius[r.index];
        if (ri < rb || (ri == rb && (c.weight < best.weight || (c.weight == best.weight && c.label < best.label))))
            r.index = i;
    }
    return r;
}

void write_trace_csv(std::ostream& out, const CandidateSet& cands, const TournamentResult& result) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "record,first,second,winner,statistic,threshold,defeat_radius\n";
    for (const auto& p : result.pairs) {
        out << "pair," << cands[p.first].label << ',' << cands[p.second].label << ',' << cands[p.winner].label << ','
            << p.statistic << ',' << p.threshold << ",\n";
    }
    for (std::size_t i = 0; i < cands.size(); ++i)
        out << "candidate," << cands[i].label << ",,,,," << result.defeat_radius[i] << '\n';
    out << "selected," << cands[result.index].label << ",,,,,\n";
    out.precision(old);
}

namespace {

std::string member_label(std::size_t i, std::size_t total) {
    const std::size_t width = std::to_string(total).size();
    std::string s = std::to_string(i);
    return std::string(width - s.size(), '0') + s;
}

struct Split {
    std::span<const double> first;
    std::span<const double> second;
};

Split split_sample(std::span<const double> sample2n, const WeightedFamily& family, std::size_t cap) {
    if (sample2n.empty() || sample2n.size() % 2 != 0)
        throw std::invalid_argument("hold-out selection needs a nonempty sample of even size");
    if (family.size() > cap) throw std::length_error("family exceeds the tournament candidate cap");
    const std::size_t n = sample2n.size() / 2;
    return {sample2n.subspan(0, n), sample2n.subspan(n)};
}

CandidateSet build_candidates(std::span<const double> first, const WeightedFamily& family) {
    std::vector<Candidate> c;
    c.reserve(family.size());
    const auto members = family.members();
    for (std::size_t i = 0; i < members.size(); ++i)
        c.push_back({histogram(first, members[i].partition), members[i].weight.value(), member_label(i, members.size())});
    return CandidateSet(std::move(c));
}

}  // namespace

HoldoutResult holdout_select(std::span<const double> sample2n, const WeightedFamily& family,
                             std::size_t candidate_cap) {
    const Split sp = split_sample(sample2n, family, candidate_cap);
    const CandidateSet cands = build_candidates(sp.first, family);
    TournamentResult t = tournament_select(sp.second, cands);
    const std::size_t i = t.index;
    return {i, family.members()[i].partition, cands[i].density, std::move(t), false};
}

HoldoutResult baseline_penalized_holdout(std::span<const double> sample2n, const WeightedFamily& family,
                                         std::size_t candidate_cap) {
    const Split sp = split_sample(sample2n, family, candidate_cap);
    const CandidateSet cands = build_candidates(sp.first, family);
    constexpr double minus_inf = -std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    double best_score = minus_inf;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        double ll = 0.0;
        for (double x : sp.second) {
            const double f = cands[i].density(x);
            if (f <= 0.0) {
                ll = minus_inf;
                break;
            }
            ll += std::log(f);
        }
        const double score = ll == minus_inf ? minus_inf : ll - cands[i].weight;
        if (score == minus_inf) continue;
        if (best_score == minus_inf || score > best_score ||
            (score == best_score && cands[i].weight < cands[best].weight)) {
            best = i;
            best_score = score;
        }
    }
    if (best_score == minus_inf) {
        HoldoutResult r = holdout_select(sample2n, family, candidate_cap);
        r.fallback = true;
        return r;
    }
    return {best, family.members()[best].partition, cands[best].density, TournamentResult{}, false};
}

}  // namespace modsel
