#include "modsel/partitions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "modsel/metrics.hpp"

namespace modsel {

namespace {

std::uint64_t checked_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max())
            throw std::overflow_error("binomial coefficient exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

}  // namespace

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::vector<double> breakpoints) : y_(std::move(breakpoints)) {
    if (y_.size() < 2) throw std::invalid_argument("partition needs at least two breakpoints");
    if (y_.front() != 0.0 || y_.back() != 1.0)
        throw std::invalid_argument("partition must start at 0 and end at 1");
    for (std::size_t i = 0; i + 1 < y_.size(); ++i) {
        if (!std::isfinite(y_[i + 1]) || !(y_[i] < y_[i + 1]))
            throw std::invalid_argument("partition breakpoints must be strictly increasing");
    }
}

Partition Partition::trivial() { return Partition({0.0, 1.0}); }

std::size_t Partition::locate(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("point outside [0,1]");
    auto first = y_.begin() + 1;
    auto last = y_.end() - 1;
    return static_cast<std::size_t>(std::upper_bound(first, last, x) - first);
}

std::string Partition::to_line() const {
    std::string out;
    char buf[32];
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (i) out.push_back(',');
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, y_[i]);
        out.append(buf, end);
    }
    return out;
}

Partition Partition::from_line(std::string_view line) {
    std::vector<double> y;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    std::size_t pos = 0;
    while (pos <= line.size()) {
        auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) comma = line.size();
        auto field = line.substr(pos, comma - pos);
        while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front()))) field.remove_prefix(1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || ptr != field.data() + field.size())
            throw std::invalid_argument("malformed partition line");
        y.push_back(v);
        pos = comma + 1;
    }
    return Partition(std::move(y));
}

Partition regular_partition(std::size_t D) {
    std::vector<double> y(D + 2);
    const double cells = static_cast<double>(D + 1);
    for (std::size_t j = 0; j <= D + 1; ++j) y[j] = static_cast<double>(j) / cells;
    y.front() = 0.0;
    y.back() = 1.0;
    return Partition(std::move(y));
}

Partition common_refinement(const Partition& a, const Partition& b) {
    std::vector<double> y;
    y.reserve(a.breakpoints().size() + b.breakpoints().size());
    std::set_union(a.breakpoints().begin(), a.breakpoints().end(), b.breakpoints().begin(),
                   b.breakpoints().end(), std::back_inserter(y));
    return Partition(std::move(y));
}

// ---------------------------------------------------------------------------
// Dyadic structure

std::optional<int> dyadic_resolution(double y) {
    for (int k = 0; k <= 52; ++k) {
        const double s = std::ldexp(y, k);
        if (s == std::floor(s)) return k;
    }
    return std::nullopt;
}

std::optional<int> partition_resolution(const Partition& m) {
    int k = 0;
    for (double y : m.breakpoints()) {
        auto r = dyadic_resolution(y);
        if (!r) return std::nullopt;
        k = std::max(k, *r);
    }
    return k;
}

DyadicIndex::DyadicIndex(int k_, std::size_t D_) : k(k_), D(D_) {
    if (k < 1 || k > 62) throw std::invalid_argument("dyadic resolution k must be in [1, 62]");
    if (D < 1 || D >= (std::size_t{1} << k)) throw std::invalid_argument("need 1 <= D < 2^k");
}

std::uint64_t dyadic_family_size(const DyadicIndex& idx) {
    const std::uint64_t fine = (std::uint64_t{1} << idx.k) - 1;
    const std::uint64_t coarse = (std::uint64_t{1} << (idx.k - 1)) - 1;
    return checked_binomial(fine, idx.D) - checked_binomial(coarse, idx.D);
}

std::vector<Partition> enumerate_dyadic_family(const DyadicIndex& idx, const EnumerationLimits& limits) {
    if (idx.k > limits.max_resolution) throw std::length_error("family too large to enumerate");
    std::uint64_t count = 0;
    try {
        count = dyadic_family_size(idx);
    } catch (const std::overflow_error&) {
        throw std::length_error("family too large to enumerate");
    }
    if (count > limits.max_members) throw std::length_error("family too large to enumerate");

    const std::size_t points = (std::size_t{1} << idx.k) - 1;
    const std::size_t D = idx.D;
    std::vector<Partition> out;
    out.reserve(count);

    // Lexicographic D-combinations of {1, ..., points}.
    std::vector<std::size_t> c(D);
    for (std::size_t i = 0; i < D; ++i) c[i] = i + 1;
    std::vector<double> y(D + 2);
    y.front() = 0.0;
    y.back() = 1.0;
    while (true) {
        bool has_odd = std::any_of(c.begin(), c.end(), [](std::size_t j) { return j % 2 == 1; });
        if (has_odd) {
            for (std::size_t i = 0; i < D; ++i) y[i + 1] = std::ldexp(static_cast<double>(c[i]), -idx.k);
            out.emplace_back(y);
        }
        std::size_t i = D;
        while (i > 0 && c[i - 1] == points - D + i) --i;
        if (i == 0) break;
        ++c[i - 1];
        for (std::size_t t = i; t < D; ++t) c[t] = c[t - 1] + 1;
    }
    return out;
}

Partition regular_dyadic_partition(int k) {
    if (k < 0 || k > 30) throw std::invalid_argument("regular dyadic resolution out of range");
    return regular_partition((std::size_t{1} << k) - 1);
}

bool is_regular_dyadic(const Partition& m) {
    const std::size_t cells = m.size();
    if (!is_power_of_two(cells)) return false;
    const auto y = m.breakpoints();
    const double step = 1.0 / static_cast<double>(cells);
    for (std::size_t j = 0; j < y.size(); ++j)
        if (y[j] != static_cast<double>(j) * step) return false;
    return true;
}

namespace {

bool tree_check(std::span<const double> interior, double a, double b) {
    if (interior.empty()) return true;
    const double mid = 0.5 * (a + b);
    auto it = std::lower_bound(interior.begin(), interior.end(), mid);
    if (it == interior.end() || *it != mid) return false;
    const auto k = static_cast<std::size_t>(it - interior.begin());
    return tree_check(interior.subspan(0, k), a, mid) && tree_check(interior.subspan(k + 1), mid, b);
}

void gen_trees(double a, double b, std::size_t leaves, std::vector<std::vector<double>>& out) {
    if (leaves == 1) {
        out.emplace_back();
        return;
    }
    const double mid = 0.5 * (a + b);
    for (std::size_t l = 1; l < leaves; ++l) {
        std::vector<std::vector<double>> lhs, rhs;
        gen_trees(a, mid, l, lhs);
        gen_trees(mid, b, leaves - l, rhs);
        for (const auto& p : lhs) {
            for (const auto& q : rhs) {
                std::vector<double> v = p;
                v.push_back(mid);
                v.insert(v.end(), q.begin(), q.end());
                out.push_back(std::move(v));
            }
        }
    }
}

}  // namespace

bool is_tree_partition(const Partition& m) {
    auto y = m.breakpoints();
    return tree_check(y.subspan(1, y.size() - 2), 0.0, 1.0);
}

std::uint64_t count_complete_binary_trees(std::size_t leaves) {
    if (leaves < 1 || leaves > 31) throw std::out_of_range("leaf count must be in [1, 31]");
    unsigned __int128 c = 1;  // Catalan(0)
    for (std::size_t n = 0; n + 1 < leaves; ++n) c = c * 2 * (2 * n + 1) / (n + 2);
    return static_cast<std::uint64_t>(c);
}

std::vector<Partition> enumerate_tree_partitions(std::size_t max_leaves, std::uint64_t max_members) {
    if (max_leaves < 1) throw std::invalid_argument("max_leaves must be positive");
    if (max_leaves > 31) throw std::length_error("family too large to enumerate");
    std::uint64_t total = 0;
    for (std::size_t l = 1; l <= max_leaves; ++l) total += count_complete_binary_trees(l);
    if (total > max_members) throw std::length_error("family too large to enumerate");

    std::vector<Partition> out;
    out.reserve(total);
    for (std::size_t l = 1; l <= max_leaves; ++l) {
        std::vector<std::vector<double>> interiors;
        gen_trees(0.0, 1.0, l, interiors);
        for (auto& in : interiors) {
            std::vector<double> y;
            y.reserve(in.size() + 2);
            y.push_back(0.0);
            y.insert(y.end(), in.begin(), in.end());
            y.push_back(1.0);
            out.emplace_back(std::move(y));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adaptive approximation

double local_error(std::span<const double> f, double a, double b, LocalError kind) {
    if (f.empty()) throw std::invalid_argument("empty grid");
    if (!(0.0 <= a && a < b && b <= 1.0)) throw std::invalid_argument("interval outside [0,1]");
    const double N = static_cast<double>(f.size());
    const auto first = static_cast<std::size_t>(std::floor(a * N));
    const auto last = std::min(f.size() - 1, static_cast<std::size_t>(std::ceil(b * N)) - 1);

    auto value = [&](std::size_t i) {
        return kind == LocalError::sqrt_l2_constant ? std::sqrt(std::max(f[i], 0.0)) : f[i];
    };
    auto overlap_len = [&](std::size_t i) {
        const double lo = std::max(a, static_cast<double>(i) / N);
        const double hi = std::min(b, static_cast<double>(i + 1) / N);
        return std::max(0.0, hi - lo);
    };
    double mass = 0.0;
    for (std::size_t i = first; i <= last; ++i) mass += overlap_len(i) * value(i);
    const double mean = mass / (b - a);
    double err = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        const double d = value(i) - mean;
        err += overlap_len(i) * d * d;
    }
    return err;
}

AdaptiveResult adaptive_partition(std::span<const double> f, LocalError kind, double epsilon,
                                  std::size_t max_leaves) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (max_leaves < 1) throw std::invalid_argument("max_leaves must be positive");
    if (std::any_of(f.begin(), f.end(), [](double v) { return !std::isfinite(v); }))
        throw std::invalid_argument("target function must be finite");

    std::vector<TreeNode> tree;
    tree.push_back(TreeNode{0.0, 1.0, 0, -1, -1, local_error(f, 0.0, 1.0, kind)});
    std::vector<int> leaves{0};  // left-to-right
    bool converged = false;

    while (true) {
        std::size_t worst = leaves.size();
        double worst_err = epsilon;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (tree[leaves[i]].error > worst_err) {
                worst_err = tree[leaves[i]].error;
                worst = i;
            }
        }
        if (worst == leaves.size()) {
            converged = true;
            break;
        }
        if (leaves.size() >= max_leaves) break;

        const int parent = leaves[worst];
        const double a = tree[parent].a;
        const double b = tree[parent].b;
        const double mid = 0.5 * (a + b);
        const int depth = tree[parent].depth + 1;
        const int l = static_cast<int>(tree.size());
        tree.push_back(TreeNode{a, mid, depth, -1, -1, local_error(f, a, mid, kind)});
        tree.push_back(TreeNode{mid, b, depth, -1, -1, local_error(f, mid, b, kind)});
        tree[parent].left = l;
        tree[parent].right = l + 1;
        leaves[worst] = l;
        leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(worst) + 1, l + 1);
    }

    std::vector<double> y;
    y.reserve(leaves.size() + 1);
    for (int id : leaves) y.push_back(tree[id].a);
    y.push_back(1.0);
    return AdaptiveResult{Partition(std::move(y)), std::move(tree), converged};
}

bool is_complete_tree(const std::vector<TreeNode>& tree) {
    if (tree.empty() || tree[0].a != 0.0 || tree[0].b != 1.0) return false;
    std::vector<int> parents(tree.size(), 0);
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& n = tree[i];
        if ((n.left < 0) != (n.right < 0)) return false;
        if (n.is_leaf()) continue;
        const auto sz = static_cast<int>(tree.size());
        if (n.left >= sz || n.right >= sz) return false;
        const auto& l = tree[n.left];
        const auto& r = tree[n.right];
        const double mid = 0.5 * (n.a + n.b);
        if (l.a != n.a || l.b != mid || r.a != mid || r.b != n.b) return false;
        if (l.depth != n.depth + 1 || r.depth != n.depth + 1) return false;
        ++parents[n.left];
        ++parents[n.right];
    }
    if (parents[0] != 0) return false;
    return std::all_of(parents.begin() + 1, parents.end(), [](int p) { return p == 1; });
}

// ---------------------------------------------------------------------------
// Weights

double Weight::value() const noexcept {
    return constant + static_cast<double>(log2_multiple) * std::numbers::ln2;
}

long double Weight::prior_mass() const noexcept {
    return std::exp(-static_cast<long double>(constant)) *
           std::ldexp(1.0L, -static_cast<int>(std::clamp<std::int64_t>(log2_multiple, -16000, 16000)));
}

WeightedFamily::WeightedFamily(std::string label, std::vector<WeightedPartition> members)
    : label_(std::move(label)), members_(std::move(members)), kraft_(0.0L) {
    if (members_.empty()) throw std::invalid_argument("weighted family must not be empty");
    for (const auto& m : members_) {
        if (!(m.weight.value() > 0.0)) throw std::invalid_argument("weights must be positive");
        kraft_ += m.weight.prior_mass();
    }
    if (kraft_ > 1.0L) throw std::invalid_argument("Kraft condition violated: sum exp(-weight) > 1");
}

bool WeightedFamily::all_weights_at_least_one() const noexcept {
    return std::all_of(members_.begin(), members_.end(),
                       [](const WeightedPartition& m) { return m.weight.value() >= 1.0; });
}

nlohmann::json WeightedFamily::to_json() const {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : members_) {
        members.push_back({{"partition", m.partition.to_line()},
                           {"weight_constant", m.weight.constant},
                           {"weight_log2_multiple", m.weight.log2_multiple},
                           {"weight", m.weight.value()}});
    }
    return {{"label", label_}, {"members", members}, {"kraft_sum", static_cast<double>(kraft_)}};
}

WeightedFamily WeightedFamily::from_json(const nlohmann::json& j) {
    std::vector<WeightedPartition> members;
    for (const auto& m : j.at("members")) {
        members.push_back({Partition::from_line(m.at("partition").get<std::string>()),
                           Weight{m.at("weight_constant").get<double>(),
                                  m.at("weight_log2_multiple").get<std::int64_t>()}});
    }
    return WeightedFamily(j.at("label").get<std::string>(), std::move(members));
}

long double kraft_sum(const WeightedFamily& family) { return family.kraft_sum(); }

WeightScheme parse_weight_scheme(std::string_view name) {
    if (name == "ordered-nested") return WeightScheme::ordered_nested;
    if (name == "dyadic-default") return WeightScheme::dyadic_default;
    if (name == "regular-bonus") return WeightScheme::regular_bonus;
    if (name == "tree-bonus") return WeightScheme::tree_bonus;
    if (name == "mixed") return WeightScheme::mixed;
    throw std::invalid_argument("unknown weight scheme: " + std::string(name));
}

std::string_view to_string(WeightScheme scheme) {
    switch (scheme) {
        case WeightScheme::ordered_nested: return "ordered-nested";
        case WeightScheme::dyadic_default: return "dyadic-default";
        case WeightScheme::regular_bonus: return "regular-bonus";
        case WeightScheme::tree_bonus: return "tree-bonus";
        case WeightScheme::mixed: return "mixed";
    }
    return "?";
}

namespace {

Weight dyadic_default_weight(const Partition& m) {
    if (m.size() == 1) return Weight::of(1.0);
    auto k = partition_resolution(m);
    if (!k) throw std::invalid_argument("non-dyadic partition under a dyadic weight scheme");
    const auto D = static_cast<std::int64_t>(m.size() - 1);
    return Weight::log2_times((*k + 1) * (D + 1) + 1);
}

}  // namespace

Weight scheme_weight(const Partition& m, WeightScheme scheme) {
    const auto cells = static_cast<double>(m.size());
    switch (scheme) {
        case WeightScheme::ordered_nested:
            return Weight::of(cells);
        case WeightScheme::dyadic_default:
            return dyadic_default_weight(m);
        case WeightScheme::regular_bonus:
            if (!is_regular_dyadic(m)) throw std::invalid_argument("regular-bonus needs regular dyadic partitions");
            return Weight::of(cells);
        case WeightScheme::tree_bonus:
            if (!is_tree_partition(m)) throw std::invalid_argument("tree-bonus needs tree partitions");
            return Weight::of(2.0 * cells);
        case WeightScheme::mixed:
            if (is_regular_dyadic(m)) return Weight::of(cells);
            if (is_tree_partition(m)) return Weight::of(2.0 * cells);
            return dyadic_default_weight(m);
    }
    throw std::invalid_argument("unknown weight scheme");
}

WeightedFamily assign_weights(std::span<const Partition> family, WeightScheme scheme, std::string label) {
    if (scheme == WeightScheme::ordered_nested) {
        std::set<std::size_t> seen;
        for (const auto& m : family)
            if (!seen.insert(m.size()).second)
                throw std::invalid_argument("ordered-nested weights need distinct interval counts");
    }
    std::vector<WeightedPartition> members;
    members.reserve(family.size());
    for (const auto& m : family) members.push_back({m, scheme_weight(m, scheme)});
    if (label.empty()) label = std::string(to_string(scheme));
    return WeightedFamily(std::move(label), std::move(members));
}

// ---------------------------------------------------------------------------
// Complexity index

ComplexityReport complexity_index(std::span<const double> metric_dims) {
    ComplexityReport rep{0.0, {}, {}, 0.0L};
    std::vector<int> bucket(metric_dims.size());
    for (std::size_t i = 0; i < metric_dims.size(); ++i) {
        const double d = metric_dims[i];
        if (!std::isfinite(d) || d < 0.5) throw std::invalid_argument("metric dimension bounds must be >= 1/2");
        bucket[i] = static_cast<int>(std::floor(2.0 * d));
        ++rep.census[bucket[i]];
    }
    auto log_plus = [](double h) { return h >= 1.0 ? std::log(h) : 0.0; };
    for (const auto& [j, h] : rep.census)
        rep.index = std::max(rep.index, log_plus(static_cast<double>(h)) / j);
    rep.canonical_weights.resize(metric_dims.size());
    for (std::size_t i = 0; i < metric_dims.size(); ++i) {
        const int j = bucket[i];
        rep.canonical_weights[i] = 0.5 * (j + 1) + log_plus(static_cast<double>(rep.census[j]));
        rep.canonical_kraft_sum += std::exp(-static_cast<long double>(rep.canonical_weights[i]));
    }
    return rep;
}

ComplexityReport complexity_index(const WeightedFamily& family) {
    std::vector<double> dims;
    dims.reserve(family.size());
    for (const auto& m : family.members()) dims.push_back(0.5 * static_cast<double>(m.partition.size()));
    return complexity_index(dims);
}

double complexity_index_from_census(const std::map<int, double>& census) {
    double index = 0.0;
    for (const auto& [j, h] : census) {
        if (j < 1) throw std::invalid_argument("census buckets start at j = 1");
        if (!std::isfinite(h))
            throw std::domain_error("H(j) is infinite: family is not enumerable, use scheme-based weights");
        if (h >= 1.0) index = std::max(index, std::log(h) / j);
    }
    return index;
}

}  // namespace modsel
