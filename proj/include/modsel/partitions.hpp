#pragma once

// Interval partitions of [0,1], the dyadic / regular / tree families built
// on them, their weight schemes and the Kraft check Σ exp(-Δ_m) ≤ 1.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace modsel {

/// Ordered breakpoints 0 = y_0 < y_1 < ... < y_{D+1} = 1.
///
/// Interval j is [y_j, y_{j+1}) except the last one, which is closed.
class Partition {
public:
    explicit Partition(std::vector<double> breakpoints);

    /// The one-interval partition {[0,1]}.
    static Partition trivial();

    /// Number of intervals |m| = D + 1.
    std::size_t size() const noexcept { return y_.size() - 1; }
    std::size_t interior_count() const noexcept { return y_.size() - 2; }

    double left(std::size_t j) const { return y_[j]; }
    double right(std::size_t j) const { return y_[j + 1]; }
    double length(std::size_t j) const { return y_[j + 1] - y_[j]; }

    std::span<const double> breakpoints() const noexcept { return y_; }

    /// Index of the interval containing x, x in [0,1].
    std::size_t locate(double x) const;

    /// "0,y_1,...,1" with round-trip precision.
    std::string to_line() const;
    static Partition from_line(std::string_view line);

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<double> y_;
};

/// D + 1 equal intervals; D = 0 gives the trivial partition.
Partition regular_partition(std::size_t D);

/// Union of breakpoints of both partitions.
Partition common_refinement(const Partition& a, const Partition& b);

// ---------------------------------------------------------------------------
// Dyadic structure

/// Smallest k with y * 2^k integral, or nullopt if none with k ≤ 52.
std::optional<int> dyadic_resolution(double y);

/// Smallest k such that every breakpoint lies in J_k = {j 2^-k}; nullopt when
/// some breakpoint is not dyadic.
std::optional<int> partition_resolution(const Partition& m);

/// Resolution k ≥ 1 and interior point count D with 1 ≤ D < 2^k.
struct DyadicIndex {
    int k;
    std::size_t D;

    DyadicIndex(int k, std::size_t D);
};

struct EnumerationLimits {
    int max_resolution = 12;             // 2^k ≤ 2^12
    std::uint64_t max_members = 2'000'000;
};

/// All members of M_{D,k}: D interior points in J_k, at least one of them
/// outside J_{k-1}. Lexicographic order of interior points.
std::vector<Partition> enumerate_dyadic_family(const DyadicIndex& idx,
                                               const EnumerationLimits& limits = {});

/// |M_{D,k}| = C(2^k - 1, D) - C(2^{k-1} - 1, D), computed without enumerating.
std::uint64_t dyadic_family_size(const DyadicIndex& idx);

/// m_k: the regular partition with 2^k intervals (member of M_R).
Partition regular_dyadic_partition(int k);

/// True when m is regular with 2^k intervals for some k ≥ 0.
bool is_regular_dyadic(const Partition& m);

/// True when m is the leaf set of a complete binary tree of midpoint splits
/// rooted at [0,1] (membership in M_T).
bool is_tree_partition(const Partition& m);

/// Every tree partition with 1..max_leaves intervals, ordered by leaf count.
std::vector<Partition> enumerate_tree_partitions(std::size_t max_leaves,
                                                 std::uint64_t max_members = 2'000'000);

/// Catalan(leaves - 1): complete binary trees with the given leaf count.
/// Exact for leaves ≤ 31.
std::uint64_t count_complete_binary_trees(std::size_t leaves);

// ---------------------------------------------------------------------------
// Adaptive approximation

enum class LocalError {
    l2_constant,       ///< ∫_I (f - mean_I f)^2
    sqrt_l2_constant,  ///< same functional applied to sqrt(max(f, 0))
};

struct TreeNode {
    double a;
    double b;
    int depth;
    int left = -1;   // child indices, -1 for leaves
    int right = -1;
    double error = 0.0;

    bool is_leaf() const noexcept { return left < 0; }
};

struct AdaptiveResult {
    Partition partition;
    std::vector<TreeNode> tree;  // node 0 is [0,1]
    bool converged;
};

/// Local error of the step function given by `grid_values` (uniform grid on
/// [0,1]) over the interval [a, b].
double local_error(std::span<const double> grid_values, double a, double b,
                   LocalError kind = LocalError::l2_constant);

/// Greedy midpoint splitting: while some leaf has error > epsilon, split the
/// leaf with the largest error (leftmost on ties). Stops unconverged once
/// max_leaves is reached.
AdaptiveResult adaptive_partition(std::span<const double> grid_values, LocalError kind,
                                  double epsilon, std::size_t max_leaves);

/// Every internal node has exactly two children and the children split the
/// parent at its midpoint.
bool is_complete_tree(const std::vector<TreeNode>& tree);

// ---------------------------------------------------------------------------
// Weights

/// Δ = constant + log2_multiple · log 2, kept in this form so that the prior
/// mass exp(-Δ) of dyadic weights is an exact power of two.
struct Weight {
    double constant = 0.0;
    std::int64_t log2_multiple = 0;

    double value() const noexcept;
    long double prior_mass() const noexcept;

    static Weight of(double v) { return Weight{v, 0}; }
    static Weight log2_times(std::int64_t c) { return Weight{0.0, c}; }
};

struct WeightedPartition {
    Partition partition;
    Weight weight;
};

/// Finite family of partitions with weights satisfying Σ exp(-Δ_m) ≤ 1.
class WeightedFamily {
public:
    WeightedFamily(std::string label, std::vector<WeightedPartition> members);

    const std::string& label() const noexcept { return label_; }
    std::span<const WeightedPartition> members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }

    /// Extended-precision Σ exp(-Δ_m).
    long double kraft_sum() const noexcept { return kraft_; }

    /// Additional hold-out requirement Δ_m ≥ 1 for every member.
    bool all_weights_at_least_one() const noexcept;

    nlohmann::json to_json() const;
    static WeightedFamily from_json(const nlohmann::json& j);

private:
    std::string label_;
    std::vector<WeightedPartition> members_;
    long double kraft_;
};

long double kraft_sum(const WeightedFamily& family);

enum class WeightScheme {
    ordered_nested,  ///< Δ = |m|; interval counts must be distinct
    dyadic_default,  ///< Δ_{m_0} = 1, Δ = [(k+1)(D+1)+1] log 2 on M_{D,k}
    regular_bonus,   ///< Δ = |m| on M_R
    tree_bonus,      ///< Δ = 2|m| on M_T
    mixed,           ///< |m| on M_R, 2|m| on M_T \ M_R, dyadic default elsewhere
};

WeightScheme parse_weight_scheme(std::string_view name);
std::string_view to_string(WeightScheme scheme);

/// Weight of one partition under a scheme; throws when the partition cannot be
/// classified (e.g. non-dyadic breakpoints under a dyadic scheme).
Weight scheme_weight(const Partition& m, WeightScheme scheme);

WeightedFamily assign_weights(std::span<const Partition> family, WeightScheme scheme,
                              std::string label = {});

// ---------------------------------------------------------------------------
// Complexity index

struct ComplexityReport {
    double index;                           // sup_j j^-1 log_+ H(j)
    std::map<int, std::uint64_t> census;    // j -> H(j)
    std::vector<double> canonical_weights;  // (j+1)/2 + log_+ H(j), per member
    long double canonical_kraft_sum;
};

/// From per-member metric dimension bounds (each ≥ 1/2).
ComplexityReport complexity_index(std::span<const double> metric_dims);

/// Partitions carry D̄_m = |m| / 2.
ComplexityReport complexity_index(const WeightedFamily& family);

/// Census form; a non-finite count means a non-enumerable family and throws.
double complexity_index_from_census(const std::map<int, double>& census);

}  // namespace modsel
