#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "common.hpp"
#include "modsel/histograms.hpp"
#include "modsel/lowerbounds.hpp"
#include "modsel/partitions.hpp"

namespace modsel::exp {

std::string fmt(double v) { return format_double(v); }

namespace {

constexpr double exact_tol = 1e-12;

// Weighted family over the given partitions; returns its Kraft sum.
long double kraft_of(std::span<const Partition> family, WeightScheme scheme) {
    return assign_weights(family, scheme).kraft_sum();
}

void tight_example(Rows& rows, std::size_t n) {
    for (std::size_t D : {2u, 4u, 8u}) {
        const double alpha = 1.0 / (2.0 * static_cast<double>(D));
        std::vector<double> y;
        for (std::size_t j = 0; j <= D; ++j) y.push_back(alpha * static_cast<double>(j));
        y.push_back(1.0);
        const Partition m(y);
        const double edge = alpha * static_cast<double>(D);
        const GridDensity s = GridDensity::tabulate([&](double x) { return x < edge ? 1.0 / edge : 0.0; });
        const double value = stochastic_error_exact(s, m, n);
        const double sup = l2_projection(s, m).sup_norm();
        const double Dd = static_cast<double>(D);
        const double nd = static_cast<double>(n);
        rows.add(Gate::exact(rows.value("tight-example", n, "alpha=1/(2D)", Dd, value, (Dd - 1.0) / (alpha * Dd * nd)),
                             exact_tol));
        rows.add(Gate::exact(rows.value("tight-example-sup", n, "alpha=1/(2D)", Dd, value, (Dd - 1.0) * sup / nd),
                             exact_tol));
        rows.add(Gate::below(rows.value("tight-example-vs-D-sup", n, "alpha=1/(2D)", Dd, value, Dd * sup / nd)));
    }
}

void uniform_regular(Rows& rows, std::size_t n) {
    const GridDensity u = GridDensity::uniform();
    for (std::size_t D : {1u, 3u, 7u, 15u}) {
        const double value = stochastic_error_exact(u, regular_partition(D), n);
        rows.add(Gate::exact(rows.value("uniform-regular", n, "regular", static_cast<double>(D), value,
                                        static_cast<double>(D) / static_cast<double>(n)),
                             exact_tol));
    }
}

void hypercube(Rows& rows) {
    struct Case {
        std::size_t D;
        double L;
        std::size_t n;
    };
    for (const Case c : {Case{1, 1.0, 1}, Case{2, 4.0, 8}, Case{8, 16.0, 64}}) {
        const AssouadFamily fam(c.D, c.L, c.n);
        const std::string model = "D=" + std::to_string(c.D) + ",L=" + fmt(c.L);
        const double nd = static_cast<double>(c.n);
        const double Dd = static_cast<double>(c.D);
        const double target = c.L / (4.0 * nd);

        rows.add(Gate::exact(rows.value("bump-norm-closed", c.n, model, Dd, fam.bump_norm_squared(), target), exact_tol));

        HammingIndex zero(c.D, false);
        HammingIndex first(c.D, false);
        first[0] = true;
        const auto f = fam.member(zero);
        const auto fg = fam.member(first);
        rows.add(Gate::exact(rows.value("bump-norm-quadrature", c.n, model, Dd, l2_distance_squared(f, fg), target),
                             exact_tol));

        const double h2 = hellinger_squared(f, fg);
        rows.add(Gate::exact(
            rows.value("bump-hellinger-quadrature", c.n, model, Dd, h2, fam.bump_hellinger_squared()), exact_tol));
        rows.add(Gate{0.0}.at_most(rows.value("bump-hellinger-cap", c.n, model, Dd, h2, 1.0 / (6.0 * nd))));

        // Every vertex pair: density-level distance against the Hamming form.
        const auto verts = fam.vertices();
        std::vector<PiecewiseDensity> members;
        members.reserve(verts.size());
        for (const auto& v : verts) members.push_back(fam.member(v));
        double worst = 0.0;
        for (std::size_t i = 0; i < verts.size(); ++i)
            for (std::size_t j = i + 1; j < verts.size(); ++j)
                worst = std::max(worst, std::abs(l2_distance_squared(members[i], members[j]) -
                                                 fam.isometry_distance_squared(verts[i], verts[j])));
        rows.add(Gate::exact(rows.value("isometry-max-error", c.n, model, Dd, worst, 0.0), exact_tol));

        // The largest member height is 1 + L.
        double sup = 0.0;
        for (const auto& m : members) sup = std::max(sup, m.sup_norm());
        rows.add(Gate::exact(rows.value("member-sup-norm", c.n, model, Dd, sup, 1.0 + c.L), exact_tol));
    }

    // Floor constant (LD/32n)(1 - √11/6) against 0.0139 DL/n, and the
    // affinity power (1 - 1/(6n))^{2n} ≥ 25/36.
    for (std::size_t n : {1u, 8u, 64u, 1000u}) {
        const double floor = l2_minimax_floor(8, 16.0, n);
        const double scale = 8.0 * 16.0 / static_cast<double>(n);
        rows.add(Gate::not_below(rows.value("minimax-floor", n, "D=8,L=16", 8.0, floor, 0.0139 * scale)));
        const double r = std::pow(1.0 - 1.0 / (6.0 * static_cast<double>(n)), 2.0 * static_cast<double>(n));
        rows.add(Gate::not_below(rows.value("affinity-power", n, "rho=1-1/(6n)", 0.0, r, 25.0 / 36.0)));
    }
}

void kraft_sums(Rows& rows) {
    // Regular partitions with Δ = |m| = 2^k.
    std::vector<Partition> regular;
    long double series = 0.0L;
    for (int k = 0; k <= 12; ++k) {
        regular.push_back(regular_dyadic_partition(k));
        series += std::exp(-std::ldexp(1.0L, k));
    }
    const double reg = static_cast<double>(kraft_of(regular, WeightScheme::regular_bonus));
    rows.add(Gate::exact(rows.value("kraft-regular", 0, "k<=12", 12.0, reg, static_cast<double>(series)), exact_tol));
    rows.add(Gate::below(rows.value("kraft-regular-bound", 0, "k<=12", 12.0, reg, 0.522)));

    // Tree partitions with Δ = 2|m|: enumerated family against the Catalan series.
    constexpr std::size_t max_leaves = 12;
    const auto trees = enumerate_tree_partitions(max_leaves);
    long double catalan = 0.0L;
    for (std::size_t leaves = 1; leaves <= max_leaves; ++leaves)
        catalan += static_cast<long double>(count_complete_binary_trees(leaves)) *
                   std::exp(-2.0L * static_cast<long double>(leaves));
    const double tree = static_cast<double>(kraft_of(trees, WeightScheme::tree_bonus));
    rows.add(Gate::exact(rows.value("kraft-tree", 0, "leaves<=12", 12.0, tree, static_cast<double>(catalan)),
                         exact_tol));

    // Full series: Σ_j C_j x^{j+1} = (1 - √(1-4x))/2 and Σ_j 4^j x^{j+1}/(j+1) = -log(1-4x)/4, x = e^{-2}.
    const double x = std::exp(-2.0);
    const double catalan_closed = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * x));
    const double bound_closed = -std::log1p(-4.0 * x) / 4.0;
    long double bound_series = 0.0L;
    for (int j = 0; j < 400; ++j)
        bound_series += std::pow(4.0L, j) * std::exp(-2.0L * (j + 1)) / static_cast<long double>(j + 1);
    rows.add(Gate::below(rows.value("kraft-tree-partial-vs-full", 0, "leaves<=12", 12.0, tree, catalan_closed)));
    rows.add(Gate::not_below(rows.value("kraft-tree-stirling-dominates", 0, "all", 0.0, bound_closed, catalan_closed)));
    rows.add(Gate::exact(
        rows.value("kraft-tree-stirling-series", 0, "all", 0.0, static_cast<double>(bound_series), bound_closed),
        exact_tol));
    rows.add(Gate::below(rows.value("kraft-tree-bound", 0, "all", 0.0, bound_closed, 0.25)));

    // Dyadic default weights over M_{D,k}, k ≤ 4, without m_0.
    std::vector<Partition> dyadic;
    long double expected = 0.0L;
    for (int k = 1; k <= 4; ++k) {
        for (std::size_t D = 1; D < (std::size_t{1} << k); ++D) {
            auto fam = enumerate_dyadic_family(DyadicIndex(k, D));
            dyadic.insert(dyadic.end(), fam.begin(), fam.end());
            expected += static_cast<long double>(dyadic_family_size(DyadicIndex(k, D))) *
                        std::ldexp(1.0L, -static_cast<int>((k + 1) * (D + 1) + 1));
        }
    }
    const double dy = static_cast<double>(kraft_of(dyadic, WeightScheme::dyadic_default));
    rows.add(Gate::exact(rows.value("kraft-dyadic", 0, "k<=4", 4.0, dy, static_cast<double>(expected)), exact_tol));
    rows.add(Gate{0.0}.at_most(rows.value("kraft-dyadic-bound", 0, "k<=4", 4.0, dy, 0.25)));

    // Mixed scheme over the union of the three families.
    std::vector<Partition> mixed;
    std::set<std::vector<double>> seen;
    auto insert = [&](const Partition& m) {
        const auto b = m.breakpoints();
        if (seen.emplace(b.begin(), b.end()).second) mixed.push_back(m);
    };
    insert(Partition::trivial());
    for (const auto& m : dyadic) insert(m);
    for (const auto& m : trees) insert(m);
    for (const auto& m : regular) insert(m);
    const double mx = static_cast<double>(kraft_of(mixed, WeightScheme::mixed));
    rows.add(Gate{0.0}.at_most(rows.value("kraft-mixed", 0, "dyadic k<=4 + trees + regular", 0.0, mx, 1.0)));
}

}  // namespace

RiskReport exact_formulas(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    for (std::size_t n : cfg.n_grid) {
        tight_example(rows, n);
        uniform_regular(rows, n);
    }
    hypercube(rows);
    kraft_sums(rows);
    return rows.finish();
}

// ---------------------------------------------------------------------------

namespace {

PiecewiseDensity random_step_density(Rng& rng) {
    std::uniform_int_distribution<int> cells(1, 12);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    const int k = cells(rng);
    std::vector<double> y{0.0, 1.0};
    while (static_cast<int>(y.size()) < k + 1) {
        const double b = unif(rng);
        if (b > 0.0 && std::find(y.begin(), y.end(), b) == y.end()) y.push_back(b);
    }
    std::sort(y.begin(), y.end());
    std::vector<double> h(static_cast<std::size_t>(k));
    double mass = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
        h[j] = unif(rng) < 0.2 ? 0.0 : expo(rng);
        mass += h[j] * (y[j + 1] - y[j]);
    }
    if (mass == 0.0) {
        h.assign(h.size(), 1.0);
        mass = 1.0;
    }
    for (double& v : h) v /= mass;
    return PiecewiseDensity(Partition(std::move(y)), std::move(h));
}

// ρ of the n-fold products, summed cell by cell over the product grid.
double product_affinity(const PiecewiseDensity& f, const PiecewiseDensity& g, int n) {
    std::vector<double> len;
    std::vector<double> root;
    for_each_common_cell(f.step(), g.step(), [&](double l, double a, double b) {
        len.push_back(l);
        root.push_back(std::sqrt(a * b));
    });
    const std::size_t K = len.size();
    double total = 0.0;
    if (n == 2) {
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j) total += len[i] * len[j] * root[i] * root[j];
    } else {
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j)
                for (std::size_t k = 0; k < K; ++k) total += len[i] * len[j] * len[k] * root[i] * root[j] * root[k];
    }
    return total;
}

// Trapezoid rule for ∫ sqrt(φ_u φ_v) over a box, step σ/4.
double gaussian_affinity_quadrature(std::span<const double> u, std::span<const double> v, double sigma) {
    const std::size_t d = u.size();
    const double h = sigma / 4.0;
    std::vector<std::vector<double>> axis(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double lo = std::min(u[k], v[k]) - 12.0 * sigma;
        const double hi = std::max(u[k], v[k]) + 12.0 * sigma;
        const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / h));
        for (std::size_t i = 0; i <= steps; ++i) {
            const double x = lo + h * static_cast<double>(i);
            const double a = (x - u[k]) / sigma;
            const double b = (x - v[k]) / sigma;
            const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
            axis[k].push_back(w * h * std::exp(-0.25 * (a * a + b * b)) / (sigma * std::sqrt(2.0 * std::numbers::pi)));
        }
    }
    if (d == 1) {
        double s = 0.0;
        for (double t : axis[0]) s += t;
        return s;
    }
    double s = 0.0;
    for (double a : axis[0])
        for (double b : axis[1]) s += a * b;
    return s;
}

}  // namespace

RiskReport distance_identities(const ExperimentConfig& cfg) {
    Rows rows(cfg);
    const auto cases = param<std::size_t>(cfg, "cases", 120);
    const double tol = param<double>(cfg, "tolerance", 1e-8);
    const std::uint64_t seed = rows.next_seed();

    struct Errors {
        double hell = 0, ropi_upper = 0, ropi_lower = 0, tensor2 = 0, tensor3 = 0, gauss1 = 0, gauss2 = 0;
    };
    const auto errs = replicate(cases, seed, [&](Rng& rng, std::size_t i) {
        Errors e;
        const auto f = random_step_density(rng);
        const auto g = random_step_density(rng);
        const double rho = affinity_value(f.step(), g.step());
        e.hell = std::abs(hellinger_squared(f, g) - (1.0 - rho));
        const double ov = overlap(f, g);
        // Violation amounts (0 when the sandwich holds).
        e.ropi_upper = std::max(0.0, ov - rho);
        e.ropi_lower = std::max(0.0, 1.0 - std::sqrt(std::max(0.0, 1.0 - rho * rho)) - ov);
        const Affinity a(rho);
        e.tensor2 = std::abs(product_affinity(f, g, 2) - affinity_tensor_power(a, 2).value());
        e.tensor3 = std::abs(product_affinity(f, g, 3) - affinity_tensor_power(a, 3).value());

        std::normal_distribution<double> nd(0.0, 1.0);
        std::uniform_real_distribution<double> sd(0.3, 3.0);
        const double sigma = sd(rng);
        const std::size_t d = 1 + i % 2;
        std::vector<double> u(d), v(d);
        for (std::size_t k = 0; k < d; ++k) {
            u[k] = 2.0 * sigma * nd(rng);
            v[k] = 2.0 * sigma * nd(rng);
        }
        const double err = std::abs(gaussian_affinity_quadrature(u, v, sigma) - gaussian_affinity(u, v, sigma).value());
        (d == 1 ? e.gauss1 : e.gauss2) = err;
        return e;
    });

    auto worst = [&](double Errors::*field) {
        double w = 0.0;
        for (const auto& e : errs) w = std::max(w, e.*field);
        return w;
    };
    auto add = [&](const char* scenario, double value, std::size_t count) {
        ReportRow r = rows.make(scenario, count, "max-abs-error", 0.0, value, 0.0, 0.0, count, seed);
        r = Gate::exact(r, tol);
        rows.add(r);
    };
    add("h2-equals-1-minus-rho", worst(&Errors::hell), cases);
    add("overlap-below-rho", worst(&Errors::ropi_upper), cases);
    add("overlap-above-1-sqrt(1-rho^2)", worst(&Errors::ropi_lower), cases);
    add("tensorization-n2", worst(&Errors::tensor2), cases);
    add("tensorization-n3", worst(&Errors::tensor3), cases);
    add("gaussian-affinity-d1", worst(&Errors::gauss1), (cases + 1) / 2);
    add("gaussian-affinity-d2", worst(&Errors::gauss2), cases / 2);
    return rows.finish();
}

}  // namespace modsel::exp
