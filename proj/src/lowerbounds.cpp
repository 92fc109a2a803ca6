#include "modsel/lowerbounds.hpp"

#include <cmath>
#include <stdexcept>

#include "modsel/histograms.hpp"

namespace modsel {

std::size_t hamming_distance(const HammingIndex& a, const HammingIndex& b) {
    if (a.size() != b.size()) throw std::invalid_argument("Hamming indices of different lengths");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

namespace {

Partition assouad_partition(std::size_t D, double theta) {
    std::vector<double> y;
    y.reserve(2 * D + 1);
    const double w = 1.0 / static_cast<double>(D);
    for (std::size_t j = 0; j < D; ++j) {
        const double left = static_cast<double>(j) * w;
        y.push_back(left);
        y.push_back(left + (1.0 - theta) * w);
    }
    y.push_back(1.0);
    return Partition(std::move(y));
}

}  // namespace

AssouadFamily::AssouadFamily(std::size_t D, double L, std::size_t n)
    : D_(D), L_(L), n_(n), a_(0.0), theta_(0.0), partition_(Partition::trivial()) {
    if (n_ == 0) throw std::invalid_argument("n must be positive");
    if (D_ < 1 || D_ > 3 * n_) throw std::invalid_argument("the hypercube needs 1 <= D <= 3n");
    if (!(L_ > 0.0) || !std::isfinite(L_)) throw std::invalid_argument("L must be positive");
    const double Dd = static_cast<double>(D_);
    const double nd = static_cast<double>(n_);
    a_ = Dd / (4.0 * nd);
    theta_ = Dd / (Dd + 4.0 * nd * L_);
    partition_ = assouad_partition(D_, theta_);
}

PiecewiseDensity AssouadFamily::member(const HammingIndex& delta) const {
    if (delta.size() != D_) throw std::invalid_argument("Hamming index has the wrong length");
    std::vector<double> h(2 * D_);
    for (std::size_t j = 0; j < D_; ++j) {
        h[2 * j] = delta[j] ? 1.0 - a_ : 1.0;
        h[2 * j + 1] = delta[j] ? 1.0 + L_ : 1.0;
    }
    return PiecewiseDensity(partition_, std::move(h));
}

std::vector<HammingIndex> AssouadFamily::vertices() const {
    if (D_ > 16) throw std::length_error("exhaustive hypercube enumeration needs D <= 16");
    const std::size_t count = std::size_t{1} << D_;
    std::vector<HammingIndex> out(count, HammingIndex(D_));
    for (std::size_t v = 0; v < count; ++v)
        for (std::size_t j = 0; j < D_; ++j) out[v][j] = (v >> (D_ - 1 - j)) & 1U;
    return out;
}

double AssouadFamily::bump_norm_squared() const noexcept {
    return a_ * a_ * (1.0 - theta_) / (theta_ * static_cast<double>(D_));
}

double AssouadFamily::bump_hellinger_squared() const noexcept {
    return (1.0 - (1.0 - theta_) * std::sqrt(1.0 - a_) - theta_ * std::sqrt(1.0 + L_)) / static_cast<double>(D_);
}

double AssouadFamily::isometry_distance_squared(const HammingIndex& d1, const HammingIndex& d2) const {
    return L_ / (4.0 * static_cast<double>(n_)) * static_cast<double>(hamming_distance(d1, d2));
}

double AssouadFamily::neighbour_affinity() const noexcept { return 1.0 - 1.0 / (6.0 * static_cast<double>(n_)); }

double assouad_bound(std::size_t D, Affinity rho_bar, std::size_t n) {
    const double r = std::pow(rho_bar.value(), 2.0 * static_cast<double>(n));
    return 0.5 * static_cast<double>(D) * (1.0 - std::sqrt(1.0 - r));
}

double assouad_bound_weak(std::size_t D, Affinity rho_bar, std::size_t n) {
    return 0.25 * static_cast<double>(D) * std::pow(rho_bar.value(), 2.0 * static_cast<double>(n));
}

double l2_minimax_floor(std::size_t D, double L, std::size_t n) {
    if (n == 0) throw std::invalid_argument("n must be positive");
    const double scale = L * static_cast<double>(D) / static_cast<double>(n);
    const double floor = scale / 32.0 * (1.0 - std::sqrt(11.0) / 6.0);
    if (!(floor > 0.0139 * scale)) throw std::logic_error("minimax floor below 0.0139 DL/n");
    return floor;
}

double family_valued_floor(const AssouadFamily& family) {
    return family.L() / (4.0 * static_cast<double>(family.n())) *
           assouad_bound(family.D(), Affinity(family.neighbour_affinity()), family.n());
}

HammingIndex nearest_member(const AssouadFamily& family, StepView f) {
    const auto& m = family.partition();
    // ∫_{I} (f - 1) on each interval of the family partition.
    std::vector<double> mass = cell_integrals(f, m);
    for (std::size_t k = 0; k < mass.size(); ++k) mass[k] -= m.length(k);
    const double half_norm = 0.5 * family.bump_norm_squared();
    HammingIndex delta(family.D());
    for (std::size_t j = 0; j < family.D(); ++j) {
        const double inner = -family.a() * mass[2 * j] + family.L() * mass[2 * j + 1];
        delta[j] = inner > half_norm;
    }
    return delta;
}

nlohmann::json assouad_report(const AssouadFamily& family) {
    const std::size_t D = family.D();
    const double L = family.L();
    const std::size_t n = family.n();
    const double nd = static_cast<double>(n);

    HammingIndex zero(D, false);
    HammingIndex first(D, false);
    first[0] = true;
    const PiecewiseDensity f = family.member(zero);
    const PiecewiseDensity fg = family.member(first);

    const double g2_quad = l2_distance_squared(f, fg);
    const double h2_quad = hellinger_squared(f, fg);

    // Isometry on the all-zeros / all-ones / alternating corners.
    HammingIndex ones(D, true);
    HammingIndex alt(D);
    for (std::size_t j = 0; j < D; ++j) alt[j] = j % 2 == 0;
    const std::vector<HammingIndex> probes{zero, ones, alt, first};
    double isom_error = 0.0;
    for (const auto& p : probes)
        for (const auto& q : probes)
            isom_error = std::max(isom_error, std::abs(l2_distance_squared(family.member(p), family.member(q)) -
                                                       family.isometry_distance_squared(p, q)));

    double sup_norm = 0.0;
    sup_norm = std::max(sup_norm, family.member(ones).sup_norm());

    nlohmann::json j;
    j["D"] = D;
    j["L"] = L;
    j["n"] = n;
    j["a"] = family.a();
    j["theta"] = family.theta();
    j["bump_norm_squared"] = family.bump_norm_squared();
    j["bump_norm_squared_target"] = L / (4.0 * nd);
    j["bump_norm_squared_quadrature"] = g2_quad;
    j["bump_hellinger_squared"] = family.bump_hellinger_squared();
    j["bump_hellinger_squared_quadrature"] = h2_quad;
    j["bump_hellinger_squared_cap"] = 1.0 / (6.0 * nd);
    j["isometry_max_error"] = isom_error;
    j["sup_norm"] = sup_norm;
    j["sup_norm_cap"] = L + 1.0;
    j["neighbour_affinity"] = family.neighbour_affinity();
    j["assouad_bound"] = assouad_bound(D, Affinity(family.neighbour_affinity()), n);
    j["assouad_bound_weak"] = assouad_bound_weak(D, Affinity(family.neighbour_affinity()), n);
    j["family_valued_floor"] = family_valued_floor(family);
    j["l2_minimax_floor"] = l2_minimax_floor(D, L, n);
    j["checks_passed"] = std::abs(g2_quad - L / (4.0 * nd)) <= 1e-12 * std::max(1.0, L / nd) &&
                         h2_quad <= 1.0 / (6.0 * nd) + 1e-15 && isom_error <= 1e-12 * std::max(1.0, L) &&
                         sup_norm <= L + 1.0 + 1e-12;
    return j;
}

}  // namespace modsel
