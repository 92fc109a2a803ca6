#include "modsel/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace modsel {

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    ExperimentConfig c;
    if (!j.contains("experiment") || !j["experiment"].is_string())
        throw std::invalid_argument("config needs an experiment id");
    c.experiment = j["experiment"].get<std::string>();
    if (!j.contains("seed") || !j["seed"].is_number_unsigned()) throw std::invalid_argument("config needs a seed");
    c.seed = j["seed"].get<std::uint64_t>();
    if (!j.contains("reps") || !j["reps"].is_number_unsigned()) throw std::invalid_argument("config needs reps");
    c.reps = j["reps"].get<std::size_t>();
    if (c.reps < 100) throw std::invalid_argument("reps must be at least 100");
    if (!j.contains("n_grid") || !j["n_grid"].is_array() || j["n_grid"].empty())
        throw std::invalid_argument("config needs a nonempty n_grid");
    for (const auto& v : j["n_grid"]) {
        if (!v.is_number_unsigned() || v.get<std::size_t>() == 0)
            throw std::invalid_argument("n_grid entries must be positive integers");
        c.n_grid.push_back(v.get<std::size_t>());
    }
    if (j.contains("se_multiplier")) {
        c.se_multiplier = j["se_multiplier"].get<double>();
        if (!(c.se_multiplier > 0.0)) throw std::invalid_argument("se_multiplier must be positive");
    }
    if (j.contains("params")) {
        if (!j["params"].is_object()) throw std::invalid_argument("params must be an object");
        c.params = j["params"];
    }
    return c;
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"experiment", experiment}, {"seed", seed},          {"reps", reps},
            {"n_grid", n_grid},         {"se_multiplier", se_multiplier}, {"params", params}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------------------
// Report CSV

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (in_quotes) throw std::invalid_argument("unterminated quote in CSV line");
    out.push_back(std::move(cur));
    return out;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad number: " + s);
    return v;
}

template <typename T>
T parse_unsigned(const std::string& s) {
    T v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad integer: " + s);
    return v;
}

}  // namespace

bool RiskReport::passed() const noexcept {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.passed; });
}

void RiskReport::write_csv(std::ostream& out) const {
    out << report_header << '\n';
    for (const auto& r : rows) {
        out << quote(r.experiment) << ',' << quote(r.scenario) << ',' << r.n << ',' << quote(r.model) << ','
            << format_double(r.dim) << ',' << format_double(r.mc_mean) << ',' << format_double(r.mc_se) << ','
            << format_double(r.reference) << ',' << quote(r.gate) << ',' << r.reps << ',' << r.seed << ','
            << (r.passed ? "true" : "false") << '\n';
    }
}

RiskReport RiskReport::read_csv(std::istream& in) {
    RiskReport rep;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty report");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != report_header) throw std::invalid_argument("unexpected report header");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 12) throw std::invalid_argument("report line " + std::to_string(lineno) + ": expected 12 fields");
        ReportRow r;
        try {
            r.experiment = f[0];
            r.scenario = f[1];
            r.n = parse_unsigned<std::size_t>(f[2]);
            r.model = f[3];
            r.dim = parse_double(f[4]);
            r.mc_mean = parse_double(f[5]);
            r.mc_se = parse_double(f[6]);
            r.reference = parse_double(f[7]);
            r.gate = f[8];
            r.reps = parse_unsigned<std::size_t>(f[9]);
            r.seed = parse_unsigned<std::uint64_t>(f[10]);
            if (f[11] != "true" && f[11] != "false") throw std::invalid_argument("bad flag");
            r.passed = f[11] == "true";
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("report line " + std::to_string(lineno) + ": " + e.what());
        }
        if (rep.experiment.empty()) rep.experiment = r.experiment;
        rep.rows.push_back(std::move(r));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Gates

namespace {
std::string k_text(double k) { return format_double(k); }
}  // namespace

ReportRow Gate::close(ReportRow r) const {
    r.gate = "|mean-ref|<=" + k_text(k) + "se";
    r.passed = std::abs(r.mc_mean - r.reference) <= k * r.mc_se;
    return r;
}

ReportRow Gate::at_most(ReportRow r) const {
    r.gate = "mean<=ref+" + k_text(k) + "se";
    r.passed = r.mc_mean <= r.reference + k * r.mc_se;
    return r;
}

ReportRow Gate::at_least(ReportRow r) const {
    r.gate = "mean>=ref-" + k_text(k) + "se";
    r.passed = r.mc_mean >= r.reference - k * r.mc_se;
    return r;
}

ReportRow Gate::exact(ReportRow r, double rel_tol) {
    r.gate = "|mean-ref|<=" + format_double(rel_tol) + "*max(1,|ref|)";
    r.passed = std::abs(r.mc_mean - r.reference) <= rel_tol * std::max(1.0, std::abs(r.reference));
    return r;
}

ReportRow Gate::below(ReportRow r) {
    r.gate = "mean<ref";
    r.passed = r.mc_mean < r.reference;
    return r;
}

ReportRow Gate::not_below(ReportRow r) {
    r.gate = "mean>=ref";
    r.passed = r.mc_mean >= r.reference;
    return r;
}

ReportRow Gate::ratio_at_most(ReportRow r, double c) {
    r.gate = "mean/ref<=" + format_double(c);
    r.passed = r.reference > 0.0 && r.mc_mean / r.reference <= c;
    return r;
}

ReportRow Gate::within(ReportRow r, double lo, double hi) {
    r.gate = "mean_in[" + format_double(lo) + "," + format_double(hi) + "]";
    r.passed = r.mc_mean >= lo && r.mc_mean <= hi;
    return r;
}

ReportRow Gate::report_only(ReportRow r) {
    r.gate = "report-only";
    r.passed = true;
    return r;
}

// ---------------------------------------------------------------------------
// Densities

double holder_seminorm(std::span<const double> values, double beta) {
    const std::size_t N = values.size();
    if (N < 2) return 0.0;
    double best = 0.0;
    std::size_t lag = 1;
    while (lag < N) {
        const double scale = std::pow(static_cast<double>(lag) / static_cast<double>(N), beta);
        for (std::size_t i = 0; i + lag < N; ++i)
            best = std::max(best, std::abs(values[i + lag] - values[i]) / scale);
        lag = lag < 32 ? lag + 1 : static_cast<std::size_t>(std::ceil(static_cast<double>(lag) * 1.1));
    }
    return best;
}

namespace {

double param(const nlohmann::json& spec, const char* key, double fallback) {
    return spec.contains(key) ? spec[key].get<double>() : fallback;
}

std::vector<double> midpoints(std::size_t N) {
    std::vector<double> x(N);
    for (std::size_t i = 0; i < N; ++i) x[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(N);
    return x;
}

GridDensity from_root(std::vector<double> root) {
    for (double& v : root) {
        if (!(v >= 0.0)) throw std::invalid_argument("square-root profile must stay nonnegative");
        v *= v;
    }
    return GridDensity::from_unnormalized(std::move(root));
}

}  // namespace

GridDensity make_density(const nlohmann::json& spec, std::size_t grid_size) {
    if (!spec.is_object() || !spec.contains("kind")) throw std::invalid_argument("density spec needs a kind");
    const std::string kind = spec["kind"].get<std::string>();
    const auto x = midpoints(grid_size);
    std::vector<double> v(grid_size);

    if (kind == "uniform") return GridDensity::uniform(grid_size);

    if (kind == "linear") {
        const double slope = param(spec, "slope", 2.0);
        if (std::abs(slope) > 2.0) throw std::invalid_argument("linear density needs |slope| <= 2");
        for (std::size_t i = 0; i < grid_size; ++i) v[i] = 1.0 + slope * (x[i] - 0.5);
        return GridDensity::from_unnormalized(std::move(v));
    }
    if (kind == "beta") {
        const double a = param(spec, "a", 2.0);
        const double b = param(spec, "b", 2.0);
        if (!(a >= 1.0 && b >= 1.0)) throw std::invalid_argument("beta density needs a, b >= 1");
        for (std::size_t i = 0; i < grid_size; ++i) v[i] = std::pow(x[i], a - 1.0) * std::pow(1.0 - x[i], b - 1.0);
        return GridDensity::from_unnormalized(std::move(v));
    }
    if (kind == "bimodal") {
        const double w = param(spec, "width", 0.05);
        if (!(w > 0.0)) throw std::invalid_argument("bimodal width must be positive");
        for (std::size_t i = 0; i < grid_size; ++i) {
            const double d1 = (x[i] - 0.3) / w;
            const double d2 = (x[i] - 0.7) / w;
            v[i] = std::exp(-0.5 * d1 * d1) + std::exp(-0.5 * d2 * d2);
        }
        return GridDensity::from_unnormalized(std::move(v));
    }
    if (kind == "step") {
        if (!spec.contains("heights") || !spec["heights"].is_array() || spec["heights"].empty())
            throw std::invalid_argument("step density needs heights");
        const auto h = spec["heights"].get<std::vector<double>>();
        for (std::size_t i = 0; i < grid_size; ++i)
            v[i] = h[std::min(h.size() - 1, static_cast<std::size_t>(x[i] * static_cast<double>(h.size())))];
        return GridDensity::from_unnormalized(std::move(v));
    }
    if (kind == "spiky") {
        const double w = param(spec, "width", 0.01);
        const double height = param(spec, "height", 20.0);
        for (std::size_t i = 0; i < grid_size; ++i) v[i] = 1.0 + ((x[i] >= 0.5 && x[i] < 0.5 + w) ? height : 0.0);
        return GridDensity::from_unnormalized(std::move(v));
    }
    if (kind == "holder-triangle") {
        // √s ∝ 1 + c(|x - 1/2| - 1/4); its Lipschitz constant is c / sqrt(1 + c²/48).
        const double L = param(spec, "L", 1.0);
        if (!(L > 0.0 && L * L < 48.0)) throw std::invalid_argument("holder-triangle needs 0 < L < sqrt(48)");
        const double c = L / std::sqrt(1.0 - L * L / 48.0);
        if (c >= 4.0) throw std::invalid_argument("holder-triangle profile would not stay positive");
        for (std::size_t i = 0; i < grid_size; ++i) v[i] = 1.0 + c * (std::abs(x[i] - 0.5) - 0.25);
        return from_root(std::move(v));
    }
    if (kind == "holder-weierstrass") {
        // √s ∝ 1 + cW, W = Σ_k 2^{-kβ} cos(2π 2^k x), c set so that the grid
        // Hölder seminorm of √s equals L.
        const double L = param(spec, "L", 1.0);
        const double beta = param(spec, "beta", 0.5);
        if (!(L > 0.0) || !(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("holder-weierstrass needs L > 0, beta in (0,1]");
        const int K = std::max(1, static_cast<int>(std::log2(static_cast<double>(grid_size))) - 3);
        std::vector<double> W(grid_size, 0.0);
        double w2 = 0.0;
        for (int k = 0; k <= K; ++k) {
            const double amp = std::pow(2.0, -k * beta);
            const double freq = 2.0 * std::numbers::pi * std::ldexp(1.0, k);
            for (std::size_t i = 0; i < grid_size; ++i) W[i] += amp * std::cos(freq * x[i]);
            w2 += amp * amp / 2.0;
        }
        const double H = holder_seminorm(W, beta);
        const double denom = H * H - L * L * w2;
        if (!(denom > 0.0)) throw std::invalid_argument("holder-weierstrass: L too large for this profile");
        const double c = L / std::sqrt(denom);
        const double wmax = *std::max_element(W.begin(), W.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
        if (c * std::abs(wmax) >= 1.0) throw std::invalid_argument("holder-weierstrass profile would not stay positive");
        for (std::size_t i = 0; i < grid_size; ++i) v[i] = 1.0 + c * W[i];
        return from_root(std::move(v));
    }
    throw std::invalid_argument("unknown density kind: " + kind);
}

// ---------------------------------------------------------------------------
// Registry access and persistence

const ExperimentInfo& find_experiment(const std::string& id) {
    for (const auto& e : experiment_registry())
        if (e.id == id) return e;
    throw std::invalid_argument("unknown experiment id: " + id);
}

RiskReport run_experiment(const ExperimentConfig& config) {
    const auto& info = find_experiment(config.experiment);
    const auto start = std::chrono::steady_clock::now();
    RiskReport r = info.run(config);
    r.experiment = config.experiment;
    r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::filesystem::path output_directory() {
    if (const char* env = std::getenv("MODSEL_OUTPUT_DIR"); env && *env) return env;
    return "modsel-output";
}

void write_report(const RiskReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (report.experiment + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    report.write_csv(out);
}

std::vector<VerifyEntry> verify_all(const std::filesystem::path& dir, std::ostream* log) {
    std::vector<VerifyEntry> out;
    for (const auto& info : experiment_registry()) {
        const RiskReport r = run_experiment(info.defaults);
        write_report(r, dir);
        out.push_back({info.id, r.passed(), r.rows.size(), r.runtime_seconds});
        if (log) {
            *log << (r.passed() ? "PASS " : "FAIL ") << info.id << " rows=" << r.rows.size()
                 << " runtime=" << std::fixed << std::setprecision(2) << r.runtime_seconds << "s" << std::endl;
            log->unsetf(std::ios::floatfield);
        }
    }
    std::ofstream summary(dir / "summary.csv", std::ios::binary);
    summary << "experiment,rows,passed\n";
    for (const auto& e : out) summary << e.id << ',' << e.rows << ',' << (e.passed ? "true" : "false") << '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Plot data

PlotKind parse_plot_kind(const std::string& name) {
    if (name == "risk-vs-n") return PlotKind::risk_vs_n;
    if (name == "risk-vs-D") return PlotKind::risk_vs_D;
    if (name == "ratio-vs-scenario") return PlotKind::ratio_vs_scenario;
    throw std::invalid_argument("unknown plot kind: " + name);
}

std::string to_string(PlotKind kind) {
    switch (kind) {
        case PlotKind::risk_vs_n: return "risk-vs-n";
        case PlotKind::risk_vs_D: return "risk-vs-D";
        case PlotKind::ratio_vs_scenario: return "ratio-vs-scenario";
    }
    return "?";
}

void emit_plot_data(const RiskReport& report, PlotKind kind, std::ostream& out) {
    out << "series,x,y,y_err,bound\n";
    if (kind == PlotKind::ratio_vs_scenario) {
        std::size_t i = 0;
        for (const auto& r : report.rows) {
            ++i;
            if (!(r.reference > 0.0)) continue;
            double bound = std::numeric_limits<double>::quiet_NaN();
            const std::string prefix = "mean/ref<=";
            if (r.gate.rfind(prefix, 0) == 0) bound = parse_double(r.gate.substr(prefix.size()));
            out << quote(r.scenario + "/" + r.model) << ',' << i << ',' << format_double(r.mc_mean / r.reference) << ','
                << format_double(r.mc_se / r.reference) << ',' << format_double(bound) << '\n';
        }
        return;
    }
    // Group rows into series, keeping first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const ReportRow*>> series;
    for (const auto& r : report.rows) {
        const std::string key = kind == PlotKind::risk_vs_n ? r.scenario + "/" + r.model
                                                           : r.scenario + "/n=" + std::to_string(r.n);
        if (!series.count(key)) order.push_back(key);
        series[key].push_back(&r);
    }
    for (const auto& key : order) {
        auto rows = series[key];
        std::stable_sort(rows.begin(), rows.end(), [&](const ReportRow* a, const ReportRow* b) {
            return kind == PlotKind::risk_vs_n ? a->n < b->n : a->dim < b->dim;
        });
        for (const ReportRow* r : rows) {
            const double x = kind == PlotKind::risk_vs_n ? static_cast<double>(r->n) : r->dim;
            out << quote(key) << ',' << format_double(x) << ',' << format_double(r->mc_mean) << ','
                << format_double(r->mc_se) << ',' << format_double(r->reference) << '\n';
        }
    }
}

}  // namespace modsel
