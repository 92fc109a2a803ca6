#pragma once

// Experiment configuration, report rows with declared gates, persistence,
// plot-table emission and the experiment registry.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "modsel/metrics.hpp"

namespace modsel {

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    std::vector<std::size_t> n_grid;
    double se_multiplier = 3.0;
    nlohmann::json params = nlohmann::json::object();

    /// Throws std::invalid_argument on a missing seed or experiment id, an
    /// empty n grid, reps < 100 or a non-positive se multiplier.
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

struct ReportRow {
    std::string experiment;
    std::string scenario;
    std::size_t n = 0;
    std::string model;
    double dim = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double reference = 0.0;  // exact value or bound
    std::string gate;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    bool passed = false;
};

struct RiskReport {
    std::string experiment;
    std::vector<ReportRow> rows;
    double runtime_seconds = 0.0;  // printed, never persisted

    bool passed() const noexcept;
    void write_csv(std::ostream& out) const;
    static RiskReport read_csv(std::istream& in);
};

inline const char* report_header =
    "experiment,scenario,n,model,dim,mc_mean,mc_se,reference,gate,reps,seed,passed";

/// Shortest round-trip decimal form.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Gates. Each returns a row with `gate` and `passed` filled in.

struct Gate {
    double k = 3.0;  // SE multiplier

    ReportRow close(ReportRow r) const;                    // |mean - ref| ≤ k·se
    ReportRow at_most(ReportRow r) const;                  // mean ≤ ref + k·se
    ReportRow at_least(ReportRow r) const;                 // mean ≥ ref - k·se
    static ReportRow exact(ReportRow r, double rel_tol);   // |mean - ref| ≤ tol·max(1, |ref|)
    static ReportRow below(ReportRow r);                   // mean < ref
    static ReportRow not_below(ReportRow r);               // mean ≥ ref
    static ReportRow ratio_at_most(ReportRow r, double c); // mean / ref ≤ c
    static ReportRow within(ReportRow r, double lo, double hi);  // lo ≤ mean ≤ hi
    static ReportRow report_only(ReportRow r);
};

// ---------------------------------------------------------------------------
// Scenario densities

/// Builds a density from a JSON spec such as {"kind": "holder-triangle", "L": 1}.
/// Kinds: uniform, linear (slope), beta (a, b), bimodal (width), step (heights),
/// holder-triangle (L), holder-weierstrass (L, beta), spiky (width, height).
GridDensity make_density(const nlohmann::json& spec, std::size_t grid_size = default_grid_size);

/// sup over grid pairs at a geometric set of lags of |f(x) - f(y)| / |x - y|^β.
double holder_seminorm(std::span<const double> values, double beta);

// ---------------------------------------------------------------------------
// Registry

struct ExperimentInfo {
    std::string id;
    std::string description;
    RiskReport (*run)(const ExperimentConfig&);
    ExperimentConfig defaults;
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo& find_experiment(const std::string& id);

/// Dispatches on config.experiment; throws std::invalid_argument for an
/// unknown id. Deterministic in the seed and independent of thread count.
RiskReport run_experiment(const ExperimentConfig& config);

/// MODSEL_OUTPUT_DIR if set, else ./modsel-output.
std::filesystem::path output_directory();

void write_report(const RiskReport& report, const std::filesystem::path& dir);

struct VerifyEntry {
    std::string id;
    bool passed;
    std::size_t rows;
    double runtime_seconds;
};

/// Runs every registered experiment with its default config, writes each
/// report and summary.csv to dir, and logs one line per experiment.
std::vector<VerifyEntry> verify_all(const std::filesystem::path& dir, std::ostream* log = nullptr);

// ---------------------------------------------------------------------------
// Plot data

enum class PlotKind { risk_vs_n, risk_vs_D, ratio_vs_scenario };

PlotKind parse_plot_kind(const std::string& name);
std::string to_string(PlotKind kind);

/// CSV with columns series,x,y,y_err,bound. risk-vs-n and risk-vs-D use
/// (n or dim, mc_mean, mc_se, reference) grouped by scenario and model;
/// ratio-vs-scenario uses mc_mean / reference per row. An empty report
/// yields the header only.
void emit_plot_data(const RiskReport& report, PlotKind kind, std::ostream& out);

}  // namespace modsel
