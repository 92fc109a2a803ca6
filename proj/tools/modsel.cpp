// Command-line front end: run experiments, verify the full suite, emit plot tables.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "modsel/harness.hpp"
#include "modsel/montecarlo.hpp"

namespace fs = std::filesystem;
using namespace modsel;

namespace {

void print_failures(const RiskReport& r) {
    for (const auto& row : r.rows) {
        if (row.passed) continue;
        std::cout << "  failed: " << row.scenario << " / " << row.model << " n=" << row.n
                  << " mean=" << format_double(row.mc_mean) << " se=" << format_double(row.mc_se)
                  << " ref=" << format_double(row.reference) << " gate=" << row.gate << '\n';
    }
}

int cmd_run(const std::string& config_path, const std::string& out) {
    const ExperimentConfig cfg = load_config(config_path);
    const RiskReport r = run_experiment(cfg);
    const fs::path dir = out.empty() ? output_directory() : fs::path(out);
    write_report(r, dir);
    std::cout << (r.passed() ? "PASS " : "FAIL ") << r.experiment << " rows=" << r.rows.size() << " runtime="
              << std::fixed << std::setprecision(2) << r.runtime_seconds << "s -> "
              << (dir / (r.experiment + ".csv")).string() << '\n';
    print_failures(r);
    return r.passed() ? 0 : 1;
}

int cmd_list() {
    for (const auto& e : experiment_registry()) std::cout << std::left << std::setw(24) << e.id << e.description << '\n';
    return 0;
}

int cmd_defaults(const std::string& id) {
    std::cout << find_experiment(id).defaults.to_json().dump(2) << '\n';
    return 0;
}

int cmd_verify_all(const std::string& out) {
    const fs::path dir = out.empty() ? output_directory() : fs::path(out);
    const auto entries = verify_all(dir, &std::cout);
    bool ok = true;
    for (const auto& e : entries) ok = ok && e.passed;
    std::cout << (ok ? "all experiments passed" : "some experiments failed") << "; reports in " << dir.string()
              << '\n';
    return ok ? 0 : 1;
}

int cmd_emit_plots(const std::string& report_path, const std::string& kind, const std::string& out) {
    std::ifstream in(report_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open report " + report_path);
    const RiskReport r = RiskReport::read_csv(in);
    std::vector<PlotKind> kinds;
    if (kind.empty()) {
        kinds = {PlotKind::risk_vs_n, PlotKind::risk_vs_D, PlotKind::ratio_vs_scenario};
    } else {
        kinds = {parse_plot_kind(kind)};
    }
    if (!out.empty() && kinds.size() == 1) {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out);
        emit_plot_data(r, kinds.front(), f);
        std::cout << out << '\n';
        return 0;
    }
    const fs::path dir = out.empty() ? output_directory() : fs::path(out);
    fs::create_directories(dir);
    const std::string stem = fs::path(report_path).stem().string();
    for (PlotKind k : kinds) {
        const fs::path path = dir / (stem + "." + to_string(k) + ".csv");
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        emit_plot_data(r, k, f);
        std::cout << path.string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model selection experiments: histograms, Gaussian sequence models, hold-out selection"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads for replication loops (default: MODSEL_THREADS or all cores)");

    std::string config_path, out, report_path, kind, id;

    auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
    run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory (default: $MODSEL_OUTPUT_DIR or ./modsel-output)");

    app.add_subcommand("list-experiments", "list registered experiment ids");

    auto* defaults = app.add_subcommand("defaults", "print the default config of an experiment");
    defaults->add_option("id", id, "experiment id")->required();

    auto* verify = app.add_subcommand("verify-all", "run every experiment with its default config");
    verify->add_option("--out", out, "output directory (default: $MODSEL_OUTPUT_DIR or ./modsel-output)");

    auto* plots = app.add_subcommand("emit-plots", "write plot tables (series,x,y,y_err,bound) from a report");
    plots->add_option("report", report_path, "report CSV")->required()->check(CLI::ExistingFile);
    plots->add_option("--kind", kind, "risk-vs-n, risk-vs-D or ratio-vs-scenario (default: all)");
    plots->add_option("--out", out, "output file (with --kind) or directory");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) set_worker_count(threads);

    try {
        if (*run) return cmd_run(config_path, out);
        if (app.got_subcommand("list-experiments")) return cmd_list();
        if (*defaults) return cmd_defaults(id);
        if (*verify) return cmd_verify_all(out);
        if (*plots) return cmd_emit_plots(report_path, kind, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
