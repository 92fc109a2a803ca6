// Acceptance run: executes the full suite twice and prints one PASS/FAIL line
// per acceptance criterion. Exit status is nonzero when any criterion fails.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modsel/harness.hpp"
#include "modsel/montecarlo.hpp"

namespace fs = std::filesystem;
using namespace modsel;

namespace {

struct Criterion {
    int number;
    std::string title;
    std::vector<std::string> experiments;
    double max_runtime;  // seconds per experiment; 0 means unchecked
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RiskReport load_report(const fs::path& dir, const std::string& id) {
    std::ifstream in(dir / (id + ".csv"), std::ios::binary);
    if (!in) throw std::runtime_error("missing report for " + id);
    return RiskReport::read_csv(in);
}

std::string describe(const ReportRow& r) {
    std::ostringstream s;
    s << r.experiment << ":" << r.scenario << "/" << r.model << " n=" << r.n << " mean=" << format_double(r.mc_mean)
      << " ref=" << format_double(r.reference) << " gate=" << r.gate;
    return s.str();
}

bool evaluate(const Criterion& c, const fs::path& dir, const std::map<std::string, VerifyEntry>& runs) {
    std::size_t rows = 0, passed = 0;
    std::vector<std::string> notes;
    for (const auto& id : c.experiments) {
        const RiskReport r = load_report(dir, id);
        for (const auto& row : r.rows) {
            ++rows;
            if (row.passed) {
                ++passed;
            } else {
                notes.push_back(describe(row));
            }
        }
        if (rows == 0) notes.push_back(id + ": no rows");
        const double t = runs.at(id).runtime_seconds;
        if (c.max_runtime > 0.0 && t > c.max_runtime)
            notes.push_back(id + " runtime " + format_double(t) + "s > " + format_double(c.max_runtime) + "s");
    }
    const bool ok = notes.empty();
    std::cout << (ok ? "PASS" : "FAIL") << " [" << c.number << "] " << c.title << ": " << passed << "/" << rows
              << " rows";
    for (const auto& n : notes) std::cout << "; " << n;
    std::cout << std::endl;
    return ok;
}

bool same_reports(const fs::path& a, const fs::path& b, std::size_t& files, std::string& diff) {
    files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() != ".csv") continue;
        ++files;
        const fs::path other = b / e.path().filename();
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
            diff = e.path().filename().string();
            return false;
        }
    }
    return files > 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance run over the default experiment configs"};
    std::string out = "acceptance-output";
    unsigned threads = 0;
    app.add_option("--out", out, "scratch directory for the two report sets");
    app.add_option("--threads", threads, "worker threads for replication loops");
    CLI11_PARSE(app, argc, argv);
    if (threads > 0) set_worker_count(threads);

    const std::vector<Criterion> criteria{
        {1, "exact formulas", {"exact-formulas"}, 1.0},
        {2, "distance identities", {"distance-identities"}, 0.0},
        {3, "risk identities", {"gauss-risk", "his-exact"}, 120.0},
        {4, "test error bounds", {"gtest", "density-two-point"}, 0.0},
        {5, "lattice deviation and nets", {"lattice-deviation", "net-check"}, 0.0},
        {6, "rate slopes", {"rate-holder"}, 600.0},
        {7, "oracle ratios", {"oracle-ratio-gaussian", "oracle-ratio-holdout"}, 0.0},
        {8, "lower-bound floor", {"assouad-floor"}, 0.0},
    };

    try {
        const fs::path first = fs::path(out) / "run1";
        const fs::path second = fs::path(out) / "run2";
        fs::remove_all(first);
        fs::remove_all(second);

        std::map<std::string, VerifyEntry> runs;
        for (const auto& e : verify_all(first)) runs.emplace(e.id, e);

        bool all = true;
        for (const auto& c : criteria) all = evaluate(c, first, runs) && all;

        verify_all(second);
        std::size_t files = 0;
        std::string diff;
        const bool same = same_reports(first, second, files, diff);
        std::cout << (same ? "PASS" : "FAIL") << " [9] determinism: " << files << " report files"
                  << (same ? " byte-identical" : "; differs: " + diff) << std::endl;
        all = all && same;
        return all ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
