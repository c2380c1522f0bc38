#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msym/geometry.hpp"

namespace msym {

const std::vector<std::string>& known_suites();

// Potential description as it appears in a config file.
//   {"kind": "flat"}
//   {"kind": "quadratic", "A": [[...]], "b": [...], "c": 0}
//   {"kind": "polynomial", "terms": [...]}   (Polynomial JSON)
//   {"kind": "exp-quadratic", "seed": 7, "terms": 2, "strength": 0.3}
//   {"kind": "radial", "C": 1, "beta": 1}
//   {"kind": "grid", "path": "phi.csv", "C": 1}
struct PotentialSpec {
    std::string kind = "flat";
    nlohmann::json params = nlohmann::json::object();
};

struct SuiteConfig {
    int n = 2;
    std::vector<std::pair<double, double>> bounds;  // empty: [-1, 1]^n
    PotentialSpec potential;
    double covolume = 1.0;
    int grid_resolution = 17;
    int fiber_resolution = 8;
    std::vector<std::string> suites;
    std::map<std::string, double> tolerances;  // per suite, replaces every check tolerance
    std::optional<double> global_tolerance;    // --tol, wins over per-suite values
    std::uint64_t seed = 42;
    bool timing = true;  // false writes wall_time_ms = 0 for byte-identical reports

    // Relative paths (grid files) resolve against this directory.
    std::string base_dir;

    static SuiteConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
    static SuiteConfig load(const std::string& path);
    nlohmann::json to_json() const;
    Domain domain() const;
    // Throws ConfigError for unknown suites, bad tolerances, missing files.
    void validate() const;
};

PotentialPtr build_potential(const SuiteConfig& c);

struct CheckRecord {
    std::string suite;
    std::string check;
    std::string anchor;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    long samples = 0;
    double wall_time_ms = 0.0;
};

struct Report {
    nlohmann::json calibration = nlohmann::json::object();
    std::vector<CheckRecord> records;
    // Suites that threw a solver failure; the runner maps these to exit code 3.
    std::vector<std::string> solver_failures;

    bool all_pass() const;
    void sort();
    nlohmann::json to_json() const;
    static Report from_json(const nlohmann::json& j);
};

// Runs the configured suites in declared order. A suite that throws is
// recorded as a failing "exception" row and the remaining suites still run.
Report run(const SuiteConfig& config);

enum class ReportFormat { Json, Csv };
ReportFormat format_from_path(const std::string& path);
std::string render(const Report& r, ReportFormat f);
void emit(const Report& r, ReportFormat f, const std::string& path);
Report load_report(const std::string& path);

// 0 all pass, 1 some check failed, 3 a solver failed.
int exit_code(const Report& r);

}  // namespace msym
