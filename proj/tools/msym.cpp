// Command-line front end: solve, verify, report.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "msym/errors.hpp"
#include "msym/ma_solver.hpp"
#include "msym/report.hpp"

using namespace msym;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;

SuiteConfig load_config(const std::string& path) {
    if (path.empty()) return SuiteConfig{};
    return SuiteConfig::load(path);
}

int cmd_solve(const std::string& config_path, const std::string& out, std::optional<double> tol) {
    SuiteConfig cfg = load_config(config_path);
    cfg.validate();
    const PotentialPtr boundary = build_potential(cfg);
    nlohmann::json raw = nlohmann::json::object();
    if (!config_path.empty()) std::ifstream(config_path) >> raw;
    const double C = raw.value("C", boundary->target_constant());
    SolverOptions opts;
    if (tol) opts.tolerance = *tol;
    const SolveResult r = solve_real_ma(cfg.domain(), C, [boundary](const Vec& x) { return boundary->value(x); }, opts);
    save_grid_csv(r.potential->data(), out);
    const std::string hist = std::filesystem::path(out).replace_extension(".history.json").string();
    std::ofstream(hist) << r.history_json().dump(2) << "\n";
    std::cout << "solve: " << r.iterations << " Newton steps, sup |det - C| = " << r.det_history.back() << "\n";
    return 0;
}

int cmd_verify(const std::string& config_path, const std::string& out, const std::vector<std::string>& suites,
               std::optional<std::uint64_t> seed, std::optional<double> tol, bool no_timing) {
    SuiteConfig cfg = load_config(config_path);
    if (cfg.suites.empty() && config_path.empty()) cfg.suites = known_suites();
    if (!suites.empty()) cfg.suites = suites;
    if (seed) cfg.seed = *seed;
    if (tol) cfg.global_tolerance = *tol;
    if (no_timing) cfg.timing = false;
    const Report rep = run(cfg);
    if (!out.empty()) emit(rep, format_from_path(out), out);
    int failed = 0;
    for (const CheckRecord& c : rep.records) {
        if (!c.pass) ++failed;
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.suite << '/' << c.check << "  residual=" << c.max_residual
                  << "  tol=" << c.tolerance << "\n";
    }
    std::cout << rep.records.size() - failed << "/" << rep.records.size() << " checks passed\n";
    return exit_code(rep);
}

int cmd_report(const std::string& in, const std::string& out) {
    const Report rep = load_report(in);
    if (out.empty())
        std::cout << render(rep, ReportFormat::Csv);
    else
        emit(rep, format_from_path(out), out);
    return exit_code(rep);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-flat mirror pairs from real Monge-Ampere solutions"};
    app.require_subcommand(1);

    std::string config, out, input;
    std::vector<std::string> suites;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    bool no_timing = false;

    auto* solve = app.add_subcommand("solve", "solve the real Monge-Ampere equation and write a grid CSV");
    solve->add_option("--config", config, "JSON config");
    solve->add_option("--out", out, "grid CSV path")->required();
    solve->add_option("--tol", tol, "solver tolerance on sup |det - C|");

    auto* verify = app.add_subcommand("verify", "run verification suites");
    verify->add_option("--config", config, "JSON config");
    verify->add_option("--out", out, "report path (.json or .csv)");
    verify->add_option("--suite", suites, "suite to run (repeatable, overrides the config list)");
    verify->add_option("--seed", seed, "random seed");
    verify->add_option("--tol", tol, "global tolerance override");
    verify->add_flag("--no-timing", no_timing, "write wall_time_ms = 0 so reports are byte-identical");

    auto* report = app.add_subcommand("report", "reformat a JSON report");
    report->add_option("input", input, "JSON report")->required();
    report->add_option("--out", out, "output path (.json or .csv); CSV to stdout if omitted");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*solve) return cmd_solve(config, out, tol);
        if (*verify) return cmd_verify(config, out, suites, seed, tol, no_timing);
        return cmd_report(input, out);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return kConfigError;
    } catch (const LostConvexity& e) {
        std::cerr << e.what() << "\n";
        return kSolverFailure;
    } catch (const MaxIterations& e) {
        std::cerr << e.what() << "\n";
        return kSolverFailure;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
