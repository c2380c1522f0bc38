#include <doctest.h>

#include <cfloat>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "msym/errors.hpp"
#include "msym/report.hpp"

using namespace msym;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "msym_test_report";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MSYM_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

SuiteConfig flat_config(std::vector<std::string> suites) {
    SuiteConfig c;
    c.suites = std::move(suites);
    c.timing = false;
    return c;
}

}  // namespace

TEST_CASE("sl2 suite on the flat background passes") {
    const Report r = run(flat_config({"sl2"}));
    CHECK(r.records.size() == 13);
    for (const auto& rec : r.records) {
        CHECK(rec.suite == "sl2");
        CHECK(rec.pass);
        CHECK(rec.pass == (rec.max_residual <= rec.tolerance));
    }
    CHECK(exit_code(r) == 0);
}

TEST_CASE("empty suite list gives an empty passing report") {
    const Report r = run(flat_config({}));
    CHECK(r.records.empty());
    CHECK(exit_code(r) == 0);
    CHECK(r.calibration.contains("inversion_sign"));
}

TEST_CASE("configuration errors") {
    SuiteConfig c = flat_config({"sl2"});
    c.potential.kind = "grid";
    c.potential.params = {{"kind", "grid"}, {"path", "/nonexistent/phi.csv"}};
    CHECK_THROWS_AS(run(c), ConfigError);
    CHECK_THROWS_AS(run(flat_config({"no-such-suite"})), ConfigError);
    SuiteConfig t = flat_config({"sl2"});
    t.tolerances["sl2"] = -1.0;
    CHECK_THROWS_AS(run(t), ConfigError);
    CHECK_THROWS_AS(SuiteConfig::from_json(nlohmann::json{{"n", "two"}}), ConfigError);
}

TEST_CASE("records are sorted and a failing suite does not stop later ones") {
    SuiteConfig c = flat_config({"yukawa", "legendre", "connections"});
    c.tolerances["legendre"] = DBL_MIN;  // flat Legendre residuals are exactly 0: still pass
    c.tolerances["yukawa"] = 1e-300;     // Yukawa ratio spread is roundoff: fails
    const Report r = run(c);
    std::vector<std::string> suites;
    for (const auto& rec : r.records)
        if (suites.empty() || suites.back() != rec.suite) suites.push_back(rec.suite);
    CHECK(suites == std::vector<std::string>{"connections", "legendre", "yukawa"});
    for (const auto& rec : r.records) CHECK(rec.pass == (rec.suite != "yukawa"));
    CHECK(exit_code(r) == 1);
}

TEST_CASE("global tolerance wins over per-suite values") {
    SuiteConfig c = flat_config({"legendre"});
    c.tolerances["legendre"] = 1e-3;
    c.global_tolerance = 0.5;
    for (const auto& rec : run(c).records) CHECK(rec.tolerance == 0.5);
}

TEST_CASE("emission formats") {
    Report r;
    r.records.push_back({"sl2", "one", "anchor, with comma", 0.1 + 0.2, 1e-10, false, 7, 1.5});
    SUBCASE("single record is one object in the records array") {
        const nlohmann::json j = nlohmann::json::parse(render(r, ReportFormat::Json));
        REQUIRE(j.at("records").is_array());
        CHECK(j.at("records").size() == 1);
        for (const char* k : {"suite", "check", "anchor", "max_residual", "tolerance", "pass", "samples", "wall_time_ms"})
            CHECK(j.at("records")[0].contains(k));
    }
    SUBCASE("JSON round trip is bit exact") {
        r.records.push_back({"ma", "two", "", DBL_MAX, DBL_MIN, true, 0, 0.0});
        r.records.push_back({"ma", "three", "", 1.0 / 3.0, 4.9406564584124654e-324, false, 1, 1e-17});
        const auto p = scratch("round.json");
        emit(r, ReportFormat::Json, p.string());
        const Report back = load_report(p.string());
        REQUIRE(back.records.size() == r.records.size());
        for (std::size_t i = 0; i < r.records.size(); ++i) {
            CHECK(back.records[i].max_residual == r.records[i].max_residual);
            CHECK(back.records[i].tolerance == r.records[i].tolerance);
            CHECK(back.records[i].wall_time_ms == r.records[i].wall_time_ms);
            CHECK(back.records[i].anchor == r.records[i].anchor);
            CHECK(back.records[i].samples == r.records[i].samples);
        }
    }
    SUBCASE("CSV has a header plus one row per record and 17 significant digits") {
        r.records.push_back({"ma", "two", "", 2.0, 1.0, false, 0, 0.0});
        const std::string csv = render(r, ReportFormat::Csv);
        std::istringstream in(csv);
        std::string line;
        std::vector<std::string> lines;
        while (std::getline(in, line)) lines.push_back(line);
        REQUIRE(lines.size() == r.records.size() + 1);
        CHECK(lines[0] == "suite,check,anchor,max_residual,tolerance,pass,samples,wall_time_ms");
        CHECK(lines[1].find("\"anchor, with comma\"") != std::string::npos);
        CHECK(lines[1].find("0.30000000000000004") != std::string::npos);
    }
    SUBCASE("unwritable path") {
        CHECK_THROWS_AS(emit(r, ReportFormat::Json, "/nonexistent/dir/r.json"), IoError);
    }
}

TEST_CASE("reports are deterministic given the seed") {
    const SuiteConfig c = flat_config({"cycles", "automorphisms", "mirror-forms"});
    CHECK(render(run(c), ReportFormat::Json) == render(run(c), ReportFormat::Json));
    SuiteConfig other = c;
    other.seed = 7;
    CHECK(render(run(other), ReportFormat::Json) != render(run(c), ReportFormat::Json));
}

TEST_CASE("command line verbs and exit codes") {
    const auto report = scratch("cli.json"), csv = scratch("cli.csv"), grid = scratch("phi.csv");
    CHECK(run_cli("verify --suite sl2 --suite legendre --no-timing --out " + report.string()) == 0);
    CHECK(load_report(report.string()).records.size() == 16);
    CHECK(run_cli("report " + report.string() + " --out " + csv.string()) == 0);
    CHECK(slurp(csv).rfind("suite,check,anchor,", 0) == 0);

    const auto missing = scratch("missing.json");
    std::ofstream(missing) << R"({"potential": {"kind": "grid", "path": "does-not-exist.csv"}, "suites": ["sl2"]})";
    CHECK(run_cli("verify --config " + missing.string()) == 2);
    CHECK(run_cli("verify --suite legendre --tol 1e-300 --seed 3") == 0);
    CHECK(run_cli("verify --suite yukawa --tol 1e-300") == 1);

    const auto solve_cfg = scratch("solve.json");
    std::ofstream(solve_cfg) << R"({"n": 2, "bounds": [[1, 2], [1, 2]], "potential": {"kind": "radial"}})";
    CHECK(run_cli("solve --config " + solve_cfg.string() + " --out " + grid.string()) == 0);
    CHECK(std::filesystem::exists(grid));
    const auto history = nlohmann::json::parse(slurp(scratch("phi.history.json")));
    CHECK(history.contains("residual_history"));
    const auto grid_cfg = scratch("grid.json");
    std::ofstream(grid_cfg) << R"({"n": 2, "potential": {"kind": "grid", "path": "phi.csv"}, "suites": ["legendre", "connections"]})";
    CHECK(run_cli("verify --config " + grid_cfg.string()) == 0);
}
