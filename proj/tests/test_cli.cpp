#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sov6v/runner.hpp"

using namespace sov6v;

namespace {
std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(bool(f));
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}
} // namespace

TEST_CASE("configuration parsing: defaults, overrides and rejection") {
    // minimal config keeps documented defaults
    RunConfig cfg = parse_config("{}");
    CHECK(cfg.N == 2);
    CHECK(cfg.x == 0);
    CHECK(cfg.y == 1);
    CHECK(cfg.xi_mode == "seeded-random");
    CHECK(cfg.kappa.size() == 1);
    CHECK(cfg.seed == 7);

    cfg = parse_config(R"({"N": 3, "x": 1, "y": 0, "seed": 42,
                           "kappa": [[1.0, 0.0], [0.7, 0.2]],
                           "suites": ["verify", "spectrum"], "tol": 1e-6})");
    CHECK(cfg.N == 3);
    CHECK(cfg.kappa.size() == 2);
    CHECK(cfg.suites == std::vector<std::string>{"verify", "spectrum"});
    CHECK(cfg.tol == 1e-6);

    // explicit inhomogeneities are accepted and implied by presence of xi
    cfg = parse_config(R"({"N": 2, "xi": [[0.11, 0.02], [-0.31, -0.07]]})");
    CHECK(cfg.xi_mode == "explicit");
    CHECK(cfg.xi.size() == 2);

    // rejections carry stable codes
    CHECK_THROWS_AS(parse_config("not json"), Error);
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"N": "two"})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"suites": ["nonsense"]})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"kappa": []})"), Error);
    // forbidden parity sector
    CHECK_THROWS_AS(parse_config(R"({"N": 2, "x": 0, "y": 0})"), Error);
    // explicit xi must have N entries and respect the non-degeneracy condition
    CHECK_THROWS_AS(parse_config(R"({"N": 2, "xi": [[0.1, 0.0]]})"), Error);
    try {
        parse_config(R"({"N": 2, "xi": [[0.1, 0.0], [0.1, 0.0]]})");
        FAIL("degenerate inhomogeneities accepted");
    } catch (const Error& e) {
        CHECK(e.code() == "ConfigError");
        CHECK(std::string(e.what()).find("pair") != std::string::npos);
    }
}

TEST_CASE("configuration serialization round-trips byte-identically") {
    const std::string text = R"({"N": 4, "x": 1, "y": 1, "seed": 99,
                                 "kappa": [[0.9, 0.1]], "suites": ["verify"],
                                 "tol": 0.0, "out": "runs"})";
    const RunConfig cfg = parse_config(text);
    const std::string s1 = serialize_config(cfg);
    const RunConfig cfg2 = parse_config(s1);
    const std::string s2 = serialize_config(cfg2);
    CHECK(s1 == s2);
}

TEST_CASE("run_suite: empty suite list produces an empty but well-formed report") {
    RunConfig cfg = parse_config(R"({"N": 2, "seed": 5})");
    const RunReport rep = run_suite(cfg);
    CHECK(rep.checks.empty());
    CHECK(rep.eigenvalues.empty());
    CHECK(rep.all_pass());
    const std::string j = report_json(rep);
    CHECK(j.find("\"all_pass\": true") != std::string::npos);
}

TEST_CASE("run_suite: full pipeline at N=2 passes and is deterministic") {
    RunConfig cfg = parse_config(
        R"({"N": 2, "x": 0, "y": 1, "seed": 31,
            "kappa": [[1.0, 0.0], [0.8, 0.3]],
            "suites": ["verify", "spectrum", "bethe", "tq-inhom", "formfactors"]})");
    const RunReport rep = run_suite(cfg);
    for (const auto& c : rep.checks) {
        INFO(c.suite << "/" << c.id << " residual=" << c.residual
                     << " threshold=" << c.threshold);
        CHECK(c.pass);
    }
    CHECK(rep.all_pass());
    CHECK(rep.eigenvalues.size() == 4);     // 2^N transfer eigenvalues
    CHECK(rep.eigenvalues[0].size() == 2);  // evaluated at the N inhomogeneities
    CHECK(rep.bethe_roots.size() == 4);
    CHECK(rep.inhom_roots.size() == 4);
    CHECK(rep.ff.size() > 0);

    // determinism: a fresh run with the same config gives identical bytes
    const RunReport rep2 = run_suite(cfg);
    CHECK(report_json(rep) == report_json(rep2));
}

TEST_CASE("run_suite: bethe suite is rejected for inapplicable sectors") {
    RunConfig cfg = parse_config(R"({"N": 3, "x": 1, "y": 0, "seed": 11,
                                     "suites": ["bethe"]})");
    CHECK_THROWS_AS(run_suite(cfg), Error);
}

TEST_CASE("emit_report writes report.json and the CSV tables") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "sov6v_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig cfg = parse_config(
        R"({"N": 2, "x": 0, "y": 1, "seed": 31,
            "suites": ["spectrum", "bethe", "formfactors"]})");
    const RunReport rep = run_suite(cfg);
    emit_report(rep, dir.string());

    const std::string report = slurp(dir / "report.json");
    CHECK(report == report_json(rep) + "\n");

    const std::string eig = slurp(dir / "eigenvalues.csv");
    CHECK(count_lines(eig) == 1 + 4); // header + 2^N rows

    const std::string roots = slurp(dir / "bethe_roots.csv");
    CHECK(count_lines(roots) == 1 + 4 * 2); // header + one row per root

    // one row per (bra, ket, site, operator) with operators {pp, mm, height0..N}
    const std::string ff = slurp(dir / "formfactors.csv");
    CHECK(count_lines(ff) == 1 + 4 * 4 * 2 * (2 + 3));
    CHECK(ff.rfind("bra,ket,site,operator,", 0) == 0);

    fs::remove_all(dir);
}
