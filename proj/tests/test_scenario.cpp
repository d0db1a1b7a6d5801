#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qgraph/conditions.hpp"
#include "qgraph/scenario.hpp"

using namespace qgraph;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("a full scenario text parses into its pieces") {
    const std::string text =
        "# star with one override and a constant potential\n"   // line 1
        "graph builtin star 3 1.0\n"                             // line 2
        "conditions A delta_prime 1\n"                           // line 3
        "vertex A 0 delta_prime 2\n"                             // line 4
        "potential A constant 0.5\n"                             // line 5
        "conditions B delta_prime 2\n"                           // line 6
        "experiment compare\n"                                   // line 7
        "eigenvalues 40\n"                                       // line 8
        "tolerance 0.2\n";                                       // line 9
    const Scenario sc = parse_scenario_text(text, "cfg");
    CHECK(sc.graph.num_vertices() == 4);
    CHECK(sc.graph.num_edges() == 3);
    CHECK(sc.graph_desc == "builtin star 3 1.0");
    REQUIRE(sc.has_a);
    REQUIRE(sc.has_b);
    CHECK(sc.conds_a.at(0).kind == ConditionKind::DeltaPrime);
    CHECK(sc.conds_a.at(0).strength == 2.0);  // override wins
    CHECK(sc.conds_a.at(1).strength == 1.0);
    CHECK(sc.conds_b.at(3).strength == 2.0);
    CHECK(sc.pot_a.integral() == doctest::Approx(1.5));  // 0.5 on total length 3
    CHECK(sc.pot_b.is_zero());
    CHECK(sc.experiment == ExperimentKind::Compare);
    CHECK(sc.eigenvalues == 40);
    REQUIRE(sc.tolerance.has_value());
    CHECK(*sc.tolerance == 0.2);
    CHECK(sc.panels == 64);  // untouched knobs keep their defaults
}

TEST_CASE("per-vertex strength lists and targets parse") {
    const std::string text =
        "graph builtin star 3 1.0\n"
        "conditions A delta_prime 1,2,3,4\n"
        "experiment weyl\n"
        "target vertex 0\n"
        "times 0.01,0.002\n";
    const Scenario sc = parse_scenario_text(text, "cfg");
    for (int v = 0; v < 4; ++v) CHECK(sc.conds_a.at(v).strength == 1.0 + v);
    REQUIRE(sc.vertex.has_value());
    CHECK(*sc.vertex == 0);
    CHECK(!sc.point.has_value());
    REQUIRE(sc.times.size() == 2);
    CHECK(sc.times[0] == 0.01);
    CHECK(sc.times[1] == 0.002);
}

TEST_CASE("parse errors carry the origin and line number") {
    using Catch = ConfigError;
    // no graph at all
    CHECK_THROWS_WITH_AS(parse_scenario_text("experiment spectrum\n", "cfg"),
                         "cfg: missing graph directive", Catch);
    // duplicate graph (second one on line 2)
    CHECK_THROWS_WITH_AS(
        parse_scenario_text("graph builtin interval\ngraph builtin interval\n", "cfg"),
        "cfg:2: duplicate graph directive", Catch);
    // unknown directive, line 2
    CHECK_THROWS_WITH_AS(parse_scenario_text("graph builtin interval\nflurb 3\n", "cfg"),
                         "cfg:2: unknown directive 'flurb'", Catch);
    // missing conditions / experiment
    CHECK_THROWS_WITH_AS(
        parse_scenario_text("graph builtin interval\nconditions A kirchhoff\n", "cfg"),
        "cfg: missing experiment directive", Catch);
    CHECK_THROWS_WITH_AS(
        parse_scenario_text("graph builtin interval\nexperiment spectrum\n", "cfg"),
        "cfg: missing conditions for side A", Catch);
    // vertex override before the uniform conditions
    CHECK_THROWS_WITH_AS(
        parse_scenario_text("graph builtin interval\nvertex A 0 dirichlet\n", "cfg"),
        "cfg:2: set the uniform conditions for this side before vertex overrides", Catch);
    // unknown condition kind
    CHECK_THROWS_WITH_AS(
        parse_scenario_text("graph builtin interval\nconditions A robin 1\n", "cfg"),
        "cfg:2: unknown condition kind 'robin' (use delta_prime, anti_kirchhoff, delta, "
        "kirchhoff, or dirichlet)",
        Catch);
    // unknown builtin
    CHECK_THROWS_WITH_AS(parse_scenario_text("graph builtin moebius\n", "cfg"),
                         "cfg:1: unknown builtin graph 'moebius' (use interval, star, cycle, "
                         "lasso, or figure1)",
                         Catch);
    // bad numbers
    CHECK_THROWS_WITH_AS(
        parse_scenario_text("graph builtin interval\nconditions A delta_prime x\n", "cfg"),
        "cfg:2: expected a number for strength, got 'x'", Catch);
    CHECK_THROWS_WITH_AS(parse_scenario_text("graph builtin interval\n"
                                             "conditions A kirchhoff\n"
                                             "experiment spectrum\n"
                                             "eigenvalues 0\n",
                                             "cfg"),
                         "cfg:4: eigenvalue count must be positive", Catch);
}

TEST_CASE("experiment shape checks anchor to the experiment line") {
    using Catch = ConfigError;
    // compare without side B (experiment on line 3)
    CHECK_THROWS_WITH_AS(parse_scenario_text("graph builtin interval\n"
                                             "conditions A delta_prime 1\n"
                                             "experiment compare\n",
                                             "cfg"),
                         "cfg:3: compare needs conditions for side B", Catch);
    // compare with the wrong condition family
    CHECK_THROWS_WITH_AS(parse_scenario_text("graph builtin interval\n"
                                             "conditions A kirchhoff\n"
                                             "conditions B delta_prime 1\n"
                                             "experiment compare\n",
                                             "cfg"),
                         "cfg:4: compare needs delta_prime conditions with nonzero strengths on "
                         "both sides",
                         Catch);
    // weyl needs exactly one target
    CHECK_THROWS_WITH_AS(parse_scenario_text("graph builtin interval\n"
                                             "conditions A delta_prime 1\n"
                                             "experiment weyl\n",
                                             "cfg"),
                         "cfg:3: weyl needs exactly one target (vertex or point)", Catch);
    CHECK_THROWS_WITH_AS(parse_scenario_text("graph builtin interval\n"
                                             "conditions A delta_prime 1\n"
                                             "experiment weyl\n"
                                             "target vertex 0\n"
                                             "target point 0 0.5\n",
                                             "cfg"),
                         "cfg:3: weyl needs exactly one target (vertex or point)", Catch);
    // target validation happens at the directive itself
    CHECK_THROWS_WITH_AS(parse_scenario_text("graph builtin interval\n"
                                             "conditions A kirchhoff\n"
                                             "experiment heat\n"
                                             "target point 0 1.5\n",
                                             "cfg"),
                         "cfg:4: target point must be interior to its edge", Catch);
}

TEST_CASE("reading a missing scenario file fails cleanly") {
    CHECK_THROWS_WITH_AS(read_scenario_file("/nonexistent/qgraph.cfg"),
                         "/nonexistent/qgraph.cfg: cannot open scenario file", ConfigError);
}

TEST_CASE("builtin listing names every graph family") {
    for (bool machine : {false, true}) {
        const std::string text = list_builtins_text(machine);
        for (const char* name : {"interval", "star", "cycle", "lasso", "figure1"})
            CHECK(text.find(name) != std::string::npos);
    }
}

TEST_CASE("runs succeed, fail verdicts, and fail certificates by exit code") {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "qgraph_scenario_test";
    fs::remove_all(base);

    // clean run: certified spectrum, exit 0, deterministic outputs
    const Scenario ok = parse_scenario_text("graph builtin interval 1\n"
                                            "conditions A kirchhoff\n"
                                            "experiment spectrum\n"
                                            "eigenvalues 8\n",
                                            "ok.cfg");
    SecularOptions opts;
    const RunOutcome r1 = run_scenario(ok, (base / "run1").string(), opts, 7);
    CHECK(r1.exit_code == kExitOk);
    CHECK(r1.report.find("result: PASS") != std::string::npos);
    CHECK(slurp(base / "run1" / "report.txt") == r1.report);
    const RunOutcome r2 = run_scenario(ok, (base / "run2").string(), opts, 7);
    CHECK(slurp(base / "run1" / "spectrum_A.csv") == slurp(base / "run2" / "spectrum_A.csv"));
    CHECK(r2.report == r1.report);

    // verdict failure: an intentionally non-matching isospectral pair
    // (delta_prime(1) pairs with delta(1), not with Dirichlet)
    const Scenario bad = parse_scenario_text("graph builtin interval 1\n"
                                             "conditions A delta_prime 1\n"
                                             "conditions B dirichlet\n"
                                             "experiment isospectral\n"
                                             "eigenvalues 6\n",
                                             "bad.cfg");
    const RunOutcome rv = run_scenario(bad, (base / "verdict").string(), opts, 7);
    CHECK(rv.exit_code == kExitVerdict);
    CHECK(rv.report.find("verdict: FAIL") != std::string::npos);
    CHECK(rv.report.find("result: FAIL") != std::string::npos);

    // certificate failure: the completeness check is forced to refuse
    // its mesh, so the spectrum cannot be certified
    SecularOptions starved = opts;
    starved.certificate_dof_cap = 1.0;
    const RunOutcome rc = run_scenario(ok, (base / "cert").string(), starved, 7);
    CHECK(rc.exit_code == kExitCertificate);
    CHECK(rc.report.find("certificate failure") != std::string::npos);

    fs::remove_all(base);
}
