#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/conditions.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/potential.hpp"
#include "qgraph/secular.hpp"

namespace qgraph {

/// Configuration error, carrying a "file:line: message" text.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    Spectrum,      // certified eigenvalue lists
    Compare,       // mean eigenvalue distance A vs B with prediction
    Weyl,          // pointwise Weyl statistic at a vertex or interior point
    Heat,          // heat-kernel diagonal limits (plus bracketing if q != 0)
    Hadamard,      // eigenvalue shift identity along the strength/potential path
    Isospectral,   // alignment of the two spectra
    Divergence,    // Cesaro means of A - B with divergence ladder
    Bipartite,     // mean-distance lower bound on a bipartite graph
};

/// A parsed scenario: the graph, two operator sides, the experiment
/// selection, and its numeric knobs (with documented defaults).
struct Scenario {
    MetricGraph graph;
    std::string graph_desc;

    VertexConditionSet conds_a;
    Potential pot_a;
    bool has_a = false;
    std::string side_a_desc;

    VertexConditionSet conds_b;
    Potential pot_b;
    bool has_b = false;
    std::string side_b_desc;

    ExperimentKind experiment = ExperimentKind::Spectrum;
    int experiment_line = 0;
    std::string origin;

    // Knobs.
    int eigenvalues = 200;
    std::optional<GraphPoint> point;
    std::optional<int> vertex;
    std::vector<double> times{0.05, 0.02, 0.01};
    int panels = 64;
    std::optional<double> tolerance;         // verdict tolerance override
    std::vector<double> ladder{0.5, 0.25, 0.125, 0.0625};
    double drop_below = -1e300;              // isospectral: ignore values at or below
    std::optional<double> threshold;         // divergence: final Cesaro mean must exceed

    Scenario();
};

Scenario parse_scenario_text(const std::string& text, const std::string& origin);
Scenario read_scenario_file(const std::string& path);

/// Exit status contract shared with the command-line driver.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,    // configuration could not be parsed / validated
    kExitCertificate = 3,  // a completeness certificate failed
    kExitVerdict = 4,   // a numeric verdict failed
};

struct RunOutcome {
    int exit_code = kExitOk;
    std::string report;  // also written to <out_dir>/report.txt
};

/// Execute a scenario, writing CSV outputs and report.txt under
/// out_dir (created if missing).  Never throws for certificate or
/// verdict failures; those are encoded in exit_code.
RunOutcome run_scenario(const Scenario& sc, const std::string& out_dir,
                        const SecularOptions& opts, unsigned seed);

/// Names and signatures of the builtin graphs; machine = one
/// comma-separated line per builtin.
std::string list_builtins_text(bool machine);

}  // namespace qgraph
