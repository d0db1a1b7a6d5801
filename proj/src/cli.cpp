#include "qgraph/cli.hpp"

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qgraph/scenario.hpp"

namespace qgraph {

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"spectral experiments on compact metric graphs"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    int jobs = 0;
    unsigned seed = 0;
    CLI::App* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("config", config, "scenario file")->required();
    run->add_option("-o,--output", out_dir, "output directory for CSVs and report.txt")
        ->required();
    run->add_option("--jobs", jobs, "worker threads (0 = library default)");
    run->add_option("--seed", seed, "run seed, recorded in the report");

    bool machine = false;
    CLI::App* lb = app.add_subcommand("list-builtins", "list the builtin graphs");
    lb->add_flag("--machine", machine, "machine-readable output (name,parameters,description)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (lb->parsed()) {
        std::cout << list_builtins_text(machine);
        return kExitOk;
    }

    try {
        const Scenario sc = read_scenario_file(config);
        SecularOptions opts;
        opts.jobs = jobs;
        const RunOutcome outcome = run_scenario(sc, out_dir, opts, seed);
        std::cout << outcome.report;
        return outcome.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace qgraph
