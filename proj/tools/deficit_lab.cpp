// deficit-lab <experiment> --config <path> [--output-dir <path>]
//
// Exit status: 0 when every check passes, 1 when a check fails or an
// experiment aborts, 2 on a usage or input error.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "deficit/cli.hpp"
#include "deficit/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Batch runner for the heat-flow deficit experiments"};
    std::string experiment;
    std::string config_path;
    std::string output_dir;
    app.add_option("experiment", experiment, "identities, limit-rates, slicing, entropy, projection or all")
        ->required();
    app.add_option("--config", config_path, "key=value configuration file")->required();
    app.add_option("--output-dir", output_dir, "directory for the CSV tables (overrides the config)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const auto which = deficit::parse_experiment(experiment);
    if (!which) {
        std::cerr << "unknown experiment '" << experiment << "'\n";
        return 2;
    }
    try {
        deficit::ExperimentConfig cfg = deficit::load_config(config_path);
        cfg.experiment = *which;
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        const deficit::RunResult result = deficit::run_experiment(cfg);
        deficit::write_results(result, cfg.output_dir);
        int failed = 0;
        for (const auto& c : result.checks) {
            if (c.pass) continue;
            ++failed;
            std::cerr << "FAIL " << c.experiment << " " << c.check << " [" << c.subject
                      << "] measured=" << deficit::format_number(c.measured) << " " << c.relation << " "
                      << c.threshold << "\n";
        }
        std::cout << result.checks.size() - failed << "/" << result.checks.size() << " checks passed; tables in "
                  << cfg.output_dir.string() << "\n";
        return failed == 0 ? 0 : 1;
    } catch (const deficit::Error& e) {
        std::cerr << e.what() << "\n";
        const auto k = e.kind();
        return k == deficit::ErrorKind::ConfigParse || k == deficit::ErrorKind::MixtureParse ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
