// gsr: venue ranking pipeline CLI.
// Exit codes: 0 = success, 1 = runtime failure (including partial venue
// failures), 2 = configuration error.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gsr/pipeline.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> out;
    std::string current;
    for (char c : value) {
        if (c == ',') {
            if (!current.empty()) out.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gsr: open-data venue ranking engine"};
    app.require_subcommand(1);
    app.fallthrough();  // --config may follow the subcommand

    std::string config_path;
    app.add_option("--config", config_path, "Path to the run configuration JSON")
        ->required();

    auto* fetch = app.add_subcommand("fetch", "Fetch paper records into snapshot files");
    bool force = false;
    std::string venue_filter;
    fetch->add_flag("--force", force, "Re-fetch venues that already have snapshots");
    fetch->add_option("--venues", venue_filter, "Comma-separated venue ids to fetch");

    auto* calibrate =
        app.add_subcommand("calibrate", "Measure the citation-ratio calibration coefficient");
    double coefficient = 0.0;
    auto* coefficient_opt = calibrate->add_option(
        "--coefficient", coefficient, "Skip measurement and use this coefficient");

    auto* score = app.add_subcommand("score", "Compute indicators, scores, and quartiles");
    auto* score_coefficient_opt =
        score->add_option("--coefficient", coefficient, "Override the calibration coefficient");

    auto* validate = app.add_subcommand("validate", "Compare the ranking to reference labels");
    std::string labels_path;
    validate->add_option("--labels", labels_path, "Reference labels CSV (venue_id,system,class)");

    auto* sensitivity =
        app.add_subcommand("sensitivity", "Sweep the calibration coefficient and count changes");
    std::string range_spec = "0.50:1.00:0.05";
    sensitivity->add_option("--range", range_spec, "Sweep range as lo:hi:step");
    auto* sens_coefficient_opt = sensitivity->add_option("--coefficient", coefficient,
                                                         "Baseline coefficient for the sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        gsr::RunConfig config = gsr::load_run_config(config_path);
        if ((coefficient_opt->count() > 0 && calibrate->parsed()) ||
            (score_coefficient_opt->count() > 0 && score->parsed()) ||
            (sens_coefficient_opt->count() > 0 && sensitivity->parsed())) {
            if (!(coefficient > 0.0 && coefficient <= 1.0)) {
                throw gsr::ConfigError("--coefficient must be in (0, 1]");
            }
            config.coefficient_override = coefficient;
        }

        if (fetch->parsed()) {
            return gsr::cmd_fetch(config, force, split_commas(venue_filter), std::cout);
        }
        if (calibrate->parsed()) {
            return gsr::cmd_calibrate(config, std::cout);
        }
        if (score->parsed()) {
            return gsr::cmd_score(config, std::cout);
        }
        if (validate->parsed()) {
            return gsr::cmd_validate(config, labels_path, std::cout);
        }
        if (sensitivity->parsed()) {
            gsr::SweepRange range;
            const auto first = range_spec.find(':');
            const auto second = range_spec.find(':', first + 1);
            if (first == std::string::npos || second == std::string::npos) {
                throw gsr::ConfigError("--range must be lo:hi:step");
            }
            try {
                range.lo = std::stod(range_spec.substr(0, first));
                range.hi = std::stod(range_spec.substr(first + 1, second - first - 1));
                range.step = std::stod(range_spec.substr(second + 1));
            } catch (const std::exception&) {
                throw gsr::ConfigError("--range must be lo:hi:step with numeric parts");
            }
            return gsr::cmd_sensitivity(config, range, std::cout);
        }
    } catch (const gsr::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
