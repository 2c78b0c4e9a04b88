// qbeam: run, validate and list beam scenarios.
//
// Exit status: 0 all metrics pass, 1 some metric fails, 2 config or usage
// error, 3 solver error.

#include "qbeam/config.hpp"
#include "qbeam/errors.hpp"
#include "qbeam/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

void print_report(const qbeam::RunReport& report) {
    for (const auto& m : report.metrics) {
        std::printf("  %-4s %-36s %-12.4g %s %-8.3g %s\n", m.criterion.c_str(), m.name.c_str(), m.value,
                    m.comparison == qbeam::Comparison::Below ? "< " : ">=", m.threshold,
                    m.passed() ? "pass" : "FAIL");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian beam dynamics: envelope ODE, fluid and wave-equation solvers"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> output_dir;
    std::optional<double> cadence;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run the scenario described by a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--output-dir", output_dir, "directory for CSV and JSON artifacts (overrides output_dir)");
    run->add_option("--cadence", cadence, "output cadence in s (overrides output_cadence)")
        ->check(CLI::PositiveNumber);
    run->add_flag("--quiet,-q", quiet, "print only the final status line");

    auto* validate = app.add_subcommand("validate", "parse and validate a config file without running it");
    validate->add_option("config", config_path, "config file")->required();

    auto* list = app.add_subcommand("list-scenarios", "list the available scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }

    if (list->parsed()) {
        for (qbeam::ScenarioKind k : qbeam::kAllScenarios) {
            std::printf("%-22s %s\n", std::string(qbeam::scenario_name(k)).c_str(),
                        std::string(qbeam::scenario_summary(k)).c_str());
        }
        return kPass;
    }

    qbeam::ScenarioConfig config;
    try {
        config = qbeam::load_config(config_path);
        if (output_dir) {
            config.output_dir = *output_dir;
        }
        if (cadence) {
            if (*cadence > config.s_end) {
                throw qbeam::ConfigError({{0, 0, "--cadence", "exceeds s_end"}});
            }
            config.output_cadence = *cadence;
        }
    } catch (const qbeam::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return kConfigError;
    }

    if (validate->parsed()) {
        std::printf("%s: ok (scenario %s)\n", config_path.c_str(),
                    std::string(qbeam::scenario_name(config.scenario)).c_str());
        return kPass;
    }

    qbeam::RunOptions options;
    if (!quiet) {
        options.log = [](std::string_view msg) { std::cerr << "  .. " << msg << '\n'; };
    }
    try {
        const qbeam::RunReport report = qbeam::run_scenario(config, options);
        if (!quiet) {
            print_report(report);
        }
        std::printf("%s: %s (%s)\n", std::string(qbeam::scenario_name(config.scenario)).c_str(),
                    report.passed() ? "pass" : "fail", config.output_dir.string().c_str());
        return report.passed() ? kPass : kFail;
    } catch (const qbeam::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolverError;
    } catch (const qbeam::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolverError;
    }
}
