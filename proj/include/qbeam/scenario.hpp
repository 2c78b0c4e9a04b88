#pragma once

// Scenario runner: wires profiles, solvers and diagnostics together and
// writes CSV artifacts plus a JSON summary of pass/fail metrics.

#include "qbeam/config.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace qbeam {

enum class Comparison { Below, AtLeast };

struct Metric {
    std::string name;
    std::string criterion; ///< acceptance criterion id, "C1" .. "C10"
    double value = 0.0;
    double threshold = 0.0;
    Comparison comparison = Comparison::Below;

    /// value < threshold (Below) or value >= threshold (AtLeast); NaN fails.
    bool passed() const;
};

struct RunReport {
    ScenarioKind scenario = ScenarioKind::MatchedCoherent;
    std::vector<Metric> metrics;
    /// Paths relative to the output directory, in write order.
    std::vector<std::string> artifacts;

    bool passed() const;
};

struct RunOptions {
    bool write_artifacts = true;
    /// Progress messages; ignored when empty.
    std::function<void(std::string_view)> log;
};

/// Runs the scenario. Solver failures are rethrown as SolverError with the
/// scenario name prepended and the failing s preserved.
RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// JSON text of summary.json (stable key order, trailing newline).
std::string summary_json(const ScenarioConfig& config, const RunReport& report);

} // namespace qbeam
