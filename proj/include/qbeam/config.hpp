#pragma once

// Scenario configuration: an INI-style text of `key = value` lines grouped
// in [sections]. The grammar is documented in README.md.

#include "qbeam/coherent.hpp"
#include "qbeam/envelope.hpp"
#include "qbeam/errors.hpp"
#include "qbeam/fluid.hpp"
#include "qbeam/grid.hpp"
#include "qbeam/profiles.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qbeam {

enum class ScenarioKind {
    MatchedCoherent,
    MismatchedBreathing,
    DissipativeCoherent,
    FreeExpansion,
    FluidVsQuantum,
    EnvelopeOnly,
};

inline constexpr std::array<ScenarioKind, 6> kAllScenarios = {
    ScenarioKind::MatchedCoherent, ScenarioKind::MismatchedBreathing, ScenarioKind::DissipativeCoherent,
    ScenarioKind::FreeExpansion,   ScenarioKind::FluidVsQuantum,      ScenarioKind::EnvelopeOnly,
};

std::string_view scenario_name(ScenarioKind kind);
std::optional<ScenarioKind> scenario_from_name(std::string_view name);
/// One-line description for list-scenarios.
std::string_view scenario_summary(ScenarioKind kind);

struct ConfigIssue {
    std::size_t line = 0;   ///< 1-based; 0 when the issue is not tied to a line
    std::size_t column = 0; ///< 1-based
    std::string key;        ///< dotted key, e.g. "emittance.constant"
    std::string message;

    std::string format() const;
};

/// Every problem found in a config text, not just the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

struct BeamConfig {
    std::optional<double> sigma0; ///< unset: matched value (or the scenario default)
    double x0 = 0.0;
    double p0 = 0.0;
    double dsigma0 = 0.0;
};

struct DissipativeConfig {
    double k0 = 1.0;
    double gamma = 0.01;
    double sigma0 = 0.1;
};

struct QuantumConfig {
    double step = 1e-2;
    PhaseConvention convention = PhaseConvention::Full;
};

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::MatchedCoherent;
    StrengthProfile strength = StrengthProfile::constant(1.0);
    EmittanceProfile emittance = EmittanceProfile::constant(0.02);
    /// Set for dissipative_coherent; strength and emittance are then the
    /// coupled profiles built from it.
    std::optional<DissipativeConfig> dissipative;
    BeamConfig beam;
    GridSpec grid;
    OdeSettings ode;
    FluidSettings fluid;
    QuantumConfig quantum;
    double s_end = 0.0;
    double output_cadence = 0.0;
    std::size_t snapshot_count = 5;
    std::filesystem::path output_dir = "out";
    /// Reserved; every scenario is deterministic.
    std::int64_t seed = 0;

    /// Initial Gaussian state implied by the beam section and the profiles.
    GaussianBeamState initial_state() const;
};

/// Parses and validates. Throws ConfigError listing every issue.
ScenarioConfig parse_config(std::string_view text);

/// Reads the file and parses it. I/O failures are reported as ConfigError.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Defaults filled in for a scenario before the file is applied.
ScenarioConfig default_config(ScenarioKind kind);

} // namespace qbeam
