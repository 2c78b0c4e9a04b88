#include "qbeam/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace qbeam {

namespace {

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line;
    std::size_t key_column;
    std::size_t value_column;

    std::string dotted() const { return section.empty() ? key : section + "." + key; }
};

const std::map<std::string, std::vector<std::string>, std::less<>>& known_keys() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> keys = {
        {"", {"scenario", "s_end", "output_cadence", "output_dir", "seed", "snapshot_count"}},
        {"strength", {"constant", "modulated", "exponential", "table"}},
        {"emittance", {"constant", "exponential", "table"}},
        {"beam", {"sigma0", "x0", "p0", "dsigma0"}},
        {"grid", {"x_min", "x_max", "n_cells"}},
        {"ode", {"method", "step", "abs_tol", "rel_tol"}},
        {"fluid", {"cfl", "boundary", "vacuum_rel"}},
        {"quantum", {"step", "phase_convention"}},
        {"dissipative", {"K0", "gamma", "sigma0"}},
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t leading_blanks(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    return b == std::string_view::npos ? s.size() : b;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

template <typename Int>
std::optional<Int> to_integer(std::string_view s) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

std::vector<std::string> split_blanks(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::vector<std::string> out;
    for (std::string w; in >> w;) {
        out.push_back(w);
    }
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) { tokenize(text); }

    ScenarioConfig run() {
        ScenarioKind kind = ScenarioKind::MatchedCoherent;
        if (const Entry* e = find("", "scenario")) {
            if (auto k = scenario_from_name(e->value)) {
                kind = *k;
            } else {
                issue(*e, "unknown scenario '" + e->value + "'");
            }
        } else {
            issues_.push_back({0, 0, "scenario", "missing required key"});
        }
        cfg_ = default_config(kind);

        apply_top();
        apply_strength();
        apply_emittance();
        apply_beam();
        apply_grid();
        apply_ode();
        apply_fluid();
        apply_quantum();
        apply_dissipative();
        if (issues_.empty()) {
            check_scenario();
        }
        if (!issues_.empty()) {
            throw ConfigError(std::move(issues_));
        }
        return cfg_;
    }

private:
    void tokenize(std::string_view text) {
        std::string section;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto end = std::min(text.find('\n', pos), text.size());
            std::string_view raw = text.substr(pos, end - pos);
            pos = end + 1;
            ++line_no;
            if (const auto hash = raw.find_first_of("#;"); hash != std::string_view::npos) {
                raw = raw.substr(0, hash);
            }
            const std::string line = trim(raw);
            if (line.empty()) {
                continue;
            }
            const std::size_t col = leading_blanks(raw) + 1;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    issues_.push_back({line_no, col, "", "unterminated section header"});
                    continue;
                }
                section = trim(std::string_view(line).substr(1, line.size() - 2));
                if (section.empty() || !known_keys().contains(section)) {
                    issues_.push_back({line_no, col, section, "unknown section [" + section + "]"});
                }
                continue;
            }
            const auto eq = raw.find('=');
            if (eq == std::string_view::npos) {
                issues_.push_back({line_no, col, "", "expected 'key = value'"});
                continue;
            }
            Entry e{section, trim(raw.substr(0, eq)), trim(raw.substr(eq + 1)), line_no, col,
                    eq + 1 + leading_blanks(raw.substr(eq + 1)) + 1};
            if (e.key.empty()) {
                issue(e, "empty key");
                continue;
            }
            const auto known = known_keys().find(section);
            if (known == known_keys().end()) {
                continue; // already reported with the section header
            }
            if (std::find(known->second.begin(), known->second.end(), e.key) == known->second.end()) {
                issues_.push_back({e.line, e.key_column, e.dotted(), "unknown key"});
                continue;
            }
            if (find(e.section, e.key) != nullptr) {
                issues_.push_back({e.line, e.key_column, e.dotted(), "duplicate key"});
                continue;
            }
            if (e.value.empty()) {
                issue(e, "empty value");
                continue;
            }
            entries_.push_back(std::move(e));
        }
    }

    const Entry* find(std::string_view section, std::string_view key) const {
        for (const auto& e : entries_) {
            if (e.section == section && e.key == key) {
                return &e;
            }
        }
        return nullptr;
    }

    std::vector<const Entry*> in_section(std::string_view section) const {
        std::vector<const Entry*> out;
        for (const auto& e : entries_) {
            if (e.section == section) {
                out.push_back(&e);
            }
        }
        return out;
    }

    void issue(const Entry& e, std::string message) {
        issues_.push_back({e.line, e.value_column, e.dotted(), std::move(message)});
    }

    std::optional<double> number(const Entry& e) {
        auto v = to_double(e.value);
        if (!v) {
            issue(e, "expected a number, got '" + e.value + "'");
        }
        return v;
    }

    std::optional<std::vector<double>> numbers(const Entry& e, std::size_t min_count, std::size_t max_count) {
        const auto words = split_blanks(e.value);
        if (words.size() < min_count || words.size() > max_count) {
            issue(e, min_count == max_count
                         ? "expected " + std::to_string(min_count) + " numbers"
                         : "expected " + std::to_string(min_count) + " to " + std::to_string(max_count) + " numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& w : words) {
            auto v = to_double(w);
            if (!v) {
                issue(e, "expected a number, got '" + w + "'");
                return std::nullopt;
            }
            out.push_back(*v);
        }
        return out;
    }

    // "s:v, s:v, ..."
    std::optional<std::pair<std::vector<double>, std::vector<double>>> table(const Entry& e) {
        std::vector<double> s;
        std::vector<double> v;
        std::string_view rest = e.value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string item = trim(rest.substr(0, comma));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            const auto colon = item.find(':');
            const auto a = colon == std::string::npos ? std::nullopt : to_double(trim(item.substr(0, colon)));
            const auto b = colon == std::string::npos ? std::nullopt : to_double(trim(item.substr(colon + 1)));
            if (!a || !b) {
                issue(e, "expected 's:value' pairs separated by commas, got '" + item + "'");
                return std::nullopt;
            }
            s.push_back(*a);
            v.push_back(*b);
        }
        return std::make_pair(std::move(s), std::move(v));
    }

    // Runs a profile/settings constructor and turns its exception into an issue.
    template <typename F>
    void guarded(const Entry& e, F&& f) {
        try {
            f();
        } catch (const Error& err) {
            issue(e, err.what());
        }
    }

    // At most one kind key per profile section.
    const Entry* single_kind(std::string_view section) {
        const auto entries = in_section(section);
        if (entries.size() > 1) {
            std::string keys;
            for (const Entry* e : entries) {
                keys += (keys.empty() ? "" : ", ") + e->key;
            }
            issues_.push_back({entries[1]->line, entries[1]->key_column, std::string(section),
                               "ambiguous profile: more than one kind given (" + keys + ")"});
            return nullptr;
        }
        return entries.empty() ? nullptr : entries.front();
    }

    void apply_top() {
        if (const Entry* e = find("", "s_end")) {
            if (auto v = number(*e)) {
                if (*v > 0.0) {
                    cfg_.s_end = *v;
                } else {
                    issue(*e, "must be > 0");
                }
            }
        }
        if (const Entry* e = find("", "output_cadence")) {
            if (auto v = number(*e)) {
                if (*v > 0.0) {
                    cfg_.output_cadence = *v;
                } else {
                    issue(*e, "must be > 0");
                }
            }
        }
        if (const Entry* e = find("", "output_dir")) {
            cfg_.output_dir = e->value;
        }
        if (const Entry* e = find("", "seed")) {
            if (auto v = to_integer<std::int64_t>(e->value)) {
                cfg_.seed = *v;
            } else {
                issue(*e, "expected an integer, got '" + e->value + "'");
            }
        }
        if (const Entry* e = find("", "snapshot_count")) {
            auto v = to_integer<std::size_t>(e->value);
            if (!v || *v < 2) {
                issue(*e, "expected an integer >= 2, got '" + e->value + "'");
            } else {
                cfg_.snapshot_count = *v;
            }
        }
    }

    void apply_strength() {
        const Entry* e = single_kind("strength");
        if (e == nullptr) {
            return;
        }
        if (e->key == "constant") {
            if (auto v = number(*e)) {
                guarded(*e, [&] { cfg_.strength = StrengthProfile::constant(*v); });
            }
        } else if (e->key == "modulated") {
            if (auto v = numbers(*e, 3, 4)) {
                const auto& p = *v;
                guarded(*e, [&] {
                    cfg_.strength = StrengthProfile::modulated(p[0], p[1], p[2], p.size() == 4 ? p[3] : 0.0);
                });
            }
        } else if (e->key == "exponential") {
            if (auto v = numbers(*e, 2, 2)) {
                guarded(*e, [&] { cfg_.strength = StrengthProfile::exponential((*v)[0], (*v)[1]); });
            }
        } else if (auto t = table(*e)) {
            guarded(*e, [&] { cfg_.strength = StrengthProfile::tabulated(t->first, t->second); });
        }
    }

    void apply_emittance() {
        const Entry* e = single_kind("emittance");
        if (e == nullptr) {
            return;
        }
        if (e->key == "constant") {
            if (auto v = number(*e)) {
                guarded(*e, [&] { cfg_.emittance = EmittanceProfile::constant(*v); });
            }
        } else if (e->key == "exponential") {
            if (auto v = numbers(*e, 2, 2)) {
                guarded(*e, [&] { cfg_.emittance = EmittanceProfile::exponential((*v)[0], (*v)[1]); });
            }
        } else if (auto t = table(*e)) {
            guarded(*e, [&] { cfg_.emittance = EmittanceProfile::tabulated(t->first, t->second); });
        }
    }

    void apply_beam() {
        if (const Entry* e = find("beam", "sigma0")) {
            if (auto v = number(*e)) {
                if (*v > 0.0) {
                    cfg_.beam.sigma0 = *v;
                } else {
                    issue(*e, "must be > 0");
                }
            }
        }
        for (auto [key, field] : {std::pair{"x0", &BeamConfig::x0}, std::pair{"p0", &BeamConfig::p0},
                                  std::pair{"dsigma0", &BeamConfig::dsigma0}}) {
            if (const Entry* e = find("beam", key)) {
                if (auto v = number(*e)) {
                    cfg_.beam.*field = *v;
                }
            }
        }
    }

    void apply_grid() {
        if (const Entry* e = find("grid", "x_min")) {
            if (auto v = number(*e)) {
                cfg_.grid.x_min = *v;
            }
        }
        if (const Entry* e = find("grid", "x_max")) {
            if (auto v = number(*e)) {
                cfg_.grid.x_max = *v;
            }
        }
        if (const Entry* e = find("grid", "n_cells")) {
            if (auto v = to_integer<std::size_t>(e->value)) {
                cfg_.grid.n_cells = *v;
            } else {
                issue(*e, "expected a positive integer, got '" + e->value + "'");
            }
        }
        const auto entries = in_section("grid");
        if (!entries.empty()) {
            guarded(*entries.front(), [&] { cfg_.grid.validate(); });
        }
    }

    void apply_ode() {
        if (const Entry* e = find("ode", "method")) {
            if (e->value == "rk4") {
                cfg_.ode.method = OdeMethod::Rk4Fixed;
            } else if (e->value == "rk45") {
                cfg_.ode.method = OdeMethod::Rk45Adaptive;
            } else {
                issue(*e, "expected 'rk4' or 'rk45', got '" + e->value + "'");
            }
        }
        for (auto [key, field] : {std::pair{"step", &OdeSettings::step}, std::pair{"abs_tol", &OdeSettings::abs_tol},
                                  std::pair{"rel_tol", &OdeSettings::rel_tol}}) {
            if (const Entry* e = find("ode", key)) {
                if (auto v = number(*e)) {
                    if (*v > 0.0) {
                        cfg_.ode.*field = *v;
                    } else {
                        issue(*e, "must be > 0");
                    }
                }
            }
        }
    }

    void apply_fluid() {
        if (const Entry* e = find("fluid", "cfl")) {
            if (auto v = number(*e)) {
                if (*v > 0.0 && *v <= 0.5) {
                    cfg_.fluid.cfl = *v;
                } else {
                    issue(*e, "must lie in (0, 0.5]");
                }
            }
        }
        if (const Entry* e = find("fluid", "vacuum_rel")) {
            if (auto v = number(*e)) {
                if (*v >= 0.0 && *v < 1.0) {
                    cfg_.fluid.vacuum_rel = *v;
                } else {
                    issue(*e, "must lie in [0, 1)");
                }
            }
        }
        if (const Entry* e = find("fluid", "boundary")) {
            if (e->value == "outflow") {
                cfg_.fluid.boundary = Boundary::Outflow;
            } else if (e->value == "periodic") {
                cfg_.fluid.boundary = Boundary::Periodic;
            } else {
                issue(*e, "expected 'outflow' or 'periodic', got '" + e->value + "'");
            }
        }
    }

    void apply_quantum() {
        if (const Entry* e = find("quantum", "step")) {
            if (auto v = number(*e)) {
                if (*v > 0.0) {
                    cfg_.quantum.step = *v;
                } else {
                    issue(*e, "must be > 0");
                }
            }
        }
        if (const Entry* e = find("quantum", "phase_convention")) {
            if (e->value == "full") {
                cfg_.quantum.convention = PhaseConvention::Full;
            } else if (e->value == "half") {
                cfg_.quantum.convention = PhaseConvention::Half;
            } else {
                issue(*e, "expected 'full' or 'half', got '" + e->value + "'");
            }
        }
    }

    void apply_dissipative() {
        const auto entries = in_section("dissipative");
        if (entries.empty()) {
            return;
        }
        if (cfg_.scenario != ScenarioKind::DissipativeCoherent) {
            issues_.push_back({entries.front()->line, entries.front()->key_column, "dissipative",
                               "only valid for scenario dissipative_coherent"});
            return;
        }
        for (const char* section : {"strength", "emittance"}) {
            const auto clash = in_section(section);
            if (!clash.empty()) {
                issues_.push_back({clash.front()->line, clash.front()->key_column, section,
                                   "conflicts with [dissipative], which builds the coupled profiles"});
            }
        }
        DissipativeConfig d = cfg_.dissipative.value_or(DissipativeConfig{});
        for (auto [key, field] : {std::pair{"K0", &DissipativeConfig::k0}, std::pair{"gamma", &DissipativeConfig::gamma},
                                  std::pair{"sigma0", &DissipativeConfig::sigma0}}) {
            if (const Entry* e = find("dissipative", key)) {
                if (auto v = number(*e)) {
                    d.*field = *v;
                }
            }
        }
        guarded(*entries.front(), [&] {
            const auto p = coupled_dissipative_profiles(d.k0, d.gamma, d.sigma0);
            cfg_.strength = p.strength;
            cfg_.emittance = p.emittance;
            cfg_.dissipative = d;
        });
    }

    void scenario_issue(std::string_view section, std::string message) {
        const auto entries = in_section(section);
        if (entries.empty()) {
            issues_.push_back({0, 0, std::string(section), std::move(message)});
        } else {
            issues_.push_back({entries.front()->line, entries.front()->key_column, std::string(section),
                               std::move(message)});
        }
    }

    void check_scenario() {
        const ScenarioKind kind = cfg_.scenario;
        const std::string name(scenario_name(kind));
        if (cfg_.output_cadence > cfg_.s_end) {
            scenario_issue("", "output_cadence exceeds s_end");
        }
        if (kind == ScenarioKind::DissipativeCoherent) {
            for (const char* section : {"strength", "emittance"}) {
                if (!in_section(section).empty() && in_section("dissipative").empty()) {
                    scenario_issue(section, "dissipative_coherent takes its profiles from [dissipative]");
                }
            }
            if (cfg_.beam.sigma0 || cfg_.beam.dsigma0 != 0.0) {
                scenario_issue("beam", "dissipative_coherent is matched by construction; set dissipative.sigma0 "
                                       "instead of beam.sigma0 or beam.dsigma0");
            }
        }
        const bool coherent = kind == ScenarioKind::MatchedCoherent || kind == ScenarioKind::FluidVsQuantum;
        if (coherent || kind == ScenarioKind::FreeExpansion) {
            if (!cfg_.strength.is_constant() || !cfg_.emittance.is_constant()) {
                scenario_issue("strength", name + " needs constant strength and emittance");
                return;
            }
        }
        const double k = cfg_.strength(0.0);
        if (kind == ScenarioKind::FreeExpansion && k != 0.0) {
            scenario_issue("strength", "free_expansion needs strength constant = 0");
        }
        if (coherent) {
            if (!(k > 0.0)) {
                scenario_issue("strength", name + " needs a focusing strength > 0");
                return;
            }
            if (cfg_.beam.sigma0) {
                const double matched = matched_sigma(k, cfg_.emittance(0.0));
                if (std::abs(*cfg_.beam.sigma0 - matched) > 1e-12 * matched) {
                    scenario_issue("beam", "sigma0 is not matched; K sigma0^4 = eps^2/4 needs sigma0 = " +
                                               std::to_string(matched));
                }
            }
            if (cfg_.beam.dsigma0 != 0.0) {
                scenario_issue("beam", name + " needs dsigma0 = 0");
            }
        }
        if (kind != ScenarioKind::MatchedCoherent && kind != ScenarioKind::FluidVsQuantum &&
            kind != ScenarioKind::DissipativeCoherent && !cfg_.beam.sigma0 && !(k > 0.0)) {
            scenario_issue("beam", "sigma0 is required when the strength vanishes");
        }
        if (kind == ScenarioKind::EnvelopeOnly) {
            return;
        }
        try {
            const GaussianBeamState st = cfg_.initial_state();
            const double reach = 6.0 * st.sigma;
            if (cfg_.grid.x_min > st.x0 - reach || cfg_.grid.x_max < st.x0 + reach) {
                scenario_issue("grid", "grid must cover x0 +- 6 sigma0 = [" + std::to_string(st.x0 - reach) + ", " +
                                           std::to_string(st.x0 + reach) + "]");
            }
        } catch (const Error& err) {
            scenario_issue("beam", err.what());
        }
    }

    std::vector<Entry> entries_;
    std::vector<ConfigIssue> issues_;
    ScenarioConfig cfg_;
};

} // namespace

std::string_view scenario_name(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::MatchedCoherent:
        return "matched_coherent";
    case ScenarioKind::MismatchedBreathing:
        return "mismatched_breathing";
    case ScenarioKind::DissipativeCoherent:
        return "dissipative_coherent";
    case ScenarioKind::FreeExpansion:
        return "free_expansion";
    case ScenarioKind::FluidVsQuantum:
        return "fluid_vs_quantum";
    case ScenarioKind::EnvelopeOnly:
        return "envelope_only";
    }
    return "unknown";
}

std::optional<ScenarioKind> scenario_from_name(std::string_view name) {
    for (ScenarioKind k : kAllScenarios) {
        if (scenario_name(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::string_view scenario_summary(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::MatchedCoherent:
        return "matched Gaussian in a constant well: envelope ODE and wave equation, sigma stays at sigma0";
    case ScenarioKind::MismatchedBreathing:
        return "unmatched Gaussian: breathing envelope, emittance conservation, classicality of the wave";
    case ScenarioKind::DissipativeCoherent:
        return "coupled exponential K and eps: generalized coherent state, energy and current-velocity balance";
    case ScenarioKind::FreeExpansion:
        return "K = 0 dispersion of a Gaussian against the closed-form width";
    case ScenarioKind::FluidVsQuantum:
        return "matched coherent beam evolved by the fluid and the wave solver, with a grid refinement study";
    case ScenarioKind::EnvelopeOnly:
        return "envelope and centroid ODEs for arbitrary profiles, with a step-halving order check";
    }
    return "";
}

std::string ConfigIssue::format() const {
    std::string out;
    if (line > 0) {
        out += "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
    }
    if (!key.empty()) {
        out += key + ": ";
    }
    return out + message;
}

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error([&] {
          std::string what = std::to_string(issues.size()) + " config error(s)";
          for (const auto& i : issues) {
              what += "\n  " + i.format();
          }
          return what;
      }()),
      issues_(std::move(issues)) {}

GaussianBeamState ScenarioConfig::initial_state() const {
    GaussianBeamState st;
    st.x0 = beam.x0;
    st.p0 = beam.p0;
    st.dsigma = beam.dsigma0;
    if (dissipative) {
        st.sigma = dissipative->sigma0;
    } else if (beam.sigma0) {
        st.sigma = *beam.sigma0;
    } else {
        st.sigma = matched_sigma(strength(0.0), emittance(0.0));
    }
    return st;
}

ScenarioConfig default_config(ScenarioKind kind) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    ScenarioConfig c;
    c.scenario = kind;
    c.beam.x0 = 0.05;
    c.s_end = two_pi;
    c.output_cadence = 0.05;
    switch (kind) {
    case ScenarioKind::MatchedCoherent:
        c.s_end = 10.0 * two_pi;
        // ten periods: the splitting phase error accumulates, so halve the step
        c.quantum.step = 5e-3;
        break;
    case ScenarioKind::MismatchedBreathing:
        c.beam.sigma0 = 0.15;
        c.beam.x0 = 0.0;
        c.grid = GridSpec{-1.5, 1.5, 2048};
        break;
    case ScenarioKind::DissipativeCoherent: {
        c.dissipative = DissipativeConfig{};
        const auto p = coupled_dissipative_profiles(1.0, 0.01, 0.1);
        c.strength = p.strength;
        c.emittance = p.emittance;
        c.s_end = 2.0 * two_pi;
        c.output_cadence = 0.01;
        break;
    }
    case ScenarioKind::FreeExpansion:
        c.strength = StrengthProfile::constant(0.0);
        c.beam.sigma0 = 0.1;
        c.beam.x0 = 0.0;
        c.grid = GridSpec{-12.0, 12.0, 4096};
        c.s_end = 10.0;
        c.output_cadence = 0.1;
        break;
    case ScenarioKind::FluidVsQuantum:
        c.output_cadence = two_pi / 16.0;
        break;
    case ScenarioKind::EnvelopeOnly:
        c.strength = StrengthProfile::modulated(1.0, 0.1, 1.0, 0.0);
        c.beam.sigma0 = 0.1;
        break;
    }
    return c;
}

ScenarioConfig parse_config(std::string_view text) {
    return Parser(text).run();
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError({{0, 0, "", "cannot read config file " + path.string()}});
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

} // namespace qbeam
