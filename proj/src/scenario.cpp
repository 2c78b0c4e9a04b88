#include "qbeam/scenario.hpp"

#include "qbeam/csv.hpp"
#include "qbeam/diagnostics.hpp"
#include "qbeam/errors.hpp"
#include "qbeam/fluid.hpp"
#include "qbeam/qsolver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace qbeam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Number of output intervals used by integrate() and SplitStepSolver::evolve
// for the same span and requested cadence.
std::size_t interval_count(double span, double cadence) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(span / cadence - 1e-9)));
}

std::set<std::size_t> snapshot_indices(std::size_t last, std::size_t count) {
    std::set<std::size_t> out;
    for (std::size_t k = 0; k < count; ++k) {
        out.insert(static_cast<std::size_t>(
            std::llround(static_cast<double>(k) * static_cast<double>(last) / static_cast<double>(count - 1))));
    }
    return out;
}

std::string numbered(const char* stem, std::size_t index) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshots/%s_%03zu.csv", stem, index);
    return buf;
}

std::vector<double> wave_density(const WaveField& w) {
    std::vector<double> n(w.psi.size());
    for (std::size_t j = 0; j < n.size(); ++j) {
        n[j] = std::norm(w.psi[j]);
    }
    return n;
}

std::vector<double> gaussian_density(const GridSpec& grid, const GaussianBeamState& st) {
    std::vector<double> n(grid.n_cells);
    for (std::size_t j = 0; j < n.size(); ++j) {
        n[j] = coherent_density(grid.x(j), st);
    }
    return n;
}

double rel(double a, double b) {
    return std::abs(a - b) / std::abs(b);
}

struct WaveRun {
    std::vector<DiagnosticsRecord> records;
    WaveField last;
    double norm_drift = 0.0; ///< max |norm - norm(0)|
    std::size_t steps = 0;
};

class Runner {
public:
    Runner(const ScenarioConfig& cfg, const RunOptions& opt) : cfg_(cfg), opt_(opt) {
        report_.scenario = cfg.scenario;
    }

    RunReport run() {
        switch (cfg_.scenario) {
        case ScenarioKind::MatchedCoherent:
            matched_coherent();
            break;
        case ScenarioKind::MismatchedBreathing:
            mismatched_breathing();
            break;
        case ScenarioKind::DissipativeCoherent:
            dissipative_coherent();
            break;
        case ScenarioKind::FreeExpansion:
            free_expansion();
            break;
        case ScenarioKind::FluidVsQuantum:
            fluid_vs_quantum();
            break;
        case ScenarioKind::EnvelopeOnly:
            envelope_only();
            break;
        }
        if (opt_.write_artifacts) {
            report_.artifacts.push_back("summary.json");
            std::filesystem::create_directories(cfg_.output_dir);
            std::ofstream out(cfg_.output_dir / "summary.json", std::ios::binary | std::ios::trunc);
            if (!out) {
                throw Error("cannot write " + (cfg_.output_dir / "summary.json").string());
            }
            out << summary_json(cfg_, report_);
        }
        return report_;
    }

private:
    void log(const std::string& message) const {
        if (opt_.log) {
            opt_.log(message);
        }
    }

    void metric(std::string name, std::string criterion, double value, double threshold,
                Comparison cmp = Comparison::Below) {
        report_.metrics.push_back({std::move(name), std::move(criterion), value, threshold, cmp});
    }

    template <typename Write>
    void artifact(const std::string& relative, Write&& write) {
        if (!opt_.write_artifacts) {
            return;
        }
        write(cfg_.output_dir / relative);
        report_.artifacts.push_back(relative);
    }

    double eps(double s) const { return cfg_.emittance(s); }
    double strength(double s) const { return cfg_.strength(s); }

    Trajectory envelope() {
        log("integrating envelope ODE");
        OdeSettings settings = cfg_.ode;
        settings.output_cadence = cfg_.output_cadence;
        Trajectory traj = integrate(cfg_.initial_state(), cfg_.strength, cfg_.emittance, cfg_.s_end, settings);
        artifact("trajectory.csv", [&](const auto& p) { write_trajectory_csv(p, traj); });
        return traj;
    }

    WaveField initial_wave(const GridSpec& grid) const {
        const GaussianBeamState st = cfg_.initial_state();
        if (cfg_.quantum.convention == PhaseConvention::Half && st.dsigma == 0.0) {
            return coherent_wave(grid, st, eps(0.0), PhaseConvention::Half);
        }
        return gaussian_wave(grid, st, eps(0.0));
    }

    // Evolves the wave on cfg.grid at the output cadence, recording moments,
    // writing snapshots, and handing each sample (with its index) to `visit`.
    WaveRun wave(const std::function<void(const WaveField&, std::size_t)>& visit) {
        log("evolving wave equation");
        const SplitStepSolver solver(cfg_.grid, cfg_.strength, cfg_.emittance);
        const WaveField w0 = initial_wave(cfg_.grid);
        const double span = cfg_.s_end - w0.s;
        const std::size_t n_out = interval_count(span, cfg_.output_cadence);
        const auto snaps = snapshot_indices(n_out, cfg_.snapshot_count);
        WaveRun run;
        run.steps = n_out * interval_count(span / static_cast<double>(n_out), cfg_.quantum.step);
        const double norm0 = w0.norm();
        std::size_t i = 0;
        run.last = solver.evolve(w0, cfg_.s_end, cfg_.quantum.step, cfg_.output_cadence, [&](const WaveField& w) {
            run.norm_drift = std::max(run.norm_drift, std::abs(w.norm() - norm0));
            run.records.push_back(moments_from_wave(w, eps(w.s), strength(w.s)));
            if (snaps.contains(i)) {
                artifact(numbered("wave", i), [&](const auto& p) { write_wave_snapshot(p, i, w, eps(w.s)); });
            }
            if (visit) {
                visit(w, i);
            }
            ++i;
        });
        artifact("diagnostics.csv", [&](const auto& p) { write_diagnostics_csv(p, run.records); });
        return run;
    }

    // Fluid run on `grid` with snapshots at the configured count.
    std::vector<FluidFields> fluid(const GridSpec& grid, bool write) {
        log("evolving fluid equations on " + std::to_string(grid.n_cells) + " cells");
        const FluidFields f0 = init_from_gaussian(grid, cfg_.initial_state(), VelocityKind::Uniform);
        const double beta = cfg_.initial_state().sigma * cfg_.initial_state().sigma;
        const double cadence = (cfg_.s_end - f0.s) / static_cast<double>(cfg_.snapshot_count - 1);
        auto out = qbeam::run(f0, cfg_.strength, [&](double s) { return beta * strength(s); }, cfg_.s_end, cadence,
                       cfg_.fluid);
        if (write) {
            for (std::size_t i = 0; i < out.size(); ++i) {
                artifact(numbered("fluid", i), [&](const auto& p) { write_fluid_snapshot(p, i, out[i]); });
            }
        }
        return out;
    }

    static void check_aligned(const GaussianBeamState& ode, const WaveField& w) {
        if (std::abs(ode.s - w.s) > 1e-9 * std::max(1.0, std::abs(w.s))) {
            throw Error("ODE and wave samples are misaligned");
        }
    }

    void norm_metric(const WaveRun& run) {
        const double per_1e4 = run.norm_drift * 1e4 / static_cast<double>(std::max<std::size_t>(run.steps, 1));
        metric("wave_norm_drift_per_1e4_steps", "C8", per_1e4, 1e-10);
    }

    // Centroid of a constant-K oscillator.
    double centroid_exact(double s) const {
        const GaussianBeamState st = cfg_.initial_state();
        const double w = std::sqrt(strength(0.0));
        return st.x0 * std::cos(w * s) + st.p0 / w * std::sin(w * s);
    }

    double ehrenfest(const Trajectory& traj, const WaveRun& run) const {
        double worst = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            worst = std::max(worst, std::abs(run.records[i].mean_x - traj[i].x0));
            scale = std::max(scale, std::abs(traj[i].x0));
        }
        return scale == 0.0 ? worst : worst / scale;
    }

    void matched_coherent() {
        const double sigma0 = cfg_.initial_state().sigma;
        const Trajectory traj = envelope();
        double sig = 0.0;
        double cen = 0.0;
        double unc = 0.0;
        double emit = 0.0;
        for (const auto& st : traj) {
            sig = std::max(sig, rel(st.sigma, sigma0));
            cen = std::max(cen, std::abs(st.x0 - centroid_exact(st.s)));
            const double e = eps(st.s);
            unc = std::max(unc, rel(st.sigma * sigma_p_envelope(st.sigma, st.dsigma, e), e / 2.0));
            emit = std::max(emit, rel(moments_from_envelope(st, e).emit_rms, e));
        }
        metric("ode_sigma_rel_dev", "C1", sig, 1e-6);
        metric("ode_centroid_abs_err", "C1", cen, 1e-8);
        metric("ode_emittance_rel_dev", "C3", emit, 1e-4);
        metric("ode_min_uncertainty_rel_dev", "C7", unc, 1e-6);

        double pde_sig = 0.0;
        double l2 = 0.0;
        const WaveRun run = wave([&](const WaveField& w, std::size_t i) {
            check_aligned(traj[i], w);
            GaussianBeamState exact = traj[i];
            exact.x0 = centroid_exact(w.s);
            exact.sigma = sigma0;
            l2 = std::max(l2, l2_distance_recentered(gaussian_density(cfg_.grid, exact), wave_density(w),
                                                     cfg_.grid.dx()));
        });
        double pde_emit = 0.0;
        for (const auto& r : run.records) {
            pde_sig = std::max(pde_sig, rel(r.sigma, sigma0));
            pde_emit = std::max(pde_emit, rel(r.emit_rms, eps(r.s)));
        }
        metric("pde_sigma_rel_dev", "C1", pde_sig, 1e-3);
        metric("pde_density_l2_recentered", "C1", l2, 1e-3);
        metric("pde_emittance_rel_dev", "C3", pde_emit, 1e-4);
        metric("pde_centroid_rel_err", "C9", ehrenfest(traj, run), 1e-4);
        norm_metric(run);
    }

    void mismatched_breathing() {
        const Trajectory traj = envelope();
        double emit = 0.0;
        for (const auto& st : traj) {
            emit = std::max(emit, rel(moments_from_envelope(st, eps(st.s)).emit_rms, eps(st.s)));
        }
        metric("ode_emittance_rel_dev", "C3", emit, 1e-4);

        double classical = 0.0;
        double control = std::numeric_limits<double>::infinity();
        double floor_margin = std::numeric_limits<double>::infinity();
        double excess_ratio = std::numeric_limits<double>::infinity();
        double sigma_dev = 0.0;
        double evolved = 0.0;
        constexpr double kBulkMask = 1e-6;
        const WaveRun run = wave([&](const WaveField& w, std::size_t i) {
            check_aligned(traj[i], w);
            const GaussianBeamState& st = traj[i];
            const double e = eps(w.s);
            const double de = emittance_log_derivative(cfg_.emittance, w.s) * e;
            const double eta = eta_from_envelope(st.sigma, st.dsigma, e, de);
            // The criterion is about the Gaussian state the envelope describes.
            // On the evolved field the third derivative of ln n amplifies
            // rounding noise in the tails, so that one is only logged, with a
            // bulk mask.
            GaussianBeamState g = st;
            g.p0 = 0.0;
            const WaveField ideal = gaussian_wave(cfg_.grid, g, e);
            classical = std::max(classical, classicality_residual(ideal, e, de, eta));
            control = std::min(control, classicality_residual(ideal, e, de, 2.0 * eta));
            evolved = std::max(evolved, classicality_residual(w, e, de, eta, kBulkMask));
        });
        std::ostringstream note;
        note << "classicality residual on the evolved field (mask " << kBulkMask << "): " << evolved;
        log(note.str());
        for (std::size_t i = 0; i < run.records.size(); ++i) {
            const auto& r = run.records[i];
            const double sp = r.sigma * r.sigma_p;
            floor_margin = std::min(floor_margin, sp - r.emit_rms / 2.0);
            sigma_dev = std::max(sigma_dev, rel(r.sigma, traj[i].sigma));
            // sigma sigma_P - eps/2 = sigma^2 sigma'^2 / (sigma sigma_P + eps/2) >= sigma^2 sigma'^2 / (2 sigma sigma_P)
            const double lever = traj[i].sigma * traj[i].dsigma;
            if (std::abs(lever) > 1e-3 * eps(r.s)) {
                excess_ratio = std::min(excess_ratio, (sp - eps(r.s) / 2.0) * 2.0 * sp / (lever * lever));
            }
        }
        double pde_emit = 0.0;
        for (const auto& r : run.records) {
            pde_emit = std::max(pde_emit, rel(r.emit_rms, eps(r.s)));
        }
        metric("pde_emittance_rel_dev", "C3", pde_emit, 1e-4);
        metric("classicality_residual", "C5", classical, 1e-5);
        metric("classicality_control_residual", "C5", control, 0.4, Comparison::AtLeast);
        metric("uncertainty_floor_margin", "C7", floor_margin, -1e-10, Comparison::AtLeast);
        metric("uncertainty_excess_ratio", "C7", excess_ratio, 0.99, Comparison::AtLeast);
        metric("pde_sigma_vs_ode_rel_err", "C9", sigma_dev, 1e-4);
        norm_metric(run);
    }

    void dissipative_coherent() {
        const DissipativeConfig d = *cfg_.dissipative;
        double gamma_err = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double s = cfg_.s_end * i / 99.0;
            gamma_err = std::max(gamma_err, std::abs(gamma_rate(cfg_.emittance, s) - cfg_.strength.log_derivative(s)));
        }
        metric("gamma_vs_log_strength_rate", "C4", gamma_err, 1e-12);

        const Trajectory traj = envelope();
        double sig = 0.0;
        for (const auto& st : traj) {
            sig = std::max(sig, rel(st.sigma, d.sigma0));
        }
        metric("ode_sigma_rel_dev", "C4", sig, 1e-6);
        metric("energy_balance_residual", "C4", energy_balance_residual(traj, cfg_.strength, cfg_.emittance), 1e-4);
        metric("current_velocity_residual", "C4", current_velocity_residual(traj, cfg_.strength, cfg_.emittance),
               1e-4);

        const WaveRun run = wave([&](const WaveField& w, std::size_t i) { check_aligned(traj[i], w); });
        double pde_sig = 0.0;
        double pde_emit = 0.0;
        for (const auto& r : run.records) {
            pde_sig = std::max(pde_sig, rel(r.sigma, d.sigma0));
            pde_emit = std::max(pde_emit, rel(r.emit_rms, eps(r.s)));
        }
        metric("pde_sigma_rel_dev", "C4", pde_sig, 1e-3);
        metric("pde_emittance_rel_dev", "C3", pde_emit, 1e-4);
        norm_metric(run);

        const auto snaps = fluid(cfg_.grid, true);
        const FluidFields& last = snaps.back();
        GaussianBeamState exact = traj.back();
        exact.sigma = d.sigma0;
        metric("fluid_density_l2_recentered", "C6",
               l2_distance_recentered(gaussian_density(cfg_.grid, exact), last.n, cfg_.grid.dx()), 2e-2);
        metric("fluid_mass_drift", "C8", std::abs(last.mass() - snaps.front().mass()), 1e-8);
    }

    void free_expansion() {
        const GaussianBeamState st0 = cfg_.initial_state();
        const double e = eps(0.0);
        // K = 0: sigma^2 = (sigma0 + sigma0' s)^2 + eps^2 s^2 / (4 sigma0^2)
        auto exact = [&](double s) {
            const double a = st0.sigma + st0.dsigma * s;
            return std::sqrt(a * a + e * e * s * s / (4.0 * st0.sigma * st0.sigma));
        };
        const Trajectory traj = envelope();
        metric("ode_final_sigma_rel_err", "C2", rel(traj.back().sigma, exact(traj.back().s)), 1e-6);
        const WaveRun run = wave([&](const WaveField& w, std::size_t i) { check_aligned(traj[i], w); });
        double curve = 0.0;
        double emit = 0.0;
        for (const auto& r : run.records) {
            curve = std::max(curve, rel(r.sigma, exact(r.s)));
            emit = std::max(emit, rel(r.emit_rms, eps(r.s)));
        }
        metric("pde_final_sigma_rel_err", "C2", rel(run.records.back().sigma, exact(cfg_.s_end)), 1e-4);
        metric("pde_sigma_curve_rel_err", "C2", curve, 1e-4);
        metric("pde_emittance_rel_dev", "C3", emit, 1e-4);
        metric("wave_boundary_amplitude", "C8", run.last.boundary_amplitude(), 1e-8);
        norm_metric(run);
    }

    double fluid_quantum_distance(const GridSpec& grid, bool write, double* mass_drift) {
        const auto snaps = fluid(grid, write);
        if (mass_drift != nullptr) {
            *mass_drift = std::abs(snaps.back().mass() - snaps.front().mass());
        }
        const SplitStepSolver solver(grid, cfg_.strength, cfg_.emittance);
        const double span = cfg_.s_end;
        const WaveField w = solver.evolve(initial_wave(grid), cfg_.s_end, cfg_.quantum.step, span, {});
        return l2_distance_recentered(snaps.back().n, wave_density(w), grid.dx());
    }

    void fluid_vs_quantum() {
        const Trajectory traj = envelope();
        const WaveRun run = wave([&](const WaveField& w, std::size_t i) { check_aligned(traj[i], w); });
        norm_metric(run);

        double mass_drift = 0.0;
        const double fine = fluid_quantum_distance(cfg_.grid, true, &mass_drift);
        metric("fluid_quantum_l2_recentered", "C6", fine, 1e-2);
        metric("fluid_mass_drift", "C8", mass_drift, 1e-8);

        if (cfg_.grid.n_cells >= 64 && cfg_.grid.n_cells % 4 == 0) {
            GridSpec coarse = cfg_.grid;
            coarse.n_cells = cfg_.grid.n_cells / 4;
            GridSpec mid = cfg_.grid;
            mid.n_cells = cfg_.grid.n_cells / 2;
            const double e0 = fluid_quantum_distance(coarse, false, nullptr);
            const double e1 = fluid_quantum_distance(mid, false, nullptr);
            metric("fluid_quantum_refinement_ratio", "C6", std::min(e0 / e1, e1 / fine), 2.8, Comparison::AtLeast);
        } else {
            log("grid too small or not divisible by 4; refinement study skipped");
        }
    }

    void envelope_only() {
        const Trajectory traj = envelope();
        std::vector<DiagnosticsRecord> records;
        double emit = 0.0;
        double floor_margin = std::numeric_limits<double>::infinity();
        for (const auto& st : traj) {
            const double e = eps(st.s);
            records.push_back(moments_from_envelope(st, e, strength(st.s)));
            emit = std::max(emit, rel(records.back().emit_rms, e));
            floor_margin = std::min(floor_margin, st.sigma * sigma_p_envelope(st.sigma, st.dsigma, e) - e / 2.0);
        }
        artifact("diagnostics.csv", [&](const auto& p) { write_diagnostics_csv(p, records); });
        metric("ode_emittance_rel_dev", "C3", emit, 1e-4);
        metric("uncertainty_floor_margin", "C7", floor_margin, -1e-10, Comparison::AtLeast);

        // Self-convergence of fixed-step RK4 on sigma(s_end) at coarse steps,
        // where truncation error dominates rounding.
        log("fixed-step order check");
        const double span = cfg_.s_end - traj.front().s;
        double prev_sigma = kNaN;
        double prev_diff = kNaN;
        double ratio = kNaN;
        for (int k = 0; k < 3; ++k) {
            OdeSettings s;
            s.method = OdeMethod::Rk4Fixed;
            s.step = span / (64.0 * std::pow(2.0, k));
            s.output_cadence = span;
            const double sigma = integrate(traj.front(), cfg_.strength, cfg_.emittance, cfg_.s_end, s).back().sigma;
            if (k > 0) {
                const double diff = std::abs(sigma - prev_sigma);
                if (k > 1) {
                    ratio = prev_diff / diff;
                }
                prev_diff = diff;
            }
            prev_sigma = sigma;
        }
        metric("rk4_step_halving_ratio", "C10", ratio, 14.0, Comparison::AtLeast);
    }

    const ScenarioConfig& cfg_;
    const RunOptions& opt_;
    RunReport report_;
};

} // namespace

bool Metric::passed() const {
    if (std::isnan(value)) {
        return false;
    }
    return comparison == Comparison::Below ? value < threshold : value >= threshold;
}

bool RunReport::passed() const {
    return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.passed(); });
}

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    try {
        return Runner(config, options).run();
    } catch (const SolverError& e) {
        throw SolverError("scenario " + std::string(scenario_name(config.scenario)) + ": " + e.message(), e.s());
    }
}

std::string summary_json(const ScenarioConfig& config, const RunReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["scenario"] = scenario_name(report.scenario);
    j["status"] = report.passed() ? "pass" : "fail";
    j["s_end"] = config.s_end;
    j["output_cadence"] = config.output_cadence;
    j["grid"] = {{"x_min", config.grid.x_min}, {"x_max", config.grid.x_max}, {"n_cells", config.grid.n_cells}};
    ordered_json metrics = ordered_json::array();
    for (const auto& m : report.metrics) {
        ordered_json entry;
        entry["name"] = m.name;
        entry["criterion"] = m.criterion;
        entry["value"] = std::isfinite(m.value) ? ordered_json(m.value) : ordered_json(nullptr);
        entry["threshold"] = m.threshold;
        entry["comparison"] = m.comparison == Comparison::Below ? "<" : ">=";
        entry["pass"] = m.passed();
        metrics.push_back(std::move(entry));
    }
    j["metrics"] = std::move(metrics);
    j["artifacts"] = report.artifacts;
    return j.dump(2) + "\n";
}

} // namespace qbeam
