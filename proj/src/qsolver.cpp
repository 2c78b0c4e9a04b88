#include "qbeam/qsolver.hpp"

#include "qbeam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace qbeam {

namespace {

void normalize(WaveField& f) {
    const double norm = f.norm();
    if (!(norm > 0.0)) {
        throw InvalidInput("cannot normalize an all-zero wave field");
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& v : f.psi) {
        v *= scale;
    }
}

// Branch of `angle` closest to `reference`.
double nearest_branch(double angle, double reference) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return angle + two_pi * std::round((reference - angle) / two_pi);
}

} // namespace

double WaveField::norm() const {
    double acc = 0.0;
    for (const auto& v : psi) {
        acc += std::norm(v);
    }
    return acc * grid.dx();
}

double WaveField::boundary_amplitude() const {
    if (psi.empty()) {
        return 0.0;
    }
    return std::max(std::abs(psi.front()), std::abs(psi.back()));
}

WaveField gaussian_wave(const GridSpec& grid, const GaussianBeamState& state, double eps) {
    grid.validate();
    if (!(state.sigma > 0.0) || !(eps > 0.0)) {
        throw InvalidParameter("Gaussian wave needs sigma > 0 and eps > 0");
    }
    const double var = state.sigma * state.sigma;
    const double amp0 = 1.0 / std::sqrt(std::sqrt(2.0 * std::numbers::pi * var));
    const double chirp = state.dsigma / state.sigma / (2.0 * eps);
    WaveField f{grid, std::vector<Complex>(grid.n_cells), state.s};
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
        const double x = grid.x(j);
        const double d = x - state.x0;
        const double phase = chirp * d * d + state.p0 * x / eps + state.chi + state.phi0;
        f.psi[j] = std::polar(amp0 * std::exp(-d * d / (4.0 * var)), phase);
    }
    normalize(f);
    return f;
}

WaveField coherent_wave(const GridSpec& grid, const GaussianBeamState& state, double eps,
                        PhaseConvention convention) {
    grid.validate();
    WaveField f{grid, std::vector<Complex>(grid.n_cells), state.s};
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
        f.psi[j] = coherent_wavefunction(grid.x(j), state, eps, convention);
    }
    normalize(f);
    return f;
}

SplitStepSolver::SplitStepSolver(GridSpec grid, StrengthProfile strength, EmittanceProfile emittance,
                                 QSolverSettings settings)
    : grid_(grid),
      strength_(std::move(strength)),
      emittance_(std::move(emittance)),
      settings_(std::move(settings)),
      fft_((grid.validate(), grid.n_cells)) {
    const auto k = wavenumbers(grid_);
    k2_.resize(k.size());
    std::transform(k.begin(), k.end(), k2_.begin(), [](double v) { return v * v; });
    x2_.resize(grid_.n_cells);
    for (std::size_t j = 0; j < grid_.n_cells; ++j) {
        x2_[j] = grid_.x(j) * grid_.x(j);
    }
    if (settings_.absorbing_fraction < 0.0 || settings_.absorbing_fraction >= 0.5) {
        throw InvalidParameter("absorbing layer fraction must lie in [0, 0.5)");
    }
    if (settings_.absorbing_fraction > 0.0) {
        absorber_.assign(grid_.n_cells, 1.0);
        const double length = grid_.x_max - grid_.x_min;
        const double width = settings_.absorbing_fraction * length;
        for (std::size_t j = 0; j < grid_.n_cells; ++j) {
            const double x = grid_.x(j);
            const double depth = std::max(grid_.x_min + width - x, x - (grid_.x_max - width));
            if (depth > 0.0) {
                absorber_[j] = std::pow(std::cos(0.5 * std::numbers::pi * depth / width), 0.125);
            }
        }
    }
}

void SplitStepSolver::check_boundary(const WaveField& field) const {
    const double amp = field.boundary_amplitude();
    if (amp > settings_.leak_error) {
        throw BoundaryLeak("wave reached the domain boundary (|psi| = " + std::to_string(amp) + ")", field.s);
    }
    if (amp > settings_.leak_warn && settings_.on_leak_warning) {
        settings_.on_leak_warning(field.s, amp);
    }
}

WaveField SplitStepSolver::step(const WaveField& field, double ds) const {
    if (field.psi.size() != grid_.n_cells) {
        throw LengthMismatch("wave field does not match the solver grid");
    }
    if (!(ds > 0.0)) {
        throw InvalidParameter("quantum step must be > 0");
    }
    const double s = field.s;
    const double k_start = strength_(s);
    const double k_end = strength_(s + ds);
    const double eps_start = eval_emittance(emittance_, s);
    const double eps_mid = eval_emittance(emittance_, s + 0.5 * ds);
    const double eps_end = eval_emittance(emittance_, s + ds);

    WaveField out{grid_, field.psi, s + ds};
    auto& psi = out.psi;
    const std::size_t n = psi.size();

    const double kick_start = -0.25 * k_start * ds / eps_start;
    for (std::size_t j = 0; j < n; ++j) {
        psi[j] *= std::polar(1.0, kick_start * x2_[j]);
    }
    fft_.forward(psi);
    const double drift = -0.5 * eps_mid * ds;
    for (std::size_t j = 0; j < n; ++j) {
        psi[j] *= std::polar(1.0, drift * k2_[j]);
    }
    fft_.inverse(psi);
    const double kick_end = -0.25 * k_end * ds / eps_end;
    for (std::size_t j = 0; j < n; ++j) {
        psi[j] *= std::polar(1.0, kick_end * x2_[j]);
    }
    if (!absorber_.empty()) {
        for (std::size_t j = 0; j < n; ++j) {
            psi[j] *= absorber_[j];
        }
    }
    check_boundary(out);
    return out;
}

WaveField SplitStepSolver::evolve(const WaveField& field, double s_end, double ds, double output_cadence,
                                  const std::function<void(const WaveField&)>& observe) const {
    if (!(s_end > field.s)) {
        throw InvalidParameter("quantum run needs s_end > s0");
    }
    if (!(ds > 0.0) || !(output_cadence > 0.0)) {
        throw InvalidParameter("quantum step and cadence must be > 0");
    }
    const double span = s_end - field.s;
    const auto n_out = static_cast<std::size_t>(std::max(1.0, std::ceil(span / output_cadence - 1e-9)));
    const double cadence = span / static_cast<double>(n_out);
    const auto n_sub = static_cast<std::size_t>(std::max(1.0, std::ceil(cadence / ds - 1e-9)));
    const double h = cadence / static_cast<double>(n_sub);

    if (observe) {
        observe(field);
    }
    WaveField cur = field;
    for (std::size_t k = 0; k < n_out; ++k) {
        const double s_base = field.s + static_cast<double>(k) * cadence;
        for (std::size_t j = 0; j < n_sub; ++j) {
            cur.s = s_base + static_cast<double>(j) * h;
            cur = step(cur, h);
        }
        cur.s = (k + 1 == n_out) ? s_end : field.s + static_cast<double>(k + 1) * cadence;
        if (observe) {
            observe(cur);
        }
    }
    return cur;
}

std::vector<WaveField> SplitStepSolver::evolve(const WaveField& field, double s_end, double ds,
                                               double output_cadence) const {
    std::vector<WaveField> out;
    evolve(field, s_end, ds, output_cadence, [&out](const WaveField& f) { out.push_back(f); });
    return out;
}

WaveField qstep(const WaveField& field, const StrengthProfile& strength, const EmittanceProfile& emittance,
                double ds) {
    const SplitStepSolver solver(field.grid, strength, emittance);
    return solver.step(field, ds);
}

MadelungFields madelung_decompose(const WaveField& field, double eps, double mask_rel) {
    if (!(eps > 0.0)) {
        throw InvalidParameter("Madelung decomposition needs eps > 0");
    }
    const std::size_t n_cells = field.psi.size();
    if (n_cells < 5) {
        throw InvalidInput("wave field too short for Madelung stencils");
    }
    MadelungFields m;
    m.n.resize(n_cells);
    double peak = 0.0;
    std::size_t j_peak = 0;
    for (std::size_t j = 0; j < n_cells; ++j) {
        m.n[j] = std::norm(field.psi[j]);
        if (m.n[j] > peak) {
            peak = m.n[j];
            j_peak = j;
        }
    }
    if (!(peak > 0.0)) {
        throw InvalidInput("all-zero wave field");
    }
    const double threshold = mask_rel * peak;

    // Unwrap outward from the density maximum; hold the phase constant
    // across cells too faint to carry one.
    m.phase.assign(n_cells, 0.0);
    m.phase[j_peak] = std::arg(field.psi[j_peak]);
    auto sweep = [&](std::size_t j, std::size_t prev) {
        m.phase[j] = m.n[j] >= threshold ? nearest_branch(std::arg(field.psi[j]), m.phase[prev]) : m.phase[prev];
    };
    for (std::size_t j = j_peak + 1; j < n_cells; ++j) {
        sweep(j, j - 1);
    }
    for (std::size_t j = j_peak; j-- > 0;) {
        sweep(j, j + 1);
    }

    m.mask.assign(n_cells, false);
    for (std::size_t j = 2; j + 2 < n_cells; ++j) {
        bool ok = true;
        for (std::size_t i = j - 2; i <= j + 2; ++i) {
            ok = ok && m.n[i] >= threshold;
        }
        m.mask[j] = ok;
    }

    const double dx = field.grid.dx();
    const double floor = 1e-30 + 1e-12 * peak;
    // (1/M) M'' = L'' + L'^2 with L = ln M = ln(n)/2.
    std::vector<double> log_m(n_cells);
    for (std::size_t j = 0; j < n_cells; ++j) {
        log_m[j] = 0.5 * std::log(std::max(m.n[j], floor));
    }
    std::vector<double> q(n_cells, 0.0);
    for (std::size_t j = 1; j + 1 < n_cells; ++j) {
        const double d1 = (log_m[j + 1] - log_m[j - 1]) / (2.0 * dx);
        const double d2 = (log_m[j + 1] - 2.0 * log_m[j] + log_m[j - 1]) / (dx * dx);
        q[j] = d2 + d1 * d1;
    }

    m.P.assign(n_cells, 0.0);
    m.bohm.assign(n_cells, 0.0);
    for (std::size_t j = 2; j + 2 < n_cells; ++j) {
        if (!m.mask[j]) {
            continue;
        }
        m.P[j] = eps * (m.phase[j + 1] - m.phase[j - 1]) / (2.0 * dx);
        m.bohm[j] = 0.5 * eps * eps * (q[j + 1] - q[j - 1]) / (2.0 * dx);
    }
    return m;
}

double classicality_residual(const WaveField& field, double eps, double eps_prime, double eta0, double mask_rel) {
    const MadelungFields m = madelung_decompose(field, eps, mask_rel);
    const std::size_t n_cells = m.n.size();
    const double dx = field.grid.dx();
    double peak = 0.0;
    for (double v : m.n) {
        peak = std::max(peak, v);
    }
    const double floor = 1e-30 + 1e-12 * peak;
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t j = 1; j + 1 < n_cells; ++j) {
        if (!m.mask[j]) {
            continue;
        }
        const double pressure =
            eta0 * (std::log(std::max(m.n[j + 1], floor)) - std::log(std::max(m.n[j - 1], floor))) / (2.0 * dx);
        const double r = (eps_prime / eps) * m.P[j] + pressure + m.bohm[j];
        worst = std::max(worst, std::abs(r));
        scale = std::max(scale, std::abs(pressure));
    }
    if (scale == 0.0) {
        return worst == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return worst / scale;
}

double eta_from_envelope(double sigma, double dsigma, double eps, double deps) {
    if (!(sigma > 0.0) || !(eps > 0.0)) {
        throw InvalidParameter("eta_from_envelope needs sigma > 0 and eps > 0");
    }
    return (sigma / eps) * deps * dsigma + eps * eps / (4.0 * sigma * sigma);
}

double enforce_alpha_sigma_lock(const std::vector<double>& s, const std::vector<double>& sigma,
                                const std::vector<double>& eps) {
    if (s.size() != sigma.size() || s.size() != eps.size()) {
        throw LengthMismatch("alpha-sigma lock needs co-sampled series");
    }
    if (s.size() < 3) {
        throw InsufficientData("alpha-sigma lock needs at least 3 samples");
    }
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double h2 = s[i + 1] - s[i - 1];
        const double eps_rate = (eps[i + 1] - eps[i - 1]) / h2 / eps[i];
        const double sigma_rate = (sigma[i + 1] - sigma[i - 1]) / h2 / sigma[i];
        worst = std::max(worst, std::abs(eps_rate - sigma_rate));
    }
    return worst;
}

} // namespace qbeam
