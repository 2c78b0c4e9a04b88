#include "qbeam/fluid.hpp"

#include "qbeam/coherent.hpp"
#include "qbeam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace qbeam {

namespace {

constexpr std::size_t kGhost = 2;

double minmod(double a, double b) {
    if (a * b <= 0.0) {
        return 0.0;
    }
    return std::abs(a) < std::abs(b) ? a : b;
}

enum class Extrapolation { Constant, Geometric };

// Copies `v` into a buffer padded with kGhost cells on each side. Outflow
// ghosts continue the edge trend (n geometrically, P linearly) so that the
// hydrostatic tail of a confined beam stays in balance at the boundary; a
// zero-gradient ghost would remove the pressure support of the edge cells.
std::vector<double> padded(std::span<const double> v, Boundary boundary, Extrapolation how) {
    const std::size_t n = v.size();
    std::vector<double> out(n + 2 * kGhost);
    std::copy(v.begin(), v.end(), out.begin() + kGhost);
    for (std::size_t g = 0; g < kGhost; ++g) {
        if (boundary == Boundary::Periodic) {
            out[kGhost - 1 - g] = v[n - 1 - g];
            out[kGhost + n + g] = v[g];
            continue;
        }
        const std::size_t lo = kGhost - g;     // first cell inside the left ghost
        const std::size_t hi = kGhost + n + g; // ghost being filled on the right
        if (how == Extrapolation::Constant) {
            out[lo - 1] = out[lo];
            out[hi] = out[hi - 1];
        } else {
            auto geometric = [](double edge, double inner) {
                return (edge > 0.0 && inner > 0.0) ? edge * (edge / inner) : edge;
            };
            out[lo - 1] = geometric(out[lo], out[lo + 1]);
            out[hi] = geometric(out[hi - 1], out[hi - 2]);
        }
    }
    return out;
}

// Limited left/right states at interface i+1/2 of the padded array, where i
// indexes the padded array.
struct FaceStates {
    double left;
    double right;
};

FaceStates reconstruct(const std::vector<double>& q, std::size_t i) {
    const double slope_l = minmod(q[i] - q[i - 1], q[i + 1] - q[i]);
    const double slope_r = minmod(q[i + 1] - q[i], q[i + 2] - q[i + 1]);
    return {q[i] + 0.5 * slope_l, q[i + 1] - 0.5 * slope_r};
}

// Exact Riemann flux for Burgers' equation, f(P) = P^2 / 2.
double burgers_flux(double pl, double pr) {
    if (pl > pr) {
        return (pl + pr > 0.0) ? 0.5 * pl * pl : 0.5 * pr * pr;
    }
    if (pl > 0.0) {
        return 0.5 * pl * pl;
    }
    if (pr < 0.0) {
        return 0.5 * pr * pr;
    }
    return 0.0;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

// Cells below vacuum_rel of the peak carry no dynamics of their own: small
// disturbances grow like n^(-1/2) as they run down a stratified tail, so a
// resolved tail at 1e-20 turns bulk truncation error into O(1) velocities.
// Their P is replaced by the mass-weighted linear fit of the resolved part,
// which is exact for every Gaussian state. n keeps evolving, so mass is
// still conserved.
void slave_vacuum(FluidFields& f, double vacuum_rel) {
    if (!(vacuum_rel > 0.0)) {
        return;
    }
    const double cut = vacuum_rel * *std::max_element(f.n.begin(), f.n.end());
    double m = 0.0;
    double mx = 0.0;
    double mp = 0.0;
    for (std::size_t j = 0; j < f.n.size(); ++j) {
        if (f.n[j] >= cut) {
            m += f.n[j];
            mx += f.n[j] * f.grid.x(j);
            mp += f.n[j] * f.P[j];
        }
    }
    mx /= m;
    mp /= m;
    double xx = 0.0;
    double xp = 0.0;
    for (std::size_t j = 0; j < f.n.size(); ++j) {
        if (f.n[j] >= cut) {
            const double dx = f.grid.x(j) - mx;
            xx += f.n[j] * dx * dx;
            xp += f.n[j] * dx * (f.P[j] - mp);
        }
    }
    const double slope = xx > 0.0 ? xp / xx : 0.0;
    for (std::size_t j = 0; j < f.n.size(); ++j) {
        if (f.n[j] < cut) {
            f.P[j] = mp + slope * (f.grid.x(j) - mx);
        }
    }
}

} // namespace

double FluidFields::mass() const {
    // Fixed summation order keeps this bit-reproducible.
    return std::accumulate(n.begin(), n.end(), 0.0) * grid.dx();
}

double density_floor(std::span<const double> n) {
    // Only a guard against log(0). A floor that switches the pressure off in
    // resolved tails (say 1e-12 of the peak) lets those tails fall in
    // pressureless and drive a velocity shock into the core within a quarter
    // period.
    (void)n;
    return std::numeric_limits<double>::min();
}

FluidFields init_from_gaussian(const GridSpec& grid, const GaussianBeamState& state, VelocityKind velocity) {
    grid.validate();
    if (!(state.sigma > 0.0)) {
        throw InvalidParameter("Gaussian state needs sigma > 0");
    }
    if (grid.x_min > state.x0 - 6.0 * state.sigma || grid.x_max < state.x0 + 6.0 * state.sigma) {
        throw DomainError("grid [" + std::to_string(grid.x_min) + ", " + std::to_string(grid.x_max) +
                          "] does not cover x0 +- 6 sigma");
    }
    FluidFields f{grid, std::vector<double>(grid.n_cells), std::vector<double>(grid.n_cells), state.s};
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
        const double x = grid.x(j);
        f.n[j] = coherent_density(x, state);
        f.P[j] = velocity == VelocityKind::Uniform ? state.p0 : x * state.dsigma / state.sigma;
    }
    const double m = f.mass();
    for (double& v : f.n) {
        v /= m;
    }
    return f;
}

FluidRates fluid_rates(const FluidFields& fields, double k, double eta0, Boundary boundary) {
    const std::size_t n_cells = fields.grid.n_cells;
    const double dx = fields.grid.dx();
    const auto n = padded(fields.n, boundary, Extrapolation::Geometric);
    const auto p = padded(fields.P, boundary, Extrapolation::Constant);

    const double floor = density_floor(fields.n);
    std::vector<double> log_n(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        log_n[i] = std::log(std::max(n[i], floor));
    }

    // Face f sits between padded cells kGhost - 1 + f and kGhost + f.
    std::vector<double> mass_flux(n_cells + 1);
    std::vector<double> momentum_flux(n_cells + 1);
    for (std::size_t f = 0; f <= n_cells; ++f) {
        const std::size_t i = kGhost - 1 + f;
        const FaceStates nf = reconstruct(n, i);
        const FaceStates pf = reconstruct(p, i);
        const double u = 0.5 * (pf.left + pf.right);
        mass_flux[f] = u >= 0.0 ? u * nf.left : u * nf.right;
        momentum_flux[f] = burgers_flux(pf.left, pf.right);
    }

    FluidRates r{std::vector<double>(n_cells), std::vector<double>(n_cells)};
    for (std::size_t j = 0; j < n_cells; ++j) {
        const std::size_t i = kGhost + j;
        const double pressure = eta0 * (log_n[i + 1] - log_n[i - 1]) / (2.0 * dx);
        r.dn[j] = -(mass_flux[j + 1] - mass_flux[j]) / dx;
        r.dP[j] = -(momentum_flux[j + 1] - momentum_flux[j]) / dx - k * fields.grid.x(j) - pressure;
    }
    return r;
}

double max_stable_step(const FluidFields& fields, double eta0, double cfl) {
    const double speed = max_abs(fields.P) + std::sqrt(std::max(eta0, 0.0));
    if (speed == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return cfl * fields.grid.dx() / speed;
}

FluidFields step(const FluidFields& fields, const StrengthProfile& strength, double eta0, double ds,
                 const FluidSettings& settings) {
    if (!(ds > 0.0)) {
        throw StepSizeError("fluid step must be > 0", fields.s);
    }
    if (ds > max_stable_step(fields, eta0, settings.cfl) * (1.0 + 1e-12)) {
        throw StepSizeError("fluid step violates the CFL bound", fields.s);
    }
    const double k = strength(fields.s + 0.5 * ds);
    const std::size_t n_cells = fields.grid.n_cells;

    auto check_positive = [&](const std::vector<double>& n, double s) {
        for (std::size_t j = 0; j < n_cells; ++j) {
            if (!(n[j] >= 0.0)) {
                throw PositivityError("negative density in cell " + std::to_string(j), s);
            }
        }
    };

    const FluidRates r1 = fluid_rates(fields, k, eta0, settings.boundary);
    FluidFields stage = fields;
    for (std::size_t j = 0; j < n_cells; ++j) {
        stage.n[j] += ds * r1.dn[j];
        stage.P[j] += ds * r1.dP[j];
    }
    check_positive(stage.n, fields.s + ds);
    slave_vacuum(stage, settings.vacuum_rel);

    const FluidRates r2 = fluid_rates(stage, k, eta0, settings.boundary);
    FluidFields out = fields;
    for (std::size_t j = 0; j < n_cells; ++j) {
        out.n[j] = 0.5 * fields.n[j] + 0.5 * (stage.n[j] + ds * r2.dn[j]);
        out.P[j] = 0.5 * fields.P[j] + 0.5 * (stage.P[j] + ds * r2.dP[j]);
    }
    check_positive(out.n, fields.s + ds);
    slave_vacuum(out, settings.vacuum_rel);
    out.s = fields.s + ds;
    return out;
}

std::vector<FluidFields> run(const FluidFields& fields0, const StrengthProfile& strength,
                             const std::function<double(double)>& eta0_of_s, double s_end, double output_cadence,
                             const FluidSettings& settings) {
    fields0.grid.validate();
    if (!(s_end > fields0.s)) {
        throw InvalidParameter("fluid run needs s_end > s0");
    }
    if (!(output_cadence > 0.0)) {
        throw InvalidParameter("fluid output cadence must be > 0");
    }
    if (!(settings.cfl > 0.0) || settings.cfl > 0.5) {
        throw InvalidParameter("fluid CFL number must lie in (0, 0.5]");
    }
    const double span = s_end - fields0.s;
    const auto n_out = static_cast<std::size_t>(std::max(1.0, std::ceil(span / output_cadence - 1e-9)));
    const double cadence = span / static_cast<double>(n_out);

    std::vector<FluidFields> out;
    out.reserve(n_out + 1);
    out.push_back(fields0);
    FluidFields cur = fields0;
    for (std::size_t k = 0; k < n_out; ++k) {
        const double target = (k + 1 == n_out) ? s_end : fields0.s + static_cast<double>(k + 1) * cadence;
        while (cur.s < target) {
            // eta0 is sampled at the midpoint of the proposed step; the CFL
            // bound uses the same value so step() accepts it.
            double ds = target - cur.s;
            double eta0 = eta0_of_s(cur.s + 0.5 * ds);
            const double limit = max_stable_step(cur, eta0, settings.cfl);
            if (ds > limit) {
                ds = limit;
                eta0 = eta0_of_s(cur.s + 0.5 * ds);
                ds = std::min(ds, max_stable_step(cur, eta0, settings.cfl));
            }
            const bool last = ds >= target - cur.s;
            cur = step(cur, strength, eta0, ds, settings);
            if (last) {
                cur.s = target;
            }
        }
        out.push_back(cur);
    }
    return out;
}

} // namespace qbeam
