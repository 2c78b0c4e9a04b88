#pragma once

// Classical 1-D isothermal fluid in the quadratic well U = K(s) x^2 / 2:
//   dn/ds + d(nP)/dx = 0
//   dP/ds + P dP/dx = -K x - eta0 d(ln n)/dx
// Finite volumes with minmod-limited MUSCL reconstruction and a two-stage
// strong-stability-preserving Runge-Kutta step.

#include "qbeam/envelope.hpp"
#include "qbeam/grid.hpp"
#include "qbeam/profiles.hpp"

#include <functional>
#include <span>
#include <vector>

namespace qbeam {

enum class VelocityKind {
    Uniform, ///< P(x) = P0, the coherent branch
    Linear,  ///< P(x) = x dsigma/sigma, the breathing-envelope branch
};

enum class Boundary { Outflow, Periodic };

struct FluidFields {
    GridSpec grid;
    std::vector<double> n; ///< cell density, sum(n) dx = 1 initially
    std::vector<double> P; ///< current velocity
    double s = 0.0;

    double mass() const;
};

struct FluidSettings {
    double cfl = 0.4;
    Boundary boundary = Boundary::Outflow;
    /// Cells with n below this fraction of the peak follow a linear fit of
    /// the resolved velocity instead of their own momentum equation; 0 turns
    /// this off.
    double vacuum_rel = 1e-8;
};

/// Time derivatives of the semi-discrete system.
struct FluidRates {
    std::vector<double> dn;
    std::vector<double> dP;
};

/// Floor applied before taking ln n: the smallest normal double. Grids must
/// keep the tails representable (|x - x0| below about 37 sigma).
double density_floor(std::span<const double> n);

/// Samples the normalized Gaussian of `state` and rescales it to unit discrete
/// mass. Throws DomainError unless the grid covers x0 +- 6 sigma.
FluidFields init_from_gaussian(const GridSpec& grid, const GaussianBeamState& state, VelocityKind velocity);

/// Right-hand side of the semi-discrete equations with the focusing strength k.
FluidRates fluid_rates(const FluidFields& fields, double k, double eta0, Boundary boundary);

/// Largest ds allowed by cfl dx / (max|P| + sqrt(eta0)).
double max_stable_step(const FluidFields& fields, double eta0, double cfl);

/// One SSP-RK2 step of length ds. K is sampled at s + ds/2.
/// Throws StepSizeError for a CFL violation and PositivityError if any
/// density turns negative.
FluidFields step(const FluidFields& fields, const StrengthProfile& strength, double eta0, double ds,
                 const FluidSettings& settings = {});

/// Evolves to s_end with the largest stable step, returning the initial
/// fields followed by snapshots every `output_cadence` (shrunk slightly, if
/// needed, to divide the run length). eta0 is sampled at each step midpoint.
std::vector<FluidFields> run(const FluidFields& fields0, const StrengthProfile& strength,
                             const std::function<double(double)>& eta0_of_s, double s_end, double output_cadence,
                             const FluidSettings& settings = {});

} // namespace qbeam
