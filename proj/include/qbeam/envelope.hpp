#pragma once

// Finite-dimensional dynamics of a Gaussian beam: centroid oscillator,
// rms envelope with emittance damping and emittance pressure, and the
// accumulated phase of the wave description.

#include "qbeam/profiles.hpp"

#include <optional>
#include <vector>

namespace qbeam {

struct GaussianBeamState {
    double s = 0.0;
    double x0 = 0.0;     ///< centroid
    double p0 = 0.0;     ///< centroid current velocity, dx0/ds
    double sigma = 0.0;  ///< rms size
    double dsigma = 0.0; ///< dsigma/ds; the local velocity field is x * dsigma / sigma
    double chi = 0.0;    ///< accumulated phase, dchi/ds = -eps / (4 sigma^2)
    double phi0 = 0.0;   ///< global phase; carried, never evolved
};

using Trajectory = std::vector<GaussianBeamState>;

enum class OdeMethod { Rk4Fixed, Rk45Adaptive };

struct OdeSettings {
    /// Fixed step for RK4; initial and maximum step for the adaptive method.
    double step = 1e-2;
    OdeMethod method = OdeMethod::Rk45Adaptive;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    /// Spacing of returned samples. Unset means every fixed step (RK4) or
    /// every `step` (adaptive). The spacing is shrunk slightly, if needed,
    /// so that it divides the run length.
    std::optional<double> output_cadence;
    std::size_t max_steps = 50'000'000;

    void validate() const;
};

struct CentroidRate {
    double dx0;
    double dp0;
};

struct EnvelopeRate {
    double dsigma;
    double d2sigma;
};

CentroidRate centroid_rhs(const GaussianBeamState& state, double k);

/// sigma'' = -K sigma + (eps'/eps) sigma' + eps^2 / (4 sigma^3).
/// `eps_log_rate` is eps'/eps = Gamma/2. Throws EnvelopeCollapse for sigma <= 0.
EnvelopeRate envelope_rhs(const GaussianBeamState& state, double k, double eps, double eps_log_rate);

double phase_rhs(const GaussianBeamState& state, double eps);

/// Integrates centroid, envelope and phase from state0.s to s_end. The
/// first sample is state0 itself; the last sample sits exactly at s_end.
Trajectory integrate(const GaussianBeamState& state0, const StrengthProfile& strength,
                     const EmittanceProfile& emittance, double s_end, const OdeSettings& settings);

/// max |P0'' - Gamma P0' + K P0| / max |K P0| over interior samples, with
/// derivatives from centered differences along a uniformly sampled trajectory.
double current_velocity_residual(const Trajectory& trajectory, const StrengthProfile& strength,
                                 const EmittanceProfile& emittance);

/// max |d/ds(P0^2/2 + K x0^2/2) - Gamma K x0^2/2| / max(P0^2/2 + K x0^2/2).
double energy_balance_residual(const Trajectory& trajectory, const StrengthProfile& strength,
                               const EmittanceProfile& emittance);

/// Image of a state under s -> -s (complex conjugation of the wave):
/// velocities and phases change sign.
GaussianBeamState time_reversed(const GaussianBeamState& state);

} // namespace qbeam
