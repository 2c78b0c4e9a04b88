#pragma once

// Wave description of the beam:
//   i eps dpsi/ds = -(eps^2/2) d2psi/dx2 + (K(s) x^2 / 2) psi
// with the emittance eps(s) in the role of Planck's constant. Strang split
// step: half potential kick, spectral kinetic drift, half potential kick.

#include "qbeam/coherent.hpp"
#include "qbeam/envelope.hpp"
#include "qbeam/grid.hpp"
#include "qbeam/profiles.hpp"
#include "qbeam/spectral.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace qbeam {

using Complex = std::complex<double>;

struct WaveField {
    GridSpec grid;
    std::vector<Complex> psi;
    double s = 0.0;

    /// sum |psi|^2 dx
    double norm() const;
    /// max(|psi| at the two boundary cells)
    double boundary_amplitude() const;
};

struct MadelungFields {
    std::vector<double> n;     ///< |psi|^2
    std::vector<double> phase; ///< unwrapped arg psi, constant-extrapolated through masked cells
    std::vector<double> P;     ///< eps dphase/dx, zero where masked
    std::vector<double> bohm;  ///< (eps^2/2) d/dx[(1/M) d2M/dx2], zero where masked
    std::vector<bool> mask;    ///< true where P and bohm are meaningful
};

struct QSolverSettings {
    /// Boundary amplitude above which on_leak_warning fires.
    double leak_warn = 1e-8;
    /// Boundary amplitude above which stepping throws BoundaryLeak.
    double leak_error = 1e-4;
    /// Width (fraction of the domain on each side) of a cos^(1/8) absorbing
    /// layer applied every step; zero disables it and keeps stepping unitary.
    double absorbing_fraction = 0.0;
    std::function<void(double s, double amplitude)> on_leak_warning;
};

/// Samples the Gaussian ansatz
///   (2 pi sigma^2)^(-1/4) exp[-(x-x0)^2/(4 sigma^2) + i (dsigma/sigma)(x-x0)^2/(2 eps)
///                             + i P0 x / eps + i chi + i phi0]
/// and rescales it to unit discrete norm. Its Madelung current is
/// P0 + (x - x0) dsigma/sigma.
WaveField gaussian_wave(const GridSpec& grid, const GaussianBeamState& state, double eps);

/// Samples coherent_wavefunction with the given phase convention, normalized.
WaveField coherent_wave(const GridSpec& grid, const GaussianBeamState& state, double eps,
                        PhaseConvention convention);

class SplitStepSolver {
public:
    SplitStepSolver(GridSpec grid, StrengthProfile strength, EmittanceProfile emittance,
                    QSolverSettings settings = {});

    /// One norm-preserving step of length ds.
    WaveField step(const WaveField& field, double ds) const;

    /// Steps to s_end with steps no longer than ds, calling `observe` on the
    /// initial field and then every `output_cadence` (shrunk slightly, if
    /// needed, to divide the run length). Returns the final field.
    WaveField evolve(const WaveField& field, double s_end, double ds, double output_cadence,
                     const std::function<void(const WaveField&)>& observe) const;

    /// Snapshot-collecting form of evolve.
    std::vector<WaveField> evolve(const WaveField& field, double s_end, double ds, double output_cadence) const;

    const GridSpec& grid() const { return grid_; }
    const Fft& fft() const { return fft_; }

private:
    void check_boundary(const WaveField& field) const;

    GridSpec grid_;
    StrengthProfile strength_;
    EmittanceProfile emittance_;
    QSolverSettings settings_;
    Fft fft_;
    std::vector<double> k2_;
    std::vector<double> x2_;
    std::vector<double> absorber_;
};

/// Single step with a throwaway solver; prefer SplitStepSolver for runs.
WaveField qstep(const WaveField& field, const StrengthProfile& strength, const EmittanceProfile& emittance,
                double ds);

/// Default mask threshold relative to max n.
inline constexpr double kMadelungMask = 1e-10;

/// n = |psi|^2, phase unwrapped outward from the density maximum, P and
/// the quantum-pressure term from centred differences. Cells whose stencil
/// touches n < mask_rel * max n are masked.
MadelungFields madelung_decompose(const WaveField& field, double eps, double mask_rel = kMadelungMask);

/// max over unmasked cells of
///   |(eps'/eps) P + (eta0/n) dn/dx + bohm| / max |(eta0/n) dn/dx|.
/// Zero when the wave obeys the classical fluid momentum equation with
/// isothermal pressure coefficient eta0. The quantum-pressure term takes
/// third derivatives of ln n, so on evolved fields rounding noise in the far
/// tails dominates unless mask_rel is raised to restrict the check to the bulk.
double classicality_residual(const WaveField& field, double eps, double eps_prime, double eta0,
                             double mask_rel = kMadelungMask);

/// eta0 = (sigma/eps)(deps/ds)(dsigma/ds) + eps^2/(4 sigma^2): the pressure
/// coefficient that makes a Gaussian wave behave as a classical fluid.
double eta_from_envelope(double sigma, double dsigma, double eps, double deps);

/// max |eps'/eps - sigma'/sigma| with centred differences on co-sampled,
/// uniformly spaced series (one-sided at the ends).
double enforce_alpha_sigma_lock(const std::vector<double>& s, const std::vector<double>& sigma,
                                const std::vector<double>& eps);

} // namespace qbeam
