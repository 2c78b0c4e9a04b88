#pragma once

// Shape-invariant Gaussian beams: ordinary (isothermal, constant K and eps)
// and generalized (dissipative, K and eps coupled so that the matching
// relation K sigma0^4 = eps^2/4 holds at every s).

#include "qbeam/envelope.hpp"
#include "qbeam/profiles.hpp"

#include <complex>

namespace qbeam {

/// How the centroid velocity enters the phase of the coherent wavefunction.
///   Half: theta = P0 x / (2 eps)  (P0 = 2 eps dtheta/dx)
///   Full: theta = P0 x / eps      (P0 = eps dtheta/dx, the Madelung current P = eps dphi/dx)
/// Only Full makes the wave-equation centroid follow x0'' + K x0 = 0.
enum class PhaseConvention { Half, Full };

enum class CoherentKind { Isothermal, Dissipative };

class CoherentSpec {
public:
    /// Ordinary coherent state. Both profiles must be constant and sigma0
    /// must satisfy K sigma0^4 = eps^2/4 to 1e-12 relative.
    static CoherentSpec isothermal(StrengthProfile strength, EmittanceProfile emittance, double sigma0,
                                   double x0, double p0);
    /// Ordinary coherent state with the matched sigma0 derived from (K, eps).
    static CoherentSpec isothermal(double k, double eps, double x0, double p0);
    /// Generalized coherent state on the coupled profiles of
    /// coupled_dissipative_profiles(k0, gamma, sigma0).
    static CoherentSpec dissipative(double k0, double gamma, double sigma0, double x0, double p0);

    CoherentKind kind() const { return kind_; }
    double sigma0() const { return sigma0_; }
    double beta() const { return sigma0_ * sigma0_; }
    double x0() const { return x0_; }
    double p0() const { return p0_; }
    const StrengthProfile& strength() const { return strength_; }
    const EmittanceProfile& emittance() const { return emittance_; }
    double eta0(double s) const { return beta() * strength_(s); }

    /// Matched state at s = 0 (dsigma = 0, chi = 0, phi0 = 0).
    GaussianBeamState initial_state() const;

private:
    CoherentSpec(CoherentKind kind, StrengthProfile strength, EmittanceProfile emittance, double sigma0,
                 double x0, double p0);

    CoherentKind kind_;
    StrengthProfile strength_;
    EmittanceProfile emittance_;
    double sigma0_;
    double x0_;
    double p0_;
};

/// sigma0 = (eps^2 / (4 K))^(1/4).
double matched_sigma(double k, double eps);

/// |eta0 - sigma0^2 K| / eta0.
double check_matching(double eta0, double sigma0, double k);

/// Normalized Gaussian of variance state.sigma^2 centred on state.x0.
double coherent_density(double x, const GaussianBeamState& state);

/// (2 pi sigma^2)^(-1/4) exp[-(x - x0)^2 / (4 sigma^2) + i theta(x) + i phi0],
/// theta per the phase convention.
std::complex<double> coherent_wavefunction(double x, const GaussianBeamState& state, double eps,
                                           PhaseConvention convention = PhaseConvention::Half);

/// P0^2/2 + K x0^2/2.
double isothermal_energy(double x0, double p0, double k);

} // namespace qbeam
