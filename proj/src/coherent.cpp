#include "qbeam/coherent.hpp"

#include "qbeam/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qbeam {

CoherentSpec::CoherentSpec(CoherentKind kind, StrengthProfile strength, EmittanceProfile emittance,
                           double sigma0, double x0, double p0)
    : kind_(kind),
      strength_(std::move(strength)),
      emittance_(std::move(emittance)),
      sigma0_(sigma0),
      x0_(x0),
      p0_(p0) {
    if (!(sigma0_ > 0.0) || !std::isfinite(sigma0_)) {
        throw InvalidParameter("coherent state needs sigma0 > 0");
    }
    if (!std::isfinite(x0_) || !std::isfinite(p0_)) {
        throw InvalidParameter("coherent centroid must be finite");
    }
    const double k = strength_(0.0);
    const double eps = eval_emittance(emittance_, 0.0);
    const double lhs = k * std::pow(sigma0_, 4);
    const double rhs = 0.25 * eps * eps;
    if (std::abs(lhs - rhs) > 1e-12 * rhs) {
        throw InvalidParameter("coherent state is not matched: K sigma0^4 = " + std::to_string(lhs) +
                               " but eps^2/4 = " + std::to_string(rhs));
    }
}

CoherentSpec CoherentSpec::isothermal(StrengthProfile strength, EmittanceProfile emittance, double sigma0,
                                      double x0, double p0) {
    // Without dissipation the shape can only persist in a static well.
    if (!strength.is_constant()) {
        throw InvalidParameter("isothermal coherent state requires constant K");
    }
    if (!emittance.is_constant()) {
        throw InvalidParameter("isothermal coherent state requires constant emittance");
    }
    return CoherentSpec(CoherentKind::Isothermal, std::move(strength), std::move(emittance), sigma0, x0, p0);
}

CoherentSpec CoherentSpec::isothermal(double k, double eps, double x0, double p0) {
    return isothermal(StrengthProfile::constant(k), EmittanceProfile::constant(eps), matched_sigma(k, eps), x0,
                      p0);
}

CoherentSpec CoherentSpec::dissipative(double k0, double gamma, double sigma0, double x0, double p0) {
    auto coupled = coupled_dissipative_profiles(k0, gamma, sigma0);
    return CoherentSpec(CoherentKind::Dissipative, std::move(coupled.strength), std::move(coupled.emittance),
                        sigma0, x0, p0);
}

GaussianBeamState CoherentSpec::initial_state() const {
    return GaussianBeamState{0.0, x0_, p0_, sigma0_, 0.0, 0.0, 0.0};
}

double matched_sigma(double k, double eps) {
    if (!(k > 0.0) || !(eps > 0.0)) {
        throw InvalidParameter("matched_sigma needs K > 0 and eps > 0");
    }
    return std::sqrt(std::sqrt(eps * eps / (4.0 * k)));
}

double check_matching(double eta0, double sigma0, double k) {
    return std::abs(eta0 - sigma0 * sigma0 * k) / eta0;
}

double coherent_density(double x, const GaussianBeamState& state) {
    const double beta = state.sigma * state.sigma;
    const double d = x - state.x0;
    return std::exp(-d * d / (2.0 * beta)) / std::sqrt(2.0 * std::numbers::pi * beta);
}

std::complex<double> coherent_wavefunction(double x, const GaussianBeamState& state, double eps,
                                           PhaseConvention convention) {
    const double beta = state.sigma * state.sigma;
    const double d = x - state.x0;
    const double amplitude = std::exp(-d * d / (4.0 * beta)) / std::sqrt(std::sqrt(2.0 * std::numbers::pi * beta));
    const double divisor = convention == PhaseConvention::Half ? 2.0 * eps : eps;
    const double theta = state.p0 * x / divisor + state.phi0;
    return std::polar(amplitude, theta);
}

double isothermal_energy(double x0, double p0, double k) {
    return 0.5 * p0 * p0 + 0.5 * k * x0 * x0;
}

} // namespace qbeam
