#include "qbeam/profiles.hpp"

#include "qbeam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qbeam {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw InvalidParameter(std::string(what) + " must be finite");
    }
}

double centered_difference(const LinearTable& table, double s, double h) {
    const double lo = std::max(table.front(), s - h);
    const double hi = std::min(table.back(), s + h);
    if (hi <= lo) {
        throw OutOfDomain("finite-difference stencil collapsed at s = " + std::to_string(s));
    }
    return (table(hi) - table(lo)) / (hi - lo);
}

} // namespace

LinearTable::LinearTable(std::vector<double> s, std::vector<double> values)
    : s_(std::move(s)), v_(std::move(values)) {
    if (s_.size() != v_.size()) {
        throw LengthMismatch("table abscissae and values differ in length");
    }
    if (s_.size() < 2) {
        throw InvalidParameter("table needs at least two samples");
    }
    for (std::size_t i = 0; i < s_.size(); ++i) {
        require_finite(s_[i], "table abscissa");
        require_finite(v_[i], "table value");
        if (i > 0 && !(s_[i] > s_[i - 1])) {
            throw InvalidParameter("table abscissae must be strictly increasing");
        }
    }
}

std::size_t LinearTable::segment(double s) const {
    if (!(s >= s_.front() && s <= s_.back())) {
        throw OutOfDomain("s = " + std::to_string(s) + " outside table range [" +
                          std::to_string(s_.front()) + ", " + std::to_string(s_.back()) + "]");
    }
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    auto i = static_cast<std::size_t>(it - s_.begin());
    // i is the first knot strictly greater than s; clamp at the right end.
    return std::min(i, s_.size() - 1) - 1;
}

double LinearTable::operator()(double s) const {
    const std::size_t i = segment(s);
    const double t = (s - s_[i]) / (s_[i + 1] - s_[i]);
    return (1.0 - t) * v_[i] + t * v_[i + 1];
}

double LinearTable::slope(double s) const {
    const std::size_t i = segment(s);
    return (v_[i + 1] - v_[i]) / (s_[i + 1] - s_[i]);
}

StrengthProfile StrengthProfile::constant(double k0) {
    require_finite(k0, "K0");
    // K = 0 is the field-free drift; defocusing is not supported.
    if (k0 < 0.0) {
        throw InvalidParameter("constant strength K0 must be >= 0");
    }
    return StrengthProfile(Constant{k0});
}

StrengthProfile StrengthProfile::modulated(double k0, double amplitude, double omega, double phase) {
    require_finite(k0, "K0");
    require_finite(amplitude, "modulation amplitude");
    require_finite(omega, "modulation frequency");
    require_finite(phase, "modulation phase");
    if (k0 <= 0.0) {
        throw InvalidParameter("modulated strength K0 must be > 0");
    }
    if (std::abs(amplitude) >= 1.0) {
        throw InvalidParameter("modulation amplitude must satisfy |a| < 1");
    }
    return StrengthProfile(Modulated{k0, amplitude, omega, phase});
}

StrengthProfile StrengthProfile::exponential(double k0, double gamma) {
    require_finite(k0, "K0");
    require_finite(gamma, "gamma");
    if (k0 <= 0.0) {
        throw InvalidParameter("exponential strength K0 must be > 0");
    }
    return StrengthProfile(Exponential{k0, gamma});
}

StrengthProfile StrengthProfile::tabulated(std::vector<double> s, std::vector<double> k) {
    return StrengthProfile(LinearTable(std::move(s), std::move(k)));
}

double StrengthProfile::operator()(double s) const {
    return std::visit(overloaded{
                          [](const Constant& c) { return c.k0; },
                          [s](const Modulated& m) {
                              return m.k0 * (1.0 + m.amplitude * std::sin(m.omega * s + m.phase));
                          },
                          [s](const Exponential& e) { return e.k0 * std::exp(-2.0 * e.gamma * s); },
                          [s](const Tabulated& t) { return t(s); },
                      },
                      kind_);
}

double StrengthProfile::derivative(double s) const {
    return std::visit(overloaded{
                          [](const Constant&) { return 0.0; },
                          [s](const Modulated& m) {
                              return m.k0 * m.amplitude * m.omega * std::cos(m.omega * s + m.phase);
                          },
                          [s](const Exponential& e) {
                              return -2.0 * e.gamma * e.k0 * std::exp(-2.0 * e.gamma * s);
                          },
                          [s](const Tabulated& t) { return t.slope(s); },
                      },
                      kind_);
}

double StrengthProfile::log_derivative(double s) const {
    if (const auto* e = std::get_if<Exponential>(&kind_)) {
        return -2.0 * e->gamma;
    }
    const double k = (*this)(s);
    if (k == 0.0) {
        throw InvalidParameter("K'/K undefined where K = 0");
    }
    return derivative(s) / k;
}

EmittanceProfile EmittanceProfile::constant(double eps0) {
    require_finite(eps0, "eps0");
    if (eps0 <= 0.0) {
        throw InvalidParameter("emittance eps0 must be > 0");
    }
    return EmittanceProfile(Constant{eps0});
}

EmittanceProfile EmittanceProfile::exponential(double eps0, double gamma) {
    require_finite(eps0, "eps0");
    require_finite(gamma, "gamma");
    if (eps0 <= 0.0) {
        throw InvalidParameter("emittance eps0 must be > 0");
    }
    return EmittanceProfile(Exponential{eps0, gamma});
}

EmittanceProfile EmittanceProfile::tabulated(std::vector<double> s, std::vector<double> eps) {
    LinearTable table(std::move(s), std::move(eps));
    for (std::size_t i = 0; i < table.values().size(); ++i) {
        if (table.values()[i] <= 0.0) {
            throw InvalidProfile("tabulated emittance must be positive; sample " + std::to_string(i) +
                                 " at s = " + std::to_string(table.abscissae()[i]) + " is " +
                                 std::to_string(table.values()[i]));
        }
    }
    return EmittanceProfile(std::move(table));
}

double EmittanceProfile::operator()(double s) const {
    return std::visit(overloaded{
                          [](const Constant& c) { return c.eps0; },
                          [s](const Exponential& e) { return e.eps0 * std::exp(-e.gamma * s); },
                          [s](const Tabulated& t) { return t(s); },
                      },
                      kind_);
}

double ThermoState::v_th_over_c(double s) const {
    return std::sqrt(eta0(s));
}

double eval_strength(const StrengthProfile& profile, double s) {
    return profile(s);
}

double eval_emittance(const EmittanceProfile& profile, double s) {
    const double eps = profile(s);
    // Positivity is enforced at construction; a linear blend of positive
    // knots stays positive, so this only trips on corrupted state.
    if (!(eps > 0.0)) {
        throw InvalidProfile("emittance not positive at s = " + std::to_string(s));
    }
    return eps;
}

double default_fd_step(double s) {
    return 1e-6 * std::max(1.0, std::abs(s));
}

double emittance_log_derivative(const EmittanceProfile& profile, double s, std::optional<double> h) {
    return std::visit(overloaded{
                          [](const EmittanceProfile::Constant&) { return 0.0; },
                          [](const EmittanceProfile::Exponential& e) { return -e.gamma; },
                          [&](const EmittanceProfile::Tabulated& t) {
                              const double step = h.value_or(default_fd_step(s));
                              if (!(step > 0.0)) {
                                  throw InvalidParameter("finite-difference step must be > 0");
                              }
                              return centered_difference(t, s, step) / eval_emittance(profile, s);
                          },
                      },
                      profile.kind());
}

double gamma_rate(const EmittanceProfile& profile, double s, std::optional<double> h) {
    return 2.0 * emittance_log_derivative(profile, s, h);
}

CoupledProfiles coupled_dissipative_profiles(double k0, double gamma, double sigma0) {
    require_finite(k0, "K0");
    require_finite(gamma, "gamma");
    require_finite(sigma0, "sigma0");
    if (k0 <= 0.0) {
        throw InvalidParameter("coupled profiles need K0 > 0");
    }
    if (sigma0 <= 0.0) {
        throw InvalidParameter("coupled profiles need sigma0 > 0");
    }
    auto strength = StrengthProfile::exponential(k0, gamma);
    // sqrt(K0 e^{-2 gamma s}) = sqrt(K0) e^{-gamma s}
    auto emittance = EmittanceProfile::exponential(2.0 * sigma0 * sigma0 * std::sqrt(k0), gamma);
    ThermoState thermo{sigma0 * sigma0, strength};
    return CoupledProfiles{std::move(strength), std::move(emittance), std::move(thermo)};
}

} // namespace qbeam
