#pragma once

// Prescribed functions of path length s: focusing strength K(s), emittance
// eps(s) (which doubles as the dispersion parameter of the wave equation),
// and the isothermal compressibility eta0(s).

#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace qbeam {

/// Piecewise-linear table over strictly increasing abscissae. Evaluating
/// outside [front, back] throws OutOfDomain; evaluating at a knot returns
/// the stored value bit-for-bit.
class LinearTable {
public:
    LinearTable(std::vector<double> s, std::vector<double> values);

    double operator()(double s) const;
    /// Slope of the segment containing s (right segment at interior knots).
    double slope(double s) const;

    double front() const { return s_.front(); }
    double back() const { return s_.back(); }
    const std::vector<double>& abscissae() const { return s_; }
    const std::vector<double>& values() const { return v_; }

private:
    std::size_t segment(double s) const;

    std::vector<double> s_;
    std::vector<double> v_;
};

class StrengthProfile {
public:
    struct Constant {
        double k0;
    };
    /// k0 * (1 + amplitude * sin(omega * s + phase)), |amplitude| < 1.
    struct Modulated {
        double k0;
        double amplitude;
        double omega;
        double phase;
    };
    /// k0 * exp(-2 gamma s); gamma is the amplitude damping rate of eps.
    struct Exponential {
        double k0;
        double gamma;
    };
    using Tabulated = LinearTable;
    using Kind = std::variant<Constant, Modulated, Exponential, Tabulated>;

    static StrengthProfile constant(double k0);
    static StrengthProfile modulated(double k0, double amplitude, double omega, double phase = 0.0);
    static StrengthProfile exponential(double k0, double gamma);
    static StrengthProfile tabulated(std::vector<double> s, std::vector<double> k);

    double operator()(double s) const;
    /// dK/ds. Analytic for closed forms, segment slope for tables.
    double derivative(double s) const;
    /// K'/K; throws InvalidParameter where K vanishes.
    double log_derivative(double s) const;

    bool is_constant() const { return std::holds_alternative<Constant>(kind_); }
    const Kind& kind() const { return kind_; }

private:
    explicit StrengthProfile(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

class EmittanceProfile {
public:
    struct Constant {
        double eps0;
    };
    /// eps0 * exp(-gamma s)
    struct Exponential {
        double eps0;
        double gamma;
    };
    using Tabulated = LinearTable;
    using Kind = std::variant<Constant, Exponential, Tabulated>;

    static EmittanceProfile constant(double eps0);
    static EmittanceProfile exponential(double eps0, double gamma);
    static EmittanceProfile tabulated(std::vector<double> s, std::vector<double> eps);

    double operator()(double s) const;
    bool is_constant() const { return std::holds_alternative<Constant>(kind_); }
    const Kind& kind() const { return kind_; }

private:
    explicit EmittanceProfile(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

/// Thermal closure of the fluid: eta0(s) = beta * K(s) with constant beta.
struct ThermoState {
    double beta;
    StrengthProfile strength;

    double eta0(double s) const { return beta * strength(s); }
    /// Thermal velocity in units of c for the isothermal case, sqrt(eta0).
    double v_th_over_c(double s) const;
};

struct CoupledProfiles {
    StrengthProfile strength;
    EmittanceProfile emittance;
    ThermoState thermo;
};

double eval_strength(const StrengthProfile& profile, double s);
double eval_emittance(const EmittanceProfile& profile, double s);

/// Default finite-difference step for tabulated profiles.
double default_fd_step(double s);

/// Gamma(s) = (1/eps^2) d(eps^2)/ds = 2 eps'/eps. Closed-form kinds are
/// differentiated analytically; tables use a centered difference with
/// step h (one-sided within h of either end of the table).
double gamma_rate(const EmittanceProfile& profile, double s, std::optional<double> h = std::nullopt);

/// eps'/eps, i.e. Gamma/2. This is the damping coefficient of the envelope equation.
double emittance_log_derivative(const EmittanceProfile& profile, double s,
                                std::optional<double> h = std::nullopt);

/// K(s) = K0 e^{-2 gamma s}, eta0 = sigma0^2 K, eps = 2 sigma0^2 sqrt(K), so the
/// matching relation K sigma0^4 = eps^2/4 holds for every s and
/// Gamma = K'/K = -2 gamma.
CoupledProfiles coupled_dissipative_profiles(double k0, double gamma, double sigma0);

} // namespace qbeam
