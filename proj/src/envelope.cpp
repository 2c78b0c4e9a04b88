#include "qbeam/envelope.hpp"

#include "qbeam/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace qbeam {

namespace {

// Integration vector: x0, p0, sigma, dsigma, chi.
using Vec = std::array<double, 5>;

constexpr std::size_t kSigma = 2;

Vec pack(const GaussianBeamState& st) {
    return {st.x0, st.p0, st.sigma, st.dsigma, st.chi};
}

GaussianBeamState unpack(const Vec& y, double s, double phi0) {
    return GaussianBeamState{s, y[0], y[1], y[2], y[3], y[4], phi0};
}

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
    Vec out = y;
    for (const auto& [c, k] : terms) {
        if (c == 0.0) {
            continue;
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += h * c * (*k)[i];
        }
    }
    return out;
}

class Rhs {
public:
    Rhs(const StrengthProfile& strength, const EmittanceProfile& emittance)
        : strength_(strength), emittance_(emittance) {}

    Vec operator()(double s, const Vec& y) const {
        const GaussianBeamState st = unpack(y, s, 0.0);
        const double k = strength_(s);
        const double eps = eval_emittance(emittance_, s);
        const double eps_rate = emittance_log_derivative(emittance_, s);
        const CentroidRate c = centroid_rhs(st, k);
        const EnvelopeRate e = envelope_rhs(st, k, eps, eps_rate);
        return {c.dx0, c.dp0, e.dsigma, e.d2sigma, phase_rhs(st, eps)};
    }

private:
    const StrengthProfile& strength_;
    const EmittanceProfile& emittance_;
};

Vec rk4_step(const Rhs& f, double s, const Vec& y, double h) {
    const Vec k1 = f(s, y);
    const Vec k2 = f(s + 0.5 * h, axpy(y, h, {{0.5, &k1}}));
    const Vec k3 = f(s + 0.5 * h, axpy(y, h, {{0.5, &k2}}));
    const Vec k4 = f(s + h, axpy(y, h, {{1.0, &k3}}));
    return axpy(y, h, {{1.0 / 6.0, &k1}, {1.0 / 3.0, &k2}, {1.0 / 3.0, &k3}, {1.0 / 6.0, &k4}});
}

// Dormand-Prince 5(4) tableau.
struct Dopri5Result {
    Vec y;
    Vec err;
};

Dopri5Result dopri5_step(const Rhs& f, double s, const Vec& y, double h) {
    const Vec k1 = f(s, y);
    const Vec k2 = f(s + h / 5.0, axpy(y, h, {{1.0 / 5.0, &k1}}));
    const Vec k3 = f(s + 3.0 * h / 10.0, axpy(y, h, {{3.0 / 40.0, &k1}, {9.0 / 40.0, &k2}}));
    const Vec k4 = f(s + 4.0 * h / 5.0,
                     axpy(y, h, {{44.0 / 45.0, &k1}, {-56.0 / 15.0, &k2}, {32.0 / 9.0, &k3}}));
    const Vec k5 = f(s + 8.0 * h / 9.0, axpy(y, h,
                                             {{19372.0 / 6561.0, &k1},
                                              {-25360.0 / 2187.0, &k2},
                                              {64448.0 / 6561.0, &k3},
                                              {-212.0 / 729.0, &k4}}));
    const Vec k6 = f(s + h, axpy(y, h,
                                 {{9017.0 / 3168.0, &k1},
                                  {-355.0 / 33.0, &k2},
                                  {46732.0 / 5247.0, &k3},
                                  {49.0 / 176.0, &k4},
                                  {-5103.0 / 18656.0, &k5}}));
    const Vec y5 = axpy(y, h,
                        {{35.0 / 384.0, &k1},
                         {500.0 / 1113.0, &k3},
                         {125.0 / 192.0, &k4},
                         {-2187.0 / 6784.0, &k5},
                         {11.0 / 84.0, &k6}});
    const Vec k7 = f(s + h, y5);
    Vec zero{};
    const Vec err = axpy(zero, h,
                         {{71.0 / 57600.0, &k1},
                          {-71.0 / 16695.0, &k3},
                          {71.0 / 1920.0, &k4},
                          {-17253.0 / 339200.0, &k5},
                          {22.0 / 525.0, &k6},
                          {-1.0 / 40.0, &k7}});
    return {y5, err};
}

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double abs_tol, double rel_tol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double scale = abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / scale;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

void require_uniform(const Trajectory& tr) {
    if (tr.size() < 5) {
        throw InsufficientData("trajectory diagnostics need at least 5 samples, got " +
                               std::to_string(tr.size()));
    }
    const double h = tr[1].s - tr[0].s;
    if (!(h > 0.0)) {
        throw InvalidParameter("trajectory samples must be increasing in s");
    }
    for (std::size_t i = 1; i < tr.size(); ++i) {
        const double hi = tr[i].s - tr[i - 1].s;
        if (std::abs(hi - h) > 1e-6 * h) {
            throw InvalidParameter("trajectory cadence is not uniform");
        }
    }
}

} // namespace

void OdeSettings::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidParameter("ODE step must be > 0");
    }
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        throw InvalidParameter("ODE tolerances must be > 0");
    }
    if (output_cadence && !(*output_cadence > 0.0)) {
        throw InvalidParameter("output cadence must be > 0");
    }
}

CentroidRate centroid_rhs(const GaussianBeamState& state, double k) {
    return {state.p0, -k * state.x0};
}

EnvelopeRate envelope_rhs(const GaussianBeamState& state, double k, double eps, double eps_log_rate) {
    const double sigma = state.sigma;
    if (!(sigma > 0.0)) {
        throw EnvelopeCollapse("envelope collapsed through zero", state.s);
    }
    const double d2 = -k * sigma + eps_log_rate * state.dsigma + eps * eps / (4.0 * sigma * sigma * sigma);
    return {state.dsigma, d2};
}

double phase_rhs(const GaussianBeamState& state, double eps) {
    return -eps / (4.0 * state.sigma * state.sigma);
}

Trajectory integrate(const GaussianBeamState& state0, const StrengthProfile& strength,
                     const EmittanceProfile& emittance, double s_end, const OdeSettings& settings) {
    settings.validate();
    if (!(state0.sigma > 0.0)) {
        throw InvalidParameter("initial sigma must be > 0");
    }
    if (!(s_end > state0.s)) {
        throw InvalidParameter("s_end must exceed the initial s");
    }
    const double span = s_end - state0.s;
    const double cadence_req = settings.output_cadence.value_or(settings.step);
    const auto n_out = static_cast<std::size_t>(std::max(1.0, std::ceil(span / cadence_req - 1e-9)));
    const double cadence = span / static_cast<double>(n_out);

    const Rhs f(strength, emittance);
    Trajectory out;
    out.reserve(n_out + 1);
    out.push_back(state0);

    Vec y = pack(state0);
    std::size_t steps = 0;

    if (settings.method == OdeMethod::Rk4Fixed) {
        const auto sub = static_cast<std::size_t>(std::max(1.0, std::ceil(cadence / settings.step - 1e-9)));
        const double h = cadence / static_cast<double>(sub);
        for (std::size_t k = 0; k < n_out; ++k) {
            const double s_base = state0.s + static_cast<double>(k) * cadence;
            for (std::size_t j = 0; j < sub; ++j) {
                const double s = s_base + static_cast<double>(j) * h;
                y = rk4_step(f, s, y, h);
                if (!(y[kSigma] > 0.0)) {
                    throw EnvelopeCollapse("envelope collapsed through zero", s + h);
                }
                if (++steps > settings.max_steps) {
                    throw StiffnessError("step budget exhausted", s + h);
                }
            }
            const double s_out = (k + 1 == n_out) ? s_end : state0.s + static_cast<double>(k + 1) * cadence;
            out.push_back(unpack(y, s_out, state0.phi0));
        }
        return out;
    }

    double h = std::min(settings.step, cadence);
    double s = state0.s;
    for (std::size_t k = 0; k < n_out; ++k) {
        const double target = (k + 1 == n_out) ? s_end : state0.s + static_cast<double>(k + 1) * cadence;
        while (s < target) {
            const double remaining = target - s;
            const double h_min = 1e-13 * std::max(1.0, std::abs(s));
            const bool last = h >= remaining * (1.0 - 1e-12);
            const double h_try = last ? remaining : h;

            bool collapsed = false;
            Dopri5Result trial{};
            try {
                trial = dopri5_step(f, s, y, h_try);
                collapsed = !(trial.y[kSigma] > 0.0);
            } catch (const EnvelopeCollapse&) {
                collapsed = true;
            }
            if (++steps > settings.max_steps) {
                throw StiffnessError("step budget exhausted", s);
            }
            const double err = collapsed ? 1e6 : error_norm(trial.err, y, trial.y, settings.abs_tol, settings.rel_tol);
            if (!std::isfinite(err) || err > 1.0) {
                const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
                h = h_try * fac;
                if (h < h_min) {
                    if (collapsed) {
                        throw EnvelopeCollapse("envelope collapsed through zero", s);
                    }
                    throw StiffnessError("adaptive step underflow", s);
                }
                continue;
            }
            y = trial.y;
            s = last ? target : s + h_try;
            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            const double h_next = std::min(settings.step, h_try * fac);
            // A step shortened to land on an output point must not shrink the next one.
            h = last ? std::max(h_next, std::min(h, settings.step)) : h_next;
        }
        out.push_back(unpack(y, target, state0.phi0));
    }
    return out;
}

double current_velocity_residual(const Trajectory& tr, const StrengthProfile& strength,
                                 const EmittanceProfile& emittance) {
    require_uniform(tr);
    const double h = (tr.back().s - tr.front().s) / static_cast<double>(tr.size() - 1);
    double scale = 0.0;
    for (const auto& st : tr) {
        scale = std::max(scale, std::abs(strength(st.s) * st.p0));
    }
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
        const double p_pp = (tr[i + 1].p0 - 2.0 * tr[i].p0 + tr[i - 1].p0) / (h * h);
        const double p_p = (tr[i + 1].p0 - tr[i - 1].p0) / (2.0 * h);
        const double r = p_pp - gamma_rate(emittance, tr[i].s) * p_p + strength(tr[i].s) * tr[i].p0;
        worst = std::max(worst, std::abs(r));
    }
    if (scale == 0.0) {
        return worst == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return worst / scale;
}

double energy_balance_residual(const Trajectory& tr, const StrengthProfile& strength,
                               const EmittanceProfile& emittance) {
    require_uniform(tr);
    const double h = (tr.back().s - tr.front().s) / static_cast<double>(tr.size() - 1);
    std::vector<double> energy(tr.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        energy[i] = 0.5 * tr[i].p0 * tr[i].p0 + 0.5 * strength(tr[i].s) * tr[i].x0 * tr[i].x0;
        scale = std::max(scale, energy[i]);
    }
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
        const double lhs = (energy[i + 1] - energy[i - 1]) / (2.0 * h);
        const double rhs = gamma_rate(emittance, tr[i].s) * 0.5 * strength(tr[i].s) * tr[i].x0 * tr[i].x0;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    if (scale == 0.0) {
        return worst == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return worst / scale;
}

GaussianBeamState time_reversed(const GaussianBeamState& state) {
    GaussianBeamState r = state;
    r.p0 = -state.p0;
    r.dsigma = -state.dsigma;
    r.chi = -state.chi;
    r.phi0 = -state.phi0;
    return r;
}

} // namespace qbeam
