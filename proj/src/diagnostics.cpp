#include "qbeam/diagnostics.hpp"

#include "qbeam/errors.hpp"
#include "qbeam/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qbeam {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw LengthMismatch("distance between arrays of length " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    }
}

// Centroid in cell-index units.
double index_centroid(std::span<const double> v) {
    double m0 = 0.0;
    double m1 = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        m0 += v[j];
        m1 += static_cast<double>(j) * v[j];
    }
    return m0 == 0.0 ? 0.0 : m1 / m0;
}

// Value of the sampled function at fractional index t.
double lagrange4(std::span<const double> v, double t) {
    const auto n = static_cast<long>(v.size());
    const auto i = static_cast<long>(std::floor(t));
    const double u = t - static_cast<double>(i);
    auto at = [&](long j) { return (j < 0 || j >= n) ? 0.0 : v[static_cast<std::size_t>(j)]; };
    const double w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
    const double w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
    const double w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
    const double w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
    return w0 * at(i - 1) + w1 * at(i) + w2 * at(i + 1) + w3 * at(i + 2);
}

} // namespace

DiagnosticsRecord moments_from_wave(const WaveField& field, double eps, std::optional<double> k) {
    if (!(eps > 0.0)) {
        throw InvalidParameter("moments need eps > 0");
    }
    const GridSpec& grid = field.grid;
    const double dx = grid.dx();
    DiagnosticsRecord r;
    r.s = field.s;
    r.norm = field.norm();
    if (std::abs(r.norm - 1.0) > 1e-6) {
        throw StaleState("wave norm is " + std::to_string(r.norm) + ", expected 1");
    }

    const Fft fft(grid.n_cells);
    const auto dpsi = spectral_derivative(fft, grid, field.psi);

    double m1 = 0.0;
    double p1 = 0.0;
    double xp_raw = 0.0;
    double p2_raw = 0.0;
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
        const double x = grid.x(j);
        const Complex cross = std::conj(field.psi[j]) * dpsi[j];
        m1 += x * std::norm(field.psi[j]);
        p1 += cross.imag();
        xp_raw += x * cross.imag();
        p2_raw += std::norm(dpsi[j]);
    }
    r.mean_x = m1 * dx / r.norm;
    r.mean_p = eps * p1 * dx / r.norm;

    double x2 = 0.0;
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
        const double d = grid.x(j) - r.mean_x;
        x2 += d * d * std::norm(field.psi[j]);
    }
    x2 *= dx / r.norm;
    const double p2 = std::max(0.0, eps * eps * p2_raw * dx / r.norm - r.mean_p * r.mean_p);
    r.xp_corr = eps * xp_raw * dx / r.norm - r.mean_x * r.mean_p;
    r.sigma = std::sqrt(x2);
    r.sigma_p = std::sqrt(p2);
    r.emit_rms = emittance(x2, p2, r.xp_corr);
    r.energy = k ? 0.5 * r.mean_p * r.mean_p + 0.5 * (*k) * r.mean_x * r.mean_x
                 : std::numeric_limits<double>::quiet_NaN();
    return r;
}

DiagnosticsRecord moments_from_envelope(const GaussianBeamState& state, double eps, std::optional<double> k) {
    DiagnosticsRecord r;
    r.s = state.s;
    r.norm = 1.0;
    r.mean_x = state.x0;
    r.mean_p = state.p0;
    r.sigma = state.sigma;
    r.sigma_p = sigma_p_envelope(state.sigma, state.dsigma, eps);
    r.xp_corr = state.sigma * state.dsigma;
    r.emit_rms = emittance(r.sigma * r.sigma, r.sigma_p * r.sigma_p, r.xp_corr);
    r.energy = k ? isothermal_energy(state.x0, state.p0, *k) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

double emittance(double x2, double p2, double xp) {
    if (x2 < 0.0 || p2 < 0.0) {
        throw InconsistentMoments("second moments must be non-negative");
    }
    double disc = x2 * p2 - xp * xp;
    if (disc < 0.0) {
        if (disc < -1e-12 * x2 * p2) {
            throw InconsistentMoments("<x^2><p^2> - <xp>^2 = " + std::to_string(disc) + " < 0");
        }
        disc = 0.0;
    }
    return 2.0 * std::sqrt(disc);
}

double sigma_p_envelope(double sigma, double dsigma, double eps) {
    if (!(sigma > 0.0) || !(eps > 0.0)) {
        throw InvalidParameter("sigma_p_envelope needs sigma > 0 and eps > 0");
    }
    return std::sqrt(dsigma * dsigma + eps * eps / (4.0 * sigma * sigma));
}

double l2_distance(std::span<const double> a, std::span<const double> b, double dx) {
    require_same_length(a, b);
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return std::sqrt(acc * dx);
}

double l2_distance_recentered(std::span<const double> a, std::span<const double> b, double dx) {
    require_same_length(a, b);
    const double shift = index_centroid(b) - index_centroid(a);
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - lagrange4(b, static_cast<double>(j) + shift);
        acc += d * d;
    }
    return std::sqrt(acc * dx);
}

double excess_kurtosis(std::span<const double> n, const GridSpec& grid) {
    if (n.size() != grid.n_cells) {
        throw LengthMismatch("density does not match grid");
    }
    double m0 = 0.0;
    double m1 = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) {
        m0 += n[j];
        m1 += grid.x(j) * n[j];
    }
    if (!(m0 > 0.0)) {
        throw InvalidInput("kurtosis of an empty density");
    }
    const double mean = m1 / m0;
    double m2 = 0.0;
    double m4 = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) {
        const double d2 = (grid.x(j) - mean) * (grid.x(j) - mean);
        m2 += d2 * n[j];
        m4 += d2 * d2 * n[j];
    }
    m2 /= m0;
    m4 /= m0;
    return m4 / (m2 * m2) - 3.0;
}

} // namespace qbeam
