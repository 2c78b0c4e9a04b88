#pragma once

// Moments, rms emittance and field distances.

#include "qbeam/envelope.hpp"
#include "qbeam/qsolver.hpp"

#include <optional>
#include <span>

namespace qbeam {

struct DiagnosticsRecord {
    double s = 0.0;
    double norm = 0.0;
    double mean_x = 0.0;
    double mean_p = 0.0;
    double sigma = 0.0;   ///< sqrt <(x - <x>)^2>
    double sigma_p = 0.0; ///< sqrt <(p - <p>)^2>
    double xp_corr = 0.0; ///< symmetrized <(x - <x>)(p - <p>)>
    double emit_rms = 0.0;
    /// P0^2/2 + K x0^2/2 of the centroid; NaN when K was not supplied.
    double energy = 0.0;
};

/// Second moments of |psi|^2 and of p = -i eps d/dx (spectral derivative).
/// Throws StaleState when the norm is off by more than 1e-6.
DiagnosticsRecord moments_from_wave(const WaveField& field, double eps, std::optional<double> k = std::nullopt);

/// Same record for a Gaussian envelope state: sigma_p from
/// sigma_p_envelope, <xp> = sigma dsigma/ds.
DiagnosticsRecord moments_from_envelope(const GaussianBeamState& state, double eps,
                                        std::optional<double> k = std::nullopt);

/// eps = 2 sqrt(<x^2><p^2> - <xp>^2). Discriminants down to -1e-12 x2 p2 are
/// treated as zero; anything more negative throws InconsistentMoments.
double emittance(double x2, double p2, double xp);

/// sqrt(sigma'^2 + eps^2 / (4 sigma^2)).
double sigma_p_envelope(double sigma, double dsigma, double eps);

/// sqrt(sum (a - b)^2 dx).
double l2_distance(std::span<const double> a, std::span<const double> b, double dx);

/// l2_distance after shifting b so both centroids coincide (4-point Lagrange
/// interpolation, zero outside the grid). Compares shapes independent of
/// position.
double l2_distance_recentered(std::span<const double> a, std::span<const double> b, double dx);

/// Excess kurtosis <(x-<x>)^4>/sigma^4 - 3 of a density sampled on a grid.
double excess_kurtosis(std::span<const double> n, const GridSpec& grid);

} // namespace qbeam
