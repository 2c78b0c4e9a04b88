#pragma once

// CSV export. Numbers use '.' as decimal separator and 17 significant
// digits so files round-trip and diff byte-for-byte between runs.

#include "qbeam/diagnostics.hpp"
#include "qbeam/envelope.hpp"
#include "qbeam/fluid.hpp"
#include "qbeam/qsolver.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qbeam {

/// %.17g in the C locale.
std::string format_number(double v);

/// Columns s, x0, p0, sigma, dsigma, chi.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);

/// Columns s, norm, mean_x, sigma, sigma_p, xp_corr, emit_rms, energy.
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);

/// "# snapshot=<index> s=<s>" then columns x, n, P.
void write_fluid_snapshot(const std::filesystem::path& path, std::size_t index, const FluidFields& fields);

/// "# snapshot=<index> s=<s>" then columns x, re_psi, im_psi, n, P
/// (P is zero in masked cells).
void write_wave_snapshot(const std::filesystem::path& path, std::size_t index, const WaveField& field, double eps);

} // namespace qbeam
