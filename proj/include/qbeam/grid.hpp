#pragma once

#include <cstddef>
#include <vector>

namespace qbeam {

/// Uniform cell-centred grid on [x_min, x_max].
struct GridSpec {
    double x_min = -1.0;
    double x_max = 1.0;
    std::size_t n_cells = 2048;

    /// Throws InvalidParameter unless x_min < x_max and n_cells >= 16.
    void validate() const;

    double dx() const { return (x_max - x_min) / static_cast<double>(n_cells); }
    double x(std::size_t j) const { return x_min + (static_cast<double>(j) + 0.5) * dx(); }
    std::vector<double> centers() const;
};

} // namespace qbeam
