#include "qbeam/grid.hpp"

#include "qbeam/errors.hpp"

#include <cmath>

namespace qbeam {

void GridSpec::validate() const {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
        throw InvalidParameter("grid needs finite x_min < x_max");
    }
    if (n_cells < 16) {
        throw InvalidParameter("grid needs at least 16 cells");
    }
}

std::vector<double> GridSpec::centers() const {
    std::vector<double> xs(n_cells);
    for (std::size_t j = 0; j < n_cells; ++j) {
        xs[j] = x(j);
    }
    return xs;
}

} // namespace qbeam
