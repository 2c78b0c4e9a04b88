#include "qbeam/spectral.hpp"

#include "qbeam/errors.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>

namespace qbeam {

namespace {

// The FFTW planner is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) {
    return reinterpret_cast<fftw_complex*>(p);
}

} // namespace

struct Fft::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

Fft::Fft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
    if (n == 0) {
        throw InvalidParameter("FFT size must be > 0");
    }
    std::vector<std::complex<double>> scratch(n);
    std::lock_guard lock(planner_mutex());
    const int size = static_cast<int>(n);
    // Estimate-mode plans are chosen without timing, so results do not
    // depend on machine load.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->forward = fftw_plan_dft_1d(size, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, flags);
    plans_->backward = fftw_plan_dft_1d(size, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, flags);
    if (plans_->forward == nullptr || plans_->backward == nullptr) {
        throw Error("FFTW planning failed");
    }
}

Fft::~Fft() {
    if (plans_) {
        std::lock_guard lock(planner_mutex());
        if (plans_->forward != nullptr) {
            fftw_destroy_plan(plans_->forward);
        }
        if (plans_->backward != nullptr) {
            fftw_destroy_plan(plans_->backward);
        }
    }
}

Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(std::span<std::complex<double>> data) const {
    if (data.size() != n_) {
        throw LengthMismatch("FFT input has wrong length");
    }
    fftw_execute_dft(plans_->forward, as_fftw(data.data()), as_fftw(data.data()));
}

void Fft::inverse(std::span<std::complex<double>> data) const {
    if (data.size() != n_) {
        throw LengthMismatch("FFT input has wrong length");
    }
    fftw_execute_dft(plans_->backward, as_fftw(data.data()), as_fftw(data.data()));
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : data) {
        v *= scale;
    }
}

std::vector<double> wavenumbers(const GridSpec& grid) {
    const std::size_t n = grid.n_cells;
    const double length = grid.x_max - grid.x_min;
    std::vector<double> k(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double m = j < (n + 1) / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
        k[j] = 2.0 * std::numbers::pi * m / length;
    }
    return k;
}

std::vector<std::complex<double>> spectral_derivative(const Fft& fft, const GridSpec& grid,
                                                      std::span<const std::complex<double>> f) {
    std::vector<std::complex<double>> out(f.begin(), f.end());
    fft.forward(out);
    const auto k = wavenumbers(grid);
    const std::size_t n = out.size();
    for (std::size_t j = 0; j < n; ++j) {
        out[j] *= std::complex<double>(0.0, k[j]);
    }
    if (n % 2 == 0) {
        out[n / 2] = 0.0;
    }
    fft.inverse(out);
    return out;
}

} // namespace qbeam
