#pragma once

// Thin RAII wrapper over FFTW for complex transforms on a periodic grid.

#include "qbeam/grid.hpp"

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace qbeam {

class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&&) noexcept;
    Fft& operator=(Fft&&) noexcept;

    std::size_t size() const { return n_; }
    /// Unnormalized forward transform, in place.
    void forward(std::span<std::complex<double>> data) const;
    /// Inverse transform scaled by 1/n, in place.
    void inverse(std::span<std::complex<double>> data) const;

private:
    struct Plans;
    std::size_t n_;
    std::unique_ptr<Plans> plans_;
};

/// Angular wavenumbers in FFT order for the periodic extension of `grid`.
std::vector<double> wavenumbers(const GridSpec& grid);

/// Spectral first derivative; the Nyquist mode is dropped.
std::vector<std::complex<double>> spectral_derivative(const Fft& fft, const GridSpec& grid,
                                                      std::span<const std::complex<double>> f);

} // namespace qbeam
