#pragma once

#include <span>
#include <vector>

namespace mirrorscan {

/// Spectral counts sampled on an ascending wavelength grid.
struct SpectrumRecord {
    std::vector<double> lambda_nm;
    std::vector<double> counts;

    // Same lengths, >= 2 samples, strictly ascending wavelengths, counts >= 0.
    void validate() const;
};

double trapezoid(std::span<const double> x, std::span<const double> y);

/// Divides counts by their trapezoidal integral over wavelength.
/// Throws ZeroSpectrum when the integral is not positive.
SpectrumRecord normalize_spectrum(const SpectrumRecord& spectrum);

/// Linear interpolation of `spectrum` onto `grid`. Throws CoverageError when
/// the grid reaches outside the spectrum's wavelength span.
std::vector<double> resample(const SpectrumRecord& spectrum, std::span<const double> grid);

}  // namespace mirrorscan
