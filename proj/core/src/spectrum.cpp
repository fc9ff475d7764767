#include "mirrorscan/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mirrorscan/errors.hpp"

namespace mirrorscan {

void SpectrumRecord::validate() const {
    if (lambda_nm.size() != counts.size()) {
        throw ValidationError("spectrum: wavelength and count arrays differ in length");
    }
    if (lambda_nm.size() < 2) throw ValidationError("spectrum: need at least 2 samples");
    for (std::size_t i = 0; i < lambda_nm.size(); ++i) {
        if (!std::isfinite(lambda_nm[i]) || !std::isfinite(counts[i])) {
            throw ValidationError("spectrum: non-finite sample " + std::to_string(i));
        }
        if (counts[i] < 0.0) throw ValidationError("spectrum: negative count at sample " + std::to_string(i));
        if (i > 0 && !(lambda_nm[i] > lambda_nm[i - 1])) {
            throw ValidationError("spectrum: wavelengths must be strictly ascending");
        }
    }
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    return sum;
}

SpectrumRecord normalize_spectrum(const SpectrumRecord& spectrum) {
    spectrum.validate();
    const double area = trapezoid(spectrum.lambda_nm, spectrum.counts);
    if (!(area > 0.0)) throw ZeroSpectrum("spectrum integrates to zero");
    SpectrumRecord out = spectrum;
    for (auto& c : out.counts) c /= area;
    return out;
}

std::vector<double> resample(const SpectrumRecord& spectrum, std::span<const double> grid) {
    spectrum.validate();
    const auto& x = spectrum.lambda_nm;
    std::vector<double> out;
    out.reserve(grid.size());
    for (double g : grid) {
        if (g < x.front() || g > x.back()) {
            std::ostringstream msg;
            msg << "spectrum spans [" << x.front() << ", " << x.back() << "] nm and does not cover "
                << g << " nm";
            throw CoverageError(msg.str());
        }
        const auto hi = std::lower_bound(x.begin(), x.end(), g);
        const auto i = static_cast<std::size_t>(hi - x.begin());
        if (x[i] == g) {
            out.push_back(spectrum.counts[i]);
            continue;
        }
        const double t = (g - x[i - 1]) / (x[i] - x[i - 1]);
        out.push_back(spectrum.counts[i - 1] + t * (spectrum.counts[i] - spectrum.counts[i - 1]));
    }
    return out;
}

}  // namespace mirrorscan
