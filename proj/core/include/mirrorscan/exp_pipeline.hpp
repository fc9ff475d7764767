#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mirrorscan/collection.hpp"
#include "mirrorscan/spectrum.hpp"

namespace mirrorscan {

/// Spectra recorded at a sequence of mirror positions on a shared wavelength grid.
struct ScanDataset {
    std::vector<double> d_nm;
    std::vector<double> lambda_nm;
    std::vector<std::vector<double>> counts;  // counts[i] belongs to d_nm[i]

    void validate() const;
    [[nodiscard]] SpectrumRecord spectrum(std::size_t index) const;
};

/// E(d, l) = S0(d, l) / S_ref0(l), both normalized to unit trapezoidal area
/// over the scan's wavelength grid. A reference on a different grid is
/// linearly resampled onto the scan grid (recorded in the map metadata).
/// Throws ZeroSpectrum naming the offending d, ZeroReference, GridMismatch.
EnhancementMap enhancement_from_scan(const ScanDataset& scan, const SpectrumRecord& reference);

struct FringeOptions {
    std::size_t smoothing_window = 5;  // Savitzky-Golay, quadratic; 5 or 7
    double min_prominence = 0.05;
};

/// Positions of local maxima of the smoothed column, keeping those whose
/// topographic prominence reaches `min_prominence`. Throws ColumnTooShort
/// for fewer than 7 samples.
std::vector<double> fringe_maxima(std::span<const double> d_nm, std::span<const double> values,
                                  const FringeOptions& opts = {});
std::vector<double> fringe_maxima(const EnhancementMap& map, double wavelength_nm,
                                  const FringeOptions& opts = {});

/// Quadratic Savitzky-Golay smoothing; ends are left unsmoothed.
std::vector<double> savitzky_golay(std::span<const double> values, std::size_t window);

/// Peak-to-peak amplitude of the smoothed column within +-period/2 of each sample.
std::vector<double> fringe_envelope(std::span<const double> d_nm, std::span<const double> values,
                                    double fringe_period_nm, std::size_t smoothing_window = 5);

/// Minima of the fringe envelope (beat nodes): samples that are the envelope
/// minimum within +-min_separation/2 and lie below half the largest envelope
/// value in that window.
std::vector<double> envelope_nodes(std::span<const double> d_nm, std::span<const double> values,
                                   double fringe_period_nm, double min_separation_nm);

/// Produces a model map on the measured map's d positions for a given offset:
/// model d = position - first position + offset.
using ModelGenerator = std::function<EnhancementMap(double offset_nm)>;

struct D0Options {
    double search_min_nm = 0.0;
    double search_max_nm = 2000.0;
    double step_nm = 5.0;
    double poor_fit_rms_nm = 60.0;
    FringeOptions fringes;
};

struct D0Estimate {
    double offset_nm = 0.0;
    double coarse_offset_nm = 0.0;
    double rms_residual_nm = 0.0;
    std::size_t measured_maxima = 0;
    std::size_t model_maxima = 0;
    bool poor_fit = false;
    // (offset, rms residual) for every offset evaluated in the fine stage.
    std::vector<std::pair<double, double>> residual_curve;
};

/// Rigid d-offset aligning measured and model fringes at one wavelength.
///
/// Fringe maxima alone repeat every fringe period, so the search runs in two
/// stages: a coarse least-squares match of the beat envelopes over the full
/// search range, then least squares on fringe-maxima positions within a
/// quarter wavelength of the coarse offset. Throws NoFringes when the measured
/// column has no maxima or no model offset produces any.
D0Estimate estimate_d0(const EnhancementMap& measured, const ModelGenerator& model_generator,
                       double wavelength_nm, const D0Options& opts = {});

/// Generator that evaluates `enhancement` for every (position, offset) pair
/// once, up front, on `workers` threads.
ModelGenerator precomputed_model_generator(const EmitterEnvironment& env_template,
                                           const CollectionGeometry& geom, double wavelength_nm,
                                           std::span<const double> positions_nm,
                                           const D0Options& opts, unsigned workers = 0,
                                           std::size_t gap_layer = 0);

}  // namespace mirrorscan
