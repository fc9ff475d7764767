#include "mirrorscan/exp_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "mirrorscan/errors.hpp"
#include "mirrorscan/parallel.hpp"

namespace mirrorscan {

namespace {

std::string nm_text(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

bool same_grid(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-9) return false;
    }
    return true;
}

long long grid_key(double d_nm) { return std::llround(d_nm * 1e6); }

}  // namespace

void ScanDataset::validate() const {
    if (d_nm.empty()) throw ValidationError("scan: no spectra");
    if (counts.size() != d_nm.size()) {
        throw ValidationError("scan: number of spectra does not match number of positions");
    }
    if (lambda_nm.size() < 2) throw ValidationError("scan: need at least 2 wavelengths");
    for (std::size_t j = 1; j < lambda_nm.size(); ++j) {
        if (!(lambda_nm[j] > lambda_nm[j - 1])) {
            throw ValidationError("scan: wavelengths must be strictly ascending");
        }
    }
    for (std::size_t i = 0; i < d_nm.size(); ++i) {
        if (i > 0 && !(d_nm[i] > d_nm[i - 1])) {
            throw ValidationError("scan: positions must be strictly increasing (d=" +
                                  nm_text(d_nm[i]) + " nm)");
        }
        if (counts[i].size() != lambda_nm.size()) {
            throw GridMismatch("scan: spectrum at d=" + nm_text(d_nm[i]) +
                               " nm does not match the wavelength grid");
        }
        for (double c : counts[i]) {
            if (!std::isfinite(c) || c < 0.0) {
                throw ValidationError("scan: invalid count in spectrum at d=" + nm_text(d_nm[i]) + " nm");
            }
        }
    }
}

SpectrumRecord ScanDataset::spectrum(std::size_t index) const {
    return {lambda_nm, counts.at(index)};
}

EnhancementMap enhancement_from_scan(const ScanDataset& scan, const SpectrumRecord& reference) {
    scan.validate();
    reference.validate();

    EnhancementMap map;
    map.d_grid = scan.d_nm;
    map.lambda_grid = scan.lambda_nm;

    std::vector<double> ref;
    if (same_grid(reference.lambda_nm, scan.lambda_nm)) {
        ref = reference.counts;
    } else {
        try {
            ref = resample(reference, scan.lambda_nm);
        } catch (const CoverageError& e) {
            throw GridMismatch(std::string("reference cannot be resampled onto the scan grid: ") +
                               e.what());
        }
        map.set_metadata("reference_resampling", "linear");
    }
    const double ref_area = trapezoid(scan.lambda_nm, ref);
    if (!(ref_area > 0.0)) throw ZeroReference("reference spectrum integrates to zero");
    for (std::size_t j = 0; j < ref.size(); ++j) {
        if (!(ref[j] > 0.0)) {
            throw ZeroReference("reference spectrum is zero at " + nm_text(scan.lambda_nm[j]) + " nm");
        }
        ref[j] /= ref_area;
    }

    const std::size_t nl = scan.lambda_nm.size();
    map.values.resize(scan.d_nm.size() * nl);
    for (std::size_t i = 0; i < scan.d_nm.size(); ++i) {
        const double area = trapezoid(scan.lambda_nm, scan.counts[i]);
        if (!(area > 0.0)) {
            throw ZeroSpectrum("spectrum at d=" + nm_text(scan.d_nm[i]) + " nm integrates to zero");
        }
        for (std::size_t j = 0; j < nl; ++j) map.at(i, j) = scan.counts[i][j] / area / ref[j];
    }
    map.set_metadata("normalization", to_string(Normalization::UnitCounts));
    map.set_metadata("source", "measured scan");
    return map;
}

std::vector<double> savitzky_golay(std::span<const double> values, std::size_t window) {
    if (window < 3 || window % 2 == 0) {
        throw ValidationError("smoothing window must be odd and at least 3");
    }
    const auto m = static_cast<long>(window / 2);
    const double md = static_cast<double>(m);
    const double denom = (2 * md + 3) * (2 * md + 1) * (2 * md - 1);
    std::vector<double> coeff(window);
    for (long j = -m; j <= m; ++j) {
        const double jd = static_cast<double>(j);
        coeff[static_cast<std::size_t>(j + m)] = 3.0 * (3 * md * md + 3 * md - 1 - 5 * jd * jd) / denom;
    }
    std::vector<double> out(values.begin(), values.end());
    const auto n = static_cast<long>(values.size());
    for (long i = m; i + m < n; ++i) {
        double acc = 0.0;
        for (long j = -m; j <= m; ++j) {
            acc += coeff[static_cast<std::size_t>(j + m)] * values[static_cast<std::size_t>(i + j)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

std::vector<double> fringe_maxima(std::span<const double> d_nm, std::span<const double> values,
                                  const FringeOptions& opts) {
    if (d_nm.size() != values.size()) throw ValidationError("fringe_maxima: size mismatch");
    if (values.size() < 7) {
        throw ColumnTooShort("fringe detection needs at least 7 samples, got " +
                             std::to_string(values.size()));
    }
    const auto y = savitzky_golay(values, opts.smoothing_window);
    const std::size_t n = y.size();
    std::vector<double> maxima;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        double left_min = y[i];
        for (std::size_t j = i; j-- > 0;) {
            if (y[j] > y[i]) break;
            left_min = std::min(left_min, y[j]);
        }
        double right_min = y[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            if (y[j] > y[i]) break;
            right_min = std::min(right_min, y[j]);
        }
        if (y[i] - std::max(left_min, right_min) >= opts.min_prominence) maxima.push_back(d_nm[i]);
    }
    return maxima;
}

std::vector<double> fringe_maxima(const EnhancementMap& map, double wavelength_nm,
                                  const FringeOptions& opts) {
    const auto column = map.column(map.lambda_index(wavelength_nm));
    return fringe_maxima(map.d_grid, column, opts);
}

std::vector<double> fringe_envelope(std::span<const double> d_nm, std::span<const double> values,
                                    double fringe_period_nm, std::size_t smoothing_window) {
    if (d_nm.size() != values.size()) throw ValidationError("fringe_envelope: size mismatch");
    const auto y = values.size() >= smoothing_window ? savitzky_golay(values, smoothing_window)
                                                     : std::vector<double>(values.begin(), values.end());
    const double half = fringe_period_nm / 2.0;
    std::vector<double> envelope(y.size());
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        while (d_nm[i] - d_nm[lo] > half) ++lo;
        while (hi + 1 < y.size() && d_nm[hi + 1] - d_nm[i] <= half) ++hi;
        const auto [mn, mx] = std::minmax_element(y.begin() + static_cast<std::ptrdiff_t>(lo),
                                                  y.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
        envelope[i] = *mx - *mn;
    }
    return envelope;
}

std::vector<double> envelope_nodes(std::span<const double> d_nm, std::span<const double> values,
                                   double fringe_period_nm, double min_separation_nm) {
    const auto env = fringe_envelope(d_nm, values, fringe_period_nm);
    const double half = min_separation_nm / 2.0;
    const double edge = fringe_period_nm / 2.0;
    std::vector<double> nodes;
    if (d_nm.empty()) return nodes;
    for (std::size_t i = 0; i < env.size(); ++i) {
        if (d_nm[i] - d_nm.front() < edge || d_nm.back() - d_nm[i] < edge) continue;
        bool is_min = true;
        double window_max = env[i];
        for (std::size_t j = 0; j < env.size() && is_min; ++j) {
            if (std::abs(d_nm[j] - d_nm[i]) > half) continue;
            window_max = std::max(window_max, env[j]);
            if (env[j] < env[i] || (j < i && env[j] == env[i])) is_min = false;
        }
        if (is_min && env[i] < 0.5 * window_max) nodes.push_back(d_nm[i]);
    }
    return nodes;
}

D0Estimate estimate_d0(const EnhancementMap& measured, const ModelGenerator& model_generator,
                       double wavelength_nm, const D0Options& opts) {
    if (!(opts.step_nm > 0.0) || opts.search_max_nm < opts.search_min_nm) {
        throw ValidationError("d0 search: invalid range or step");
    }
    const auto column = measured.column(measured.lambda_index(wavelength_nm));
    const auto& positions = measured.d_grid;
    const auto measured_maxima = fringe_maxima(positions, column, opts.fringes);
    if (measured_maxima.empty()) throw NoFringes("measured column has no fringe maxima");

    const double period = wavelength_nm / 2.0;
    const auto measured_env = fringe_envelope(positions, column, period, opts.fringes.smoothing_window);

    const auto count =
        static_cast<std::size_t>(std::llround((opts.search_max_nm - opts.search_min_nm) / opts.step_nm)) + 1;
    struct Candidate {
        double offset;
        double envelope_sse;
        std::vector<double> maxima;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double offset = opts.search_min_nm + static_cast<double>(k) * opts.step_nm;
        const auto model = model_generator(offset);
        if (model.d_grid.size() != positions.size()) {
            throw GridMismatch("model map does not share the measured d positions");
        }
        const auto model_column = model.column(model.lambda_index(wavelength_nm));
        const auto model_env = fringe_envelope(positions, model_column, period, opts.fringes.smoothing_window);
        double sse = 0.0;
        for (std::size_t i = 0; i < model_env.size(); ++i) {
            const double diff = model_env[i] - measured_env[i];
            sse += diff * diff;
        }
        candidates.push_back({offset, sse, fringe_maxima(positions, model_column, opts.fringes)});
    }

    const auto coarse = std::min_element(candidates.begin(), candidates.end(),
                                         [](const Candidate& a, const Candidate& b) {
                                             return a.envelope_sse < b.envelope_sse;
                                         });

    D0Estimate best;
    best.coarse_offset_nm = coarse->offset;
    best.measured_maxima = measured_maxima.size();
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        if (std::abs(c.offset - coarse->offset) > wavelength_nm / 4.0 || c.maxima.empty()) continue;
        double sum = 0.0;
        for (double x : c.maxima) {
            const auto it = std::lower_bound(measured_maxima.begin(), measured_maxima.end(), x);
            double nearest = std::numeric_limits<double>::infinity();
            if (it != measured_maxima.end()) nearest = *it - x;
            if (it != measured_maxima.begin()) nearest = std::min(nearest, x - *std::prev(it));
            sum += nearest * nearest;
        }
        const double mean_sq = sum / static_cast<double>(c.maxima.size());
        best.residual_curve.emplace_back(c.offset, std::sqrt(mean_sq));
        if (mean_sq < best_score) {
            best_score = mean_sq;
            best.offset_nm = c.offset;
            best.model_maxima = c.maxima.size();
        }
    }
    if (!std::isfinite(best_score)) throw NoFringes("model columns have no fringe maxima");
    best.rms_residual_nm = std::sqrt(best_score);
    best.poor_fit = best.rms_residual_nm > opts.poor_fit_rms_nm;
    return best;
}

ModelGenerator precomputed_model_generator(const EmitterEnvironment& env_template,
                                           const CollectionGeometry& geom, double wavelength_nm,
                                           std::span<const double> positions_nm,
                                           const D0Options& opts, unsigned workers,
                                           std::size_t gap_layer) {
    if (positions_nm.empty()) throw ValidationError("model generator: no positions");
    std::vector<double> positions(positions_nm.begin(), positions_nm.end());
    const double origin = positions.front();
    const auto count =
        static_cast<std::size_t>(std::llround((opts.search_max_nm - opts.search_min_nm) / opts.step_nm)) + 1;

    std::map<long long, double> table;
    for (std::size_t k = 0; k < count; ++k) {
        const double offset = opts.search_min_nm + static_cast<double>(k) * opts.step_nm;
        for (double p : positions) {
            const double d = p - origin + offset;
            table.emplace(grid_key(d), d);
        }
    }
    std::vector<double> gaps;
    gaps.reserve(table.size());
    for (const auto& [key, d] : table) gaps.push_back(d);

    const auto lambda = std::vector<double>{wavelength_nm};
    const auto grid = enhancement_map(gaps, lambda, geom, env_template,
                                      MapOptions{workers, gap_layer, QuadratureOptions{}});
    auto values = std::make_shared<std::map<long long, double>>();
    for (std::size_t i = 0; i < gaps.size(); ++i) values->emplace(grid_key(gaps[i]), grid.values[i]);

    return [=](double offset_nm) {
        EnhancementMap model;
        model.d_grid = positions;
        model.lambda_grid = lambda;
        model.values.reserve(positions.size());
        for (double p : positions) {
            const double d = p - origin + offset_nm;
            const auto it = values->find(grid_key(d));
            if (it != values->end()) {
                model.values.push_back(it->second);
            } else {
                model.values.push_back(
                    enhancement(with_gap(env_template, d, gap_layer), wavelength_nm, geom));
            }
        }
        model.set_metadata("offset_nm", nm_text(offset_nm));
        return model;
    };
}

}  // namespace mirrorscan
