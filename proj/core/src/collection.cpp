#include "mirrorscan/collection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "mirrorscan/errors.hpp"
#include "mirrorscan/parallel.hpp"

namespace mirrorscan {

namespace {

constexpr double kPi = std::numbers::pi;

double checked_reference(double reference) {
    if (!(reference > std::numeric_limits<double>::min()) || !std::isfinite(reference)) {
        throw DivisionDegenerate("no-mirror reference power underflows");
    }
    return reference;
}

}  // namespace

double CollectionGeometry::half_angle() const {
    validate();
    return std::asin(numerical_aperture / host_index);
}

void CollectionGeometry::validate() const {
    if (!(numerical_aperture > 0.0 && numerical_aperture <= 1.0)) {
        throw ValidationError("numerical aperture must lie in (0, 1]");
    }
    if (!(host_index > numerical_aperture)) {
        throw ValidationError("numerical aperture must be below the host index");
    }
}

double collected_power(const ResolvedStack& upward, double depth_nm, const OrientationWeights& weights,
                       const CollectionGeometry& geom, const QuadratureOptions& opts) {
    geom.validate();
    const double n1 = upward.incidence_index();
    if (!(geom.numerical_aperture < n1)) {
        throw ValidationError("numerical aperture must be below the host index");
    }
    const double theta_max = std::asin(geom.numerical_aperture / n1);
    const double a = upward.k0() * n1 * depth_nm;

    std::optional<ResolvedStack> facet;
    if (geom.include_bottom_transmission) {
        const OpticalMaterial host("host", ConstantIndex{n1, 0.0});
        facet.emplace(LayerStack(host, {}, materials::air()), upward.wavelength_nm());
    }
    std::vector<double> breaks;
    for (double u : upward.singular_points()) {
        if (u < 1.0) breaks.push_back(std::asin(u));
    }

    auto integrand = [&](double theta) {
        const auto p = pattern_density(upward, a, theta);
        double tp = 1.0;
        double ts = 1.0;
        if (facet) {
            const double u = std::sin(theta);
            tp = facet->transmittance(Polarization::P, u);
            ts = facet->transmittance(Polarization::S, u);
        }
        const double power = weights.perpendicular * p.perp_p * tp +
                             weights.parallel * (p.par_p * tp + p.par_s * ts);
        return power * std::sin(theta);
    };
    return 2.0 * kPi * integrate(integrand, 0.0, theta_max, breaks, opts, "collected power");
}

double collected_power(const EmitterEnvironment& env, double wavelength_nm,
                       const CollectionGeometry& geom, const QuadratureOptions& opts) {
    env.validate();
    const ResolvedStack upward(env.upward, wavelength_nm);
    return collected_power(upward, env.depth_nm, env.weights, geom, opts);
}

double enhancement(const EmitterEnvironment& env, double wavelength_nm,
                   const CollectionGeometry& geom, const QuadratureOptions& opts) {
    const double with_mirror = collected_power(env, wavelength_nm, geom, opts);
    const double reference =
        checked_reference(collected_power(without_mirror(env), wavelength_nm, geom, opts));
    return with_mirror / reference;
}

std::string to_string(Normalization mode) {
    return mode == Normalization::Raw ? "raw" : "unit_counts";
}

Normalization parse_normalization(const std::string& text) {
    if (text == "raw") return Normalization::Raw;
    if (text == "unit_counts") return Normalization::UnitCounts;
    throw ValidationError("unknown normalization mode '" + text + "' (expected raw or unit_counts)");
}

std::vector<double> EnhancementMap::column(std::size_t lambda_index) const {
    std::vector<double> out(d_grid.size());
    for (std::size_t i = 0; i < d_grid.size(); ++i) out[i] = at(i, lambda_index);
    return out;
}

std::size_t EnhancementMap::lambda_index(double wavelength_nm) const {
    for (std::size_t j = 0; j < lambda_grid.size(); ++j) {
        if (std::abs(lambda_grid[j] - wavelength_nm) <= 1e-6) return j;
    }
    std::ostringstream msg;
    msg << "wavelength " << wavelength_nm << " nm is not on the map grid";
    throw GridMismatch(msg.str());
}

void EnhancementMap::set_metadata(const std::string& key, const std::string& value) {
    for (auto& [k, v] : metadata) {
        if (k == key) {
            v = value;
            return;
        }
    }
    metadata.emplace_back(key, value);
}

const std::string* EnhancementMap::find_metadata(const std::string& key) const {
    for (const auto& [k, v] : metadata) {
        if (k == key) return &v;
    }
    return nullptr;
}

void EnhancementMap::validate() const {
    if (d_grid.empty() || lambda_grid.empty()) throw ValidationError("enhancement map: empty grid");
    if (values.size() != d_grid.size() * lambda_grid.size()) {
        throw ValidationError("enhancement map: value count does not match grid dimensions");
    }
    for (const auto* grid : {&d_grid, &lambda_grid}) {
        for (std::size_t i = 1; i < grid->size(); ++i) {
            if (!((*grid)[i] > (*grid)[i - 1])) {
                throw ValidationError("enhancement map: grids must be strictly ascending");
            }
        }
    }
    for (double v : values) {
        if (!std::isfinite(v) || !(v > 0.0)) {
            throw ValidationError("enhancement map: values must be finite and positive");
        }
    }
}

EnhancementMap enhancement_map(std::span<const double> d_grid, std::span<const double> lambda_grid,
                               const CollectionGeometry& geom, const EmitterEnvironment& env_template,
                               const MapOptions& opts) {
    if (d_grid.empty() || lambda_grid.empty()) throw ValidationError("enhancement map: empty grid");
    for (const auto grid : {d_grid, lambda_grid}) {
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (!(grid[i] > grid[i - 1])) {
                throw ValidationError("enhancement map: grids must be strictly ascending");
            }
        }
    }
    if (d_grid.front() < 0.0) throw ValidationError("enhancement map: gap widths must be >= 0");
    env_template.validate();
    geom.validate();
    if (opts.gap_layer >= env_template.upward.layers().size()) {
        throw ValidationError("enhancement map: environment has no gap layer " +
                              std::to_string(opts.gap_layer));
    }

    const std::size_t nd = d_grid.size();
    const std::size_t nl = lambda_grid.size();

    // Per-wavelength state: resolved mirror stack and no-mirror reference.
    std::vector<std::optional<ResolvedStack>> stacks(nl);
    std::vector<double> reference(nl, 0.0);
    const auto reference_env = without_mirror(env_template);
    parallel_for(nl, opts.workers, [&](std::size_t j) {
        const double lambda = lambda_grid[j];
        try {
            stacks[j].emplace(env_template.upward, lambda);
            reference[j] = checked_reference(
                collected_power(reference_env, lambda, geom, opts.quadrature));
        } catch (const NumericError& e) {
            throw CellFailure(d_grid.front(), lambda, e.what());
        }
    });

    EnhancementMap map;
    map.d_grid.assign(d_grid.begin(), d_grid.end());
    map.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
    map.values.assign(nd * nl, 0.0);

    parallel_for(nd * nl, opts.workers, [&](std::size_t cell) {
        const std::size_t i = cell / nl;
        const std::size_t j = cell % nl;
        const double d = d_grid[i];
        try {
            double power;
            if (d == 0.0) {
                power = collected_power(with_gap(env_template, 0.0, opts.gap_layer), lambda_grid[j],
                                        geom, opts.quadrature);
            } else {
                ResolvedStack stack = *stacks[j];
                stack.set_layer_thickness(opts.gap_layer, d);
                power = collected_power(stack, env_template.depth_nm, env_template.weights, geom,
                                        opts.quadrature);
            }
            map.values[cell] = power / reference[j];
        } catch (const NumericError& e) {
            throw CellFailure(d, lambda_grid[j], e.what());
        }
    });

    std::ostringstream na;
    na << geom.numerical_aperture;
    map.set_metadata("numerical_aperture", na.str());
    map.set_metadata("bottom_transmission", geom.include_bottom_transmission ? "on" : "off");
    std::ostringstream w;
    w << env_template.weights.parallel << "/" << env_template.weights.perpendicular;
    map.set_metadata("weights_parallel_perpendicular", w.str());
    std::ostringstream z0;
    z0 << env_template.depth_nm;
    map.set_metadata("depth_nm", z0.str());
    std::string stack_desc = env_template.upward.incidence().name();
    for (const auto& layer : env_template.upward.layers()) stack_desc += " | " + layer.material.name();
    stack_desc += " | " + env_template.upward.exit().name();
    map.set_metadata("stack", stack_desc);
    map.set_metadata("normalization", to_string(Normalization::Raw));
    return map;
}

EnhancementMap normalized_model_enhancement(const EnhancementMap& map,
                                            const SpectrumRecord& reference_spectrum) {
    map.validate();
    if (map.lambda_grid.size() < 2) {
        throw CoverageError("unit-counts normalization needs at least 2 wavelengths");
    }
    const auto& grid = map.lambda_grid;
    std::vector<double> weight = resample(reference_spectrum, grid);
    const double area = trapezoid(grid, weight);
    if (!(area > 0.0)) throw ZeroReference("reference spectrum is zero over the map's wavelength grid");
    for (auto& w : weight) w /= area;

    EnhancementMap out = map;
    std::vector<double> product(grid.size());
    for (std::size_t i = 0; i < map.d_grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) product[j] = weight[j] * map.at(i, j);
        const double norm = trapezoid(grid, product);
        if (!(norm > 0.0)) throw DivisionDegenerate("weighted enhancement integrates to zero");
        for (std::size_t j = 0; j < grid.size(); ++j) out.at(i, j) = map.at(i, j) / norm;
    }
    out.set_metadata("normalization", to_string(Normalization::UnitCounts));
    return out;
}

double pump_modulation(const EmitterEnvironment& env, double pump_wavelength_nm) {
    env.validate();
    const ResolvedStack stack(env.upward, pump_wavelength_nm);
    const double a = stack.k0() * stack.incidence_index() * env.depth_nm;
    const Complex r = stack.reflection(Polarization::S, 0.0);
    return std::norm(1.0 + r * std::exp(Complex{0.0, 2.0 * a}));
}

}  // namespace mirrorscan
