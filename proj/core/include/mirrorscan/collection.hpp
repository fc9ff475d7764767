#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mirrorscan/dipole_emission.hpp"
#include "mirrorscan/quadrature.hpp"
#include "mirrorscan/spectrum.hpp"

namespace mirrorscan {

/// Objective acceptance seen from inside the host.
struct CollectionGeometry {
    double numerical_aperture = 0.35;
    // Weight p and s power by the host -> air Fresnel transmittance of the
    // bottom facet.
    bool include_bottom_transmission = false;
    double host_index = materials::kDiamondIndex;

    /// arcsin(NA / n_host)
    [[nodiscard]] double half_angle() const;
    void validate() const;
};

/// P = 2 pi int_0^theta_max [a_perp perp_p + a_par (par_p + par_s)] sin(theta) dtheta
double collected_power(const EmitterEnvironment& env, double wavelength_nm,
                       const CollectionGeometry& geom, const QuadratureOptions& opts = {});

/// Same integral for an already resolved upward stack.
double collected_power(const ResolvedStack& upward, double depth_nm, const OrientationWeights& weights,
                       const CollectionGeometry& geom, const QuadratureOptions& opts = {});

/// Collected power with the mirror divided by collected power with the
/// upward stack replaced by host | gap medium (see without_mirror).
double enhancement(const EmitterEnvironment& env, double wavelength_nm,
                   const CollectionGeometry& geom, const QuadratureOptions& opts = {});

enum class Normalization { Raw, UnitCounts };

std::string to_string(Normalization mode);
Normalization parse_normalization(const std::string& text);

/// E(d, lambda) on a rectangular grid, stored row-major by d.
struct EnhancementMap {
    std::vector<double> d_grid;
    std::vector<double> lambda_grid;
    std::vector<double> values;
    // Ordered key/value pairs written as `# key: value` comment lines.
    std::vector<std::pair<std::string, std::string>> metadata;

    [[nodiscard]] double at(std::size_t d_index, std::size_t lambda_index) const {
        return values[d_index * lambda_grid.size() + lambda_index];
    }
    double& at(std::size_t d_index, std::size_t lambda_index) {
        return values[d_index * lambda_grid.size() + lambda_index];
    }
    [[nodiscard]] std::vector<double> column(std::size_t lambda_index) const;

    /// Index of a grid wavelength (within 1e-6 nm). Throws GridMismatch.
    [[nodiscard]] std::size_t lambda_index(double wavelength_nm) const;

    void set_metadata(const std::string& key, const std::string& value);
    [[nodiscard]] const std::string* find_metadata(const std::string& key) const;

    // Grid sizes match values, grids ascending, values finite and positive.
    void validate() const;
};

struct MapOptions {
    unsigned workers = 0;  // 0 = all hardware threads
    std::size_t gap_layer = 0;
    QuadratureOptions quadrature;
};

/// Element-wise enhancement. `env_template` supplies everything except the
/// thickness of its gap layer, which is set to each d in turn. Output is
/// identical for any worker count.
EnhancementMap enhancement_map(std::span<const double> d_grid, std::span<const double> lambda_grid,
                               const CollectionGeometry& geom, const EmitterEnvironment& env_template,
                               const MapOptions& opts = {});

/// Emulates per-distance unit-counts normalization on a model map:
/// E'(d, l) = E(d, l) / int S_ref0(l') E(d, l') dl', with S_ref0 the reference
/// resampled onto the map's wavelength grid and normalized to unit area there.
EnhancementMap normalized_model_enhancement(const EnhancementMap& map,
                                            const SpectrumRecord& reference_spectrum);

/// Normal-incidence standing-wave intensity of the pump at the emitter,
/// |1 + r_s(0) exp(2i k1 z0)|^2. Diagnostic only.
double pump_modulation(const EmitterEnvironment& env, double pump_wavelength_nm = 532.0);

}  // namespace mirrorscan
