#pragma once

#include <span>
#include <vector>

#include "mirrorscan/materials.hpp"
#include "mirrorscan/quadrature.hpp"
#include "mirrorscan/stratified.hpp"

namespace mirrorscan {

/// Relative dipole strengths parallel and perpendicular to the surface.
struct OrientationWeights {
    double parallel = 0.659;
    double perpendicular = 0.341;

    /// Values used for NV ensembles under a (100) surface in the reference model.
    static OrientationWeights nv_default() { return {0.659, 0.341}; }
    /// Geometric average over the four <111> axes under a (100) surface.
    static OrientationWeights nv_geometric();

    void validate() const;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// The four <111> symmetry axes of the diamond lattice, normalized.
std::vector<Vec3> nv_axes_111();

/// Averages the in-plane dipole tensor (I - a a^T) / 2 of each symmetry axis a
/// and projects it onto the surface normal. Throws EmptyAxisList.
OrientationWeights orientation_weights(std::span<const Vec3> nv_axes, Vec3 surface_normal);

/// Emitter at depth z0 below the host surface. Above the surface sits
/// `upward` (host | layers | exit), below it the host continues indefinitely.
struct EmitterEnvironment {
    OpticalMaterial host;
    double depth_nm = 8.0;
    LayerStack upward;
    OpticalMaterial downward;
    OrientationWeights weights;

    void validate() const;
};

/// Diamond host, z0 = 8 nm, diamond | air(gap) | mirror, NV default weights.
EmitterEnvironment mirror_environment(const OpticalMaterial& mirror, double gap_nm);

/// Same environment with the upward stack replaced by host | gap-medium,
/// the gap medium being the first layer's material (the exit when there are no
/// layers). This is the "mirror removed" reference.
EmitterEnvironment without_mirror(const EmitterEnvironment& env);

/// Sets the thickness of layer `gap_layer`; a thickness of 0 removes the layer.
EmitterEnvironment with_gap(const EmitterEnvironment& env, double gap_nm, std::size_t gap_layer = 0);

/// Normalized decay rates Gamma / Gamma_0 (bulk host).
struct DecayRates {
    double total = 0.0;
    double radiative_down = 0.0;
    double radiative_up = 0.0;
    double nonradiative = 0.0;
    double perpendicular = 0.0;
    double parallel = 0.0;
};

/// Gamma_perp / Gamma_0 = 1 + 3/2 Re int u^3/l r_p exp(2i k1 z0 l) du, l = sqrt(1 - u^2).
double decay_rate_perpendicular(const EmitterEnvironment& env, double wavelength_nm,
                                const QuadratureOptions& opts = {});

/// Gamma_par / Gamma_0 = 1 + 3/4 Re int u/l (r_s - l^2 r_p) exp(2i k1 z0 l) du.
double decay_rate_parallel(const EmitterEnvironment& env, double wavelength_nm,
                           const QuadratureOptions& opts = {});

/// Orientation-weighted total rate plus its split into power radiated into the
/// host below the emitter, power transmitted into a lossless exit half-space,
/// and the remainder (absorption and quenching).
///
/// The radiative parts come from angular integrals of the far field, not from
/// the wavevector integral, so for lossless stacks `nonradiative` is an
/// independent energy-balance check. Only host-propagating waves (u < 1) are
/// counted in radiative_up; an exit medium denser than the host would receive
/// additional evanescently coupled power that lands in `nonradiative`.
DecayRates total_decay(const EmitterEnvironment& env, double wavelength_nm,
                       const QuadratureOptions& opts = {});

/// Power per unit solid angle in the host below the emitter, per dipole class.
/// A dipole in homogeneous host integrates to 1 over the full sphere.
struct PatternSample {
    double perp_p = 0.0;
    double par_p = 0.0;
    double par_s = 0.0;
};

struct AngularPattern {
    // Polar angle from the downward surface normal, inside the host, [0, pi/2).
    std::vector<double> theta;
    std::vector<PatternSample> densities;
};

/// Far-field density at polar angle theta for a resolved upward stack.
/// `k1z0` is host wavenumber times emitter depth.
PatternSample pattern_density(const ResolvedStack& upward, double k1z0, double theta);

AngularPattern angular_pattern(const EmitterEnvironment& env, double wavelength_nm,
                               std::span<const double> theta_grid);

}  // namespace mirrorscan
