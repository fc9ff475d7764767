#pragma once

#include <cstddef>
#include <vector>

#include "mirrorscan/materials.hpp"

namespace mirrorscan {

enum class Polarization { S, P };

struct Layer {
    OpticalMaterial material;
    double thickness_nm;
};

/// Planar layers between an incidence half-space (where the emitter lives) and
/// an exit half-space. Layers are ordered from the incidence side outward.
///
/// The incidence half-space must be lossless so that the in-plane wavevector
/// normalized to its wavenumber, u = k_par / (n1 k0), is real.
class LayerStack {
public:
    LayerStack(OpticalMaterial incidence, std::vector<Layer> layers, OpticalMaterial exit);

    [[nodiscard]] const OpticalMaterial& incidence() const noexcept { return incidence_; }
    [[nodiscard]] const std::vector<Layer>& layers() const noexcept { return layers_; }
    [[nodiscard]] const OpticalMaterial& exit() const noexcept { return exit_; }

    [[nodiscard]] LayerStack with_layer_thickness(std::size_t index, double thickness_nm) const;

private:
    OpticalMaterial incidence_;
    std::vector<Layer> layers_;
    OpticalMaterial exit_;
};

/// k0 * sqrt(eps - n1^2 u^2) on the branch Im >= 0 (Re >= 0 when purely real).
Complex longitudinal_wavenumber(Complex permittivity, double k0, double u, double n1);

/// Single-interface Fresnel reflection, medium 1 -> medium 2.
///   S: (kz1 - kz2) / (kz1 + kz2)
///   P: (eps2 kz1 - eps1 kz2) / (eps2 kz1 + eps1 kz2)
/// With this convention a perfect conductor gives r_S = -1, r_P = +1 at normal
/// incidence (r_P is the tangential H-field ratio). The dipole interference
/// factors in dipole_emission depend on exactly this convention.
Complex interface_reflection(Polarization pol, Complex kz1, Complex kz2, Complex eps1, Complex eps2);

/// Single-interface transmission in the same amplitude convention
/// (E field for S, tangential H field for P).
Complex interface_transmission(Polarization pol, Complex kz1, Complex kz2, Complex eps1,
                               Complex eps2);

struct StackResponse {
    Complex r;
    Complex t;
};

/// A LayerStack with all material indices evaluated at one wavelength.
///
/// This is the hot path of every integral in the library: resolving once per
/// wavelength keeps dispersion-table lookups out of the quadrature loops.
class ResolvedStack {
public:
    ResolvedStack(const LayerStack& stack, double wavelength_nm);

    [[nodiscard]] double wavelength_nm() const noexcept { return wavelength_nm_; }
    [[nodiscard]] double k0() const noexcept { return k0_; }
    [[nodiscard]] double incidence_index() const noexcept { return n1_; }
    [[nodiscard]] std::size_t layer_count() const noexcept { return thickness_.size(); }
    [[nodiscard]] bool exit_is_ideal_mirror() const noexcept { return ideal_exit_; }
    // Permittivity of medium i: 0 = incidence, 1..N = layers, N+1 = exit.
    [[nodiscard]] Complex medium_permittivity(std::size_t i) const { return eps_.at(i); }
    [[nodiscard]] std::size_t medium_count() const noexcept { return eps_.size(); }

    void set_layer_thickness(std::size_t index, double thickness_nm);

    /// Reflection coefficient seen from the incidence half-space.
    [[nodiscard]] Complex reflection(Polarization pol, double u) const;

    /// Reflection and transmission amplitudes, recursively combined from the
    /// exit side inward.
    [[nodiscard]] StackResponse response(Polarization pol, double u) const;

    /// Power transmitted into the exit half-space as a fraction of the
    /// incident power, for u < 1. Zero for absorbing or ideal-mirror exits and
    /// for waves evanescent in the exit medium.
    [[nodiscard]] double transmittance(Polarization pol, double u) const;

    // Normalized in-plane wavevectors where some medium's light line sits
    // (|n_j| / n1), plus the surface-plasmon position for metallic exits.
    // These are breakpoints for quadrature over u.
    [[nodiscard]] std::vector<double> singular_points() const;

private:
    double wavelength_nm_;
    double k0_;
    double n1_;
    bool ideal_exit_;
    std::vector<Complex> eps_;
    std::vector<double> thickness_;
};

Complex stack_reflection(const LayerStack& stack, Polarization pol, double u, double wavelength_nm);

}  // namespace mirrorscan
