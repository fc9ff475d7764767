#include "mirrorscan/stratified.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mirrorscan/errors.hpp"

namespace mirrorscan {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_layer(const Layer& layer, std::size_t index) {
    if (!(layer.thickness_nm > 0.0) || !std::isfinite(layer.thickness_nm)) {
        throw ValidationError("layer " + std::to_string(index) + " ('" + layer.material.name() +
                              "'): thickness must be finite and positive");
    }
    if (layer.material.is_ideal_mirror()) {
        throw ValidationError("ideal mirror is only allowed as the exit half-space");
    }
}

Complex checked_ratio(Complex num, Complex den, const char* what) {
    if (std::abs(den) == 0.0) {
        throw DegenerateInterface(std::string(what) + ": vanishing denominator");
    }
    const Complex r = num / den;
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
        throw DegenerateInterface(std::string(what) + ": non-finite coefficient");
    }
    return r;
}

}  // namespace

LayerStack::LayerStack(OpticalMaterial incidence, std::vector<Layer> layers, OpticalMaterial exit)
    : incidence_(std::move(incidence)), layers_(std::move(layers)), exit_(std::move(exit)) {
    if (incidence_.is_ideal_mirror()) {
        throw ValidationError("incidence half-space cannot be an ideal mirror");
    }
    if (const auto* c = std::get_if<ConstantIndex>(&incidence_.model()); c && c->k != 0.0) {
        throw ValidationError("incidence half-space '" + incidence_.name() + "' must be lossless");
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) check_layer(layers_[i], i);
}

LayerStack LayerStack::with_layer_thickness(std::size_t index, double thickness_nm) const {
    if (index >= layers_.size()) {
        throw ValidationError("layer index " + std::to_string(index) + " out of range");
    }
    auto layers = layers_;
    layers[index].thickness_nm = thickness_nm;
    return {incidence_, std::move(layers), exit_};
}

Complex longitudinal_wavenumber(Complex permittivity, double k0, double u, double n1) {
    Complex q = std::sqrt(permittivity - n1 * n1 * u * u);
    if (q.imag() < 0.0 || (q.imag() == 0.0 && q.real() < 0.0)) q = -q;
    return k0 * q;
}

Complex interface_reflection(Polarization pol, Complex kz1, Complex kz2, Complex eps1, Complex eps2) {
    if (kz1 == kz2 && eps1 == eps2) return 0.0;
    if (pol == Polarization::S) {
        return checked_ratio(kz1 - kz2, kz1 + kz2, "s-polarized interface");
    }
    return checked_ratio(eps2 * kz1 - eps1 * kz2, eps2 * kz1 + eps1 * kz2, "p-polarized interface");
}

Complex interface_transmission(Polarization pol, Complex kz1, Complex kz2, Complex eps1,
                               Complex eps2) {
    if (kz1 == kz2 && eps1 == eps2) return 1.0;
    if (pol == Polarization::S) {
        return checked_ratio(2.0 * kz1, kz1 + kz2, "s-polarized interface");
    }
    return checked_ratio(2.0 * eps2 * kz1, eps2 * kz1 + eps1 * kz2, "p-polarized interface");
}

ResolvedStack::ResolvedStack(const LayerStack& stack, double wavelength_nm)
    : wavelength_nm_(wavelength_nm),
      k0_(2.0 * std::numbers::pi / wavelength_nm),
      ideal_exit_(stack.exit().is_ideal_mirror()) {
    if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm)) {
        throw ValidationError("wavelength must be positive");
    }
    const Complex n1 = complex_index(stack.incidence(), wavelength_nm);
    if (n1.imag() != 0.0) {
        std::ostringstream msg;
        msg << "incidence half-space '" << stack.incidence().name() << "' is lossy at "
            << wavelength_nm << " nm";
        throw ValidationError(msg.str());
    }
    n1_ = n1.real();
    eps_.reserve(stack.layers().size() + 2);
    eps_.push_back(n1 * n1);
    for (const auto& layer : stack.layers()) {
        eps_.push_back(permittivity(layer.material, wavelength_nm));
        thickness_.push_back(layer.thickness_nm);
    }
    // An ideal mirror has no permittivity; the slot is kept so indices line up.
    eps_.push_back(ideal_exit_ ? Complex{} : permittivity(stack.exit(), wavelength_nm));
}

void ResolvedStack::set_layer_thickness(std::size_t index, double thickness_nm) {
    if (index >= thickness_.size()) {
        throw ValidationError("layer index " + std::to_string(index) + " out of range");
    }
    if (!(thickness_nm > 0.0) || !std::isfinite(thickness_nm)) {
        throw ValidationError("layer thickness must be finite and positive");
    }
    thickness_[index] = thickness_nm;
}

StackResponse ResolvedStack::response(Polarization pol, double u) const {
    const std::size_t exit = eps_.size() - 1;
    auto kz = [&](std::size_t j) { return longitudinal_wavenumber(eps_[j], k0_, u, n1_); };
    // Admittance-like quantity: r = (q1 - q2) / (q1 + q2) for both polarizations.
    auto q = [&](Complex kz_j, std::size_t j) { return pol == Polarization::S ? kz_j : kz_j / eps_[j]; };

    Complex kz_inner = kz(exit - 1);
    Complex r;
    Complex t;
    // Reflection referenced to the medium below the current layer, and that medium's kz.
    Complex r_deeper = 0.0;
    Complex kz_deeper = 0.0;
    if (ideal_exit_) {
        r = pol == Polarization::S ? -1.0 : 1.0;
        t = 0.0;
    } else {
        kz_deeper = kz(exit);
        r = interface_reflection(pol, kz_inner, kz_deeper, eps_[exit - 1], eps_[exit]);
        t = interface_transmission(pol, kz_inner, kz_deeper, eps_[exit - 1], eps_[exit]);
    }
    bool light_line = false;
    // Interfaces j | j+1 from the exit side inward; layer j+1 has thickness_[j].
    for (std::size_t j = exit - 1; j-- > 0;) {
        const Complex kz_layer = kz_inner;
        kz_inner = kz(j);
        Complex r_next;
        if (kz_layer == 0.0) {
            // Exactly on the layer's light line the recursion is 0/0. In the
            // limit the layer acts through its admittance y' = y / (1 - i c t y),
            // c = 1 (s) or eps_layer (p), with y the admittance below it.
            light_line = true;
            const double d = thickness_[j];
            const Complex c = pol == Polarization::S ? Complex(1.0) : eps_[j + 1];
            const Complex q1 = q(kz_inner, j);
            Complex y_top;
            if (j + 2 == exit && ideal_exit_) {
                y_top = pol == Polarization::S ? kI / (c * d) : Complex(0.0);
            } else {
                const Complex qd = q(kz_deeper, j + 2);
                const Complex a = 1.0 + r_deeper;
                const Complex b = qd * (1.0 - r_deeper);
                y_top = checked_ratio(b, a - kI * c * d * b, "light-line layer");
            }
            // Host, layer and everything below all on their light line: one medium.
            r_next = q1 == 0.0 && y_top == 0.0 ? Complex(0.0)
                                               : checked_ratio(q1 - y_top, q1 + y_top, "light-line layer");
        } else {
            const Complex half_phase = std::exp(kI * kz_layer * thickness_[j]);
            const Complex phase = half_phase * half_phase;
            const Complex rho = interface_reflection(pol, kz_inner, kz_layer, eps_[j], eps_[j + 1]);
            const Complex tau = interface_transmission(pol, kz_inner, kz_layer, eps_[j], eps_[j + 1]);
            const Complex den = 1.0 + rho * r * phase;
            r_next = checked_ratio(rho + r * phase, den, "stack recursion");
            t = checked_ratio(tau * t * half_phase, den, "stack recursion");
        }
        r_deeper = r;
        kz_deeper = kz_layer;
        r = r_next;
    }
    if (light_line && !ideal_exit_) {
        // Transmission is only consumed inside integrals; take it from just off the line.
        t = response(pol, std::nextafter(std::nextafter(u, 2.0 * u + 1.0), 2.0 * u + 1.0)).t;
    }
    return {r, t};
}

Complex ResolvedStack::reflection(Polarization pol, double u) const { return response(pol, u).r; }

double ResolvedStack::transmittance(Polarization pol, double u) const {
    if (ideal_exit_ || u >= 1.0) return 0.0;
    const Complex eps_exit = eps_.back();
    if (std::sqrt(eps_exit).imag() > 0.0) return 0.0;
    const Complex kz_exit = longitudinal_wavenumber(eps_exit, k0_, u, n1_);
    if (kz_exit.real() <= 0.0) return 0.0;
    const Complex kz_in = longitudinal_wavenumber(eps_.front(), k0_, u, n1_);
    const Complex t = response(pol, u).t;
    const double gain = pol == Polarization::S
                            ? kz_exit.real() / kz_in.real()
                            : (kz_exit / eps_exit).real() / (kz_in / eps_.front()).real();
    return gain * std::norm(t);
}

std::vector<double> ResolvedStack::singular_points() const {
    std::vector<double> points;
    for (std::size_t j = 1; j < eps_.size(); ++j) {
        if (j == eps_.size() - 1 && ideal_exit_) break;
        const double n = std::sqrt(eps_[j]).real();
        if (n > 0.0) points.push_back(n / n1_);
    }
    if (!ideal_exit_) {
        const Complex eps_m = eps_.back();
        const Complex eps_d = eps_[eps_.size() - 2];
        if (eps_m.real() < -eps_d.real()) {
            const double u_spp = std::sqrt(eps_m * eps_d / (eps_m + eps_d)).real() / n1_;
            if (std::isfinite(u_spp) && u_spp > 0.0) points.push_back(u_spp);
        }
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

Complex stack_reflection(const LayerStack& stack, Polarization pol, double u, double wavelength_nm) {
    return ResolvedStack(stack, wavelength_nm).reflection(pol, u);
}

}  // namespace mirrorscan
