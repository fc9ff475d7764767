#include "mirrorscan/dipole_emission.hpp"

#include <cmath>
#include <numbers>

#include "mirrorscan/errors.hpp"

namespace mirrorscan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};
// exp(-2 k1 z0 v_max) = 1e-12 bounds the evanescent tail.
const double kTailLog = std::log(1e12);

double norm2(Vec3 v) { return v.x * v.x + v.y * v.y + v.z * v.z; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

void require_unit(Vec3 v, const char* what) {
    if (std::abs(norm2(v) - 1.0) > 1e-9) {
        throw ValidationError(std::string(what) + " must be a unit vector");
    }
}

struct Segments {
    std::vector<double> radiative;   // in s, u = sin s
    std::vector<double> evanescent;  // in v, u = sqrt(1 + v^2)
    double v_max;
};

Segments breakpoints(const ResolvedStack& stack, double k1z0) {
    Segments seg{{}, {}, kTailLog / (2.0 * k1z0)};
    for (double u : stack.singular_points()) {
        if (u < 1.0) {
            seg.radiative.push_back(std::asin(u));
        } else if (u > 1.0) {
            seg.evanescent.push_back(std::sqrt(u * u - 1.0));
        }
    }
    return seg;
}

double host_k1z0(const EmitterEnvironment& env, const ResolvedStack& stack) {
    return stack.k0() * stack.incidence_index() * env.depth_nm;
}

// Re of the reflected-field correction integrals. The radiative segment uses
// u = sin s, which absorbs the 1/l endpoint singularity.
double perpendicular_correction(const ResolvedStack& stack, double a, const QuadratureOptions& opts) {
    const auto seg = breakpoints(stack, a);
    auto radiative = [&](double s) {
        const double u = std::sin(s);
        const double l = std::cos(s);
        const Complex rp = stack.reflection(Polarization::P, u);
        return (u * u * u * rp * std::exp(2.0 * kI * a * l)).real();
    };
    // u^3/l du = -i u^2 dv with l = i v.
    auto evanescent = [&](double v) {
        const double u2 = 1.0 + v * v;
        const Complex rp = stack.reflection(Polarization::P, std::sqrt(u2));
        return u2 * std::exp(-2.0 * a * v) * rp.imag();
    };
    return integrate(radiative, 0.0, kPi / 2.0, seg.radiative, opts, "perpendicular decay (radiative)") +
           integrate(evanescent, 0.0, seg.v_max, seg.evanescent, opts,
                     "perpendicular decay (evanescent)");
}

double parallel_correction(const ResolvedStack& stack, double a, const QuadratureOptions& opts) {
    const auto seg = breakpoints(stack, a);
    auto radiative = [&](double s) {
        const double u = std::sin(s);
        const double l = std::cos(s);
        const Complex rs = stack.reflection(Polarization::S, u);
        const Complex rp = stack.reflection(Polarization::P, u);
        return (u * (rs - l * l * rp) * std::exp(2.0 * kI * a * l)).real();
    };
    // u/l du = -i dv and l^2 = -v^2.
    auto evanescent = [&](double v) {
        const double u = std::sqrt(1.0 + v * v);
        const Complex rs = stack.reflection(Polarization::S, u);
        const Complex rp = stack.reflection(Polarization::P, u);
        return std::exp(-2.0 * a * v) * (rs + v * v * rp).imag();
    };
    return integrate(radiative, 0.0, kPi / 2.0, seg.radiative, opts, "parallel decay (radiative)") +
           integrate(evanescent, 0.0, seg.v_max, seg.evanescent, opts, "parallel decay (evanescent)");
}

std::vector<double> theta_breakpoints(const ResolvedStack& stack) {
    std::vector<double> out;
    for (double u : stack.singular_points()) {
        if (u < 1.0) out.push_back(std::asin(u));
    }
    return out;
}

}  // namespace

OrientationWeights OrientationWeights::nv_geometric() {
    const auto axes = nv_axes_111();
    return orientation_weights(axes, Vec3{0.0, 0.0, 1.0});
}

void OrientationWeights::validate() const {
    if (!(parallel >= 0.0 && parallel <= 1.0) || !(perpendicular >= 0.0 && perpendicular <= 1.0)) {
        throw ValidationError("orientation weights must lie in [0, 1]");
    }
    if (std::abs(parallel + perpendicular - 1.0) > 1e-12) {
        throw ValidationError("orientation weights must sum to 1");
    }
}

std::vector<Vec3> nv_axes_111() {
    const double c = 1.0 / std::sqrt(3.0);
    return {{c, c, c}, {c, -c, -c}, {-c, c, -c}, {-c, -c, c}};
}

OrientationWeights orientation_weights(std::span<const Vec3> nv_axes, Vec3 surface_normal) {
    if (nv_axes.empty()) throw EmptyAxisList("orientation_weights: no symmetry axes given");
    require_unit(surface_normal, "surface normal");
    double normal_component = 0.0;
    for (const auto& axis : nv_axes) {
        require_unit(axis, "symmetry axis");
        const double c = dot(axis, surface_normal);
        normal_component += 0.5 * (1.0 - c * c);
    }
    const double perpendicular = normal_component / static_cast<double>(nv_axes.size());
    return {1.0 - perpendicular, perpendicular};
}

void EmitterEnvironment::validate() const {
    if (!(depth_nm > 0.0) || !std::isfinite(depth_nm)) {
        throw ValidationError("emitter depth must be finite and positive");
    }
    if (upward.incidence().name() != host.name()) {
        throw ValidationError("upward stack must start in the host medium '" + host.name() + "'");
    }
    if (host.is_ideal_mirror()) throw ValidationError("host medium cannot be an ideal mirror");
    if (const auto* c = std::get_if<ConstantIndex>(&host.model()); c && c->k != 0.0) {
        throw ValidationError("host medium must be lossless");
    }
    weights.validate();
}

EmitterEnvironment mirror_environment(const OpticalMaterial& mirror, double gap_nm) {
    const auto host = materials::diamond();
    return {host, 8.0, LayerStack(host, {Layer{materials::air(), gap_nm}}, mirror), host,
            OrientationWeights::nv_default()};
}

EmitterEnvironment without_mirror(const EmitterEnvironment& env) {
    const auto& layers = env.upward.layers();
    const OpticalMaterial& gap = layers.empty() ? env.upward.exit() : layers.front().material;
    EmitterEnvironment out = env;
    out.upward = LayerStack(env.upward.incidence(), {}, gap);
    return out;
}

EmitterEnvironment with_gap(const EmitterEnvironment& env, double gap_nm, std::size_t gap_layer) {
    EmitterEnvironment out = env;
    if (gap_nm == 0.0) {
        auto layers = env.upward.layers();
        if (gap_layer >= layers.size()) {
            throw ValidationError("gap layer index " + std::to_string(gap_layer) + " out of range");
        }
        layers.erase(layers.begin() + static_cast<std::ptrdiff_t>(gap_layer));
        out.upward = LayerStack(env.upward.incidence(), std::move(layers), env.upward.exit());
    } else {
        out.upward = env.upward.with_layer_thickness(gap_layer, gap_nm);
    }
    return out;
}

double decay_rate_perpendicular(const EmitterEnvironment& env, double wavelength_nm,
                                const QuadratureOptions& opts) {
    env.validate();
    const ResolvedStack stack(env.upward, wavelength_nm);
    return 1.0 + 1.5 * perpendicular_correction(stack, host_k1z0(env, stack), opts);
}

double decay_rate_parallel(const EmitterEnvironment& env, double wavelength_nm,
                           const QuadratureOptions& opts) {
    env.validate();
    const ResolvedStack stack(env.upward, wavelength_nm);
    return 1.0 + 0.75 * parallel_correction(stack, host_k1z0(env, stack), opts);
}

PatternSample pattern_density(const ResolvedStack& upward, double k1z0, double theta) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const Complex phase = std::exp(2.0 * kI * k1z0 * c);
    const Complex rp = upward.reflection(Polarization::P, s) * phase;
    const Complex rs = upward.reflection(Polarization::S, s) * phase;
    return {3.0 / (8.0 * kPi) * s * s * std::norm(1.0 + rp),
            3.0 / (16.0 * kPi) * c * c * std::norm(1.0 - rp),
            3.0 / (16.0 * kPi) * std::norm(1.0 + rs)};
}

DecayRates total_decay(const EmitterEnvironment& env, double wavelength_nm,
                       const QuadratureOptions& opts) {
    env.validate();
    const ResolvedStack stack(env.upward, wavelength_nm);
    const double a = host_k1z0(env, stack);
    const auto& w = env.weights;

    DecayRates rates;
    rates.perpendicular = 1.0 + 1.5 * perpendicular_correction(stack, a, opts);
    rates.parallel = 1.0 + 0.75 * parallel_correction(stack, a, opts);
    rates.total = w.parallel * rates.parallel + w.perpendicular * rates.perpendicular;

    const auto theta_breaks = theta_breakpoints(stack);
    auto down = [&](double theta) {
        const auto p = pattern_density(stack, a, theta);
        return (w.perpendicular * p.perp_p + w.parallel * (p.par_p + p.par_s)) * std::sin(theta);
    };
    rates.radiative_down =
        2.0 * kPi * integrate(down, 0.0, kPi / 2.0, theta_breaks, opts, "downward radiated power");

    if (!stack.exit_is_ideal_mirror()) {
        // The upward half of the bare dipole pattern, filtered by the stack's
        // power transmittance into the exit half-space.
        auto up = [&](double theta) {
            const double s = std::sin(theta);
            const double c = std::cos(theta);
            const double tp = stack.transmittance(Polarization::P, s);
            const double ts = stack.transmittance(Polarization::S, s);
            const double perp = 3.0 / (8.0 * kPi) * s * s * tp;
            const double par = 3.0 / (16.0 * kPi) * (c * c * tp + ts);
            return (w.perpendicular * perp + w.parallel * par) * s;
        };
        rates.radiative_up =
            2.0 * kPi * integrate(up, 0.0, kPi / 2.0, theta_breaks, opts, "upward radiated power");
    }
    rates.nonradiative = rates.total - rates.radiative_down - rates.radiative_up;
    return rates;
}

AngularPattern angular_pattern(const EmitterEnvironment& env, double wavelength_nm,
                               std::span<const double> theta_grid) {
    env.validate();
    const ResolvedStack stack(env.upward, wavelength_nm);
    const double a = host_k1z0(env, stack);
    AngularPattern out;
    out.theta.reserve(theta_grid.size());
    out.densities.reserve(theta_grid.size());
    for (double theta : theta_grid) {
        if (!(theta >= 0.0 && theta < kPi / 2.0)) {
            throw ValidationError("pattern angles must lie in [0, pi/2)");
        }
        out.theta.push_back(theta);
        out.densities.push_back(pattern_density(stack, a, theta));
    }
    return out;
}

}  // namespace mirrorscan
