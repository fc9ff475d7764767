#pragma once

// Independent reference computations for the tests. They only use the public
// single-point functions (stack_reflection, materials) and plain composite
// rules on fine grids, never the library's adaptive integrators.

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mirrorscan/dipole_emission.hpp"
#include "mirrorscan/stratified.hpp"

namespace oracle {

using mirrorscan::Complex;
inline constexpr double kPi = std::numbers::pi;

// Composite trapezoid of f on [a, b] with n panels.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t n) {
    const double h = (b - a) / static_cast<double>(n);
    double sum = 0.5 * (f(a) + f(b));
    for (std::size_t i = 1; i < n; ++i) sum += f(a + h * static_cast<double>(i));
    return sum * h;
}

// Trapezoid over consecutive pieces [edges[i], edges[i+1]], each with n panels.
inline double piecewise_trapezoid(const std::function<double(double)>& f, std::vector<double> edges,
                                  std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) total += trapezoid(f, edges[i], edges[i + 1], n);
    return total;
}

struct Rates {
    double perpendicular;
    double parallel;
};

// Decay rates by brute force on the real u axis: radiative part with u = sin s,
// evanescent part with u = cosh w (smooth at u = 1), both by dense trapezoid.
inline Rates decay_rates(const mirrorscan::EmitterEnvironment& env, double wavelength_nm,
                         std::size_t panels = 400000) {
    using mirrorscan::Polarization;
    const double n1 = std::real(std::sqrt(mirrorscan::permittivity(env.host, wavelength_nm)));
    const double k1 = 2.0 * kPi * n1 / wavelength_nm;
    const double a = k1 * env.depth_nm;
    auto r = [&](Polarization p, double u) {
        return mirrorscan::stack_reflection(env.upward, p, u, wavelength_nm);
    };
    const Complex i{0.0, 1.0};
    // Light lines inside the radiative range become breakpoints in s.
    std::vector<double> s_edges{0.0};
    for (const auto& layer : env.upward.layers()) {
        const double u = std::abs(std::sqrt(mirrorscan::permittivity(layer.material, wavelength_nm))) / n1;
        if (u < 1.0) s_edges.push_back(std::asin(u));
    }
    s_edges.push_back(kPi / 2.0);
    std::sort(s_edges.begin(), s_edges.end());

    auto perp_rad = [&](double s) {
        const double u = std::sin(s), l = std::cos(s);
        return std::real(u * u * u * r(Polarization::P, u) * std::exp(2.0 * i * a * l));
    };
    auto par_rad = [&](double s) {
        const double u = std::sin(s), l = std::cos(s);
        return std::real(u * (r(Polarization::S, u) - l * l * r(Polarization::P, u)) * std::exp(2.0 * i * a * l));
    };
    // u = cosh w: du = sinh w dw, l = i sinh w, u/l du = -i u dw.
    const double w_max = std::acosh(std::sqrt(1.0 + std::pow(std::log(1e14) / (2.0 * a), 2)));
    auto perp_ev = [&](double w) {
        const double u = std::cosh(w), v = std::sinh(w);
        return u * u * u * std::exp(-2.0 * a * v) * std::imag(r(Polarization::P, u));
    };
    auto par_ev = [&](double w) {
        const double u = std::cosh(w), v = std::sinh(w);
        return u * std::exp(-2.0 * a * v) * std::imag(r(Polarization::S, u) + v * v * r(Polarization::P, u));
    };
    const std::size_t n_piece = panels / s_edges.size();
    const double gp = piecewise_trapezoid(perp_rad, s_edges, n_piece) + trapezoid(perp_ev, 0.0, w_max, panels);
    const double gs = piecewise_trapezoid(par_rad, s_edges, n_piece) + trapezoid(par_ev, 0.0, w_max, panels);
    return {1.0 + 1.5 * gp, 1.0 + 0.75 * gs};
}

// Writes `text` to a fresh file under the system temp directory.
inline std::filesystem::path temp_file(const std::string& name, const std::string& text) {
    const auto dir = std::filesystem::temp_directory_path() / "mirrorscan_tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path) << text;
    return path;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "mirrorscan_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace oracle
