#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mirrorscan/errors.hpp"

namespace mirrorscan {

inline constexpr double kFailureFactor = 16.0;

struct QuadratureOptions {
    double relative_tolerance = 1e-8;
    // Floor for integrals whose magnitude is near zero (L1 norm of the integrand).
    double absolute_tolerance = 1e-14;
    unsigned max_depth = 18;
};

namespace detail {
inline std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}
}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) over [a, b], split at the given breakpoints.
/// Each segment is mapped through x = x0 + h (1 - cos t), which turns the
/// square-root branch points at segment ends (light lines) into smooth zeros.
/// Throws QuadratureFailure when the error estimate exceeds the tolerance.
template <class F>
double integrate(F&& f, double a, double b, const std::vector<double>& breakpoints,
                 const QuadratureOptions& opts, const std::string& label) {
    using boost::math::quadrature::gauss_kronrod;
    std::vector<double> edges{a};
    for (double p : breakpoints) {
        if (p > a && p < b) edges.push_back(p);
    }
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());

    double total = 0.0;
    double total_error = 0.0;
    double total_l1 = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i + 1] > edges[i])) continue;
        const double x0 = edges[i];
        const double h = 0.5 * (edges[i + 1] - edges[i]);
        auto mapped = [&](double t) { return f(x0 + h * (1.0 - std::cos(t))) * h * std::sin(t); };
        double error = 0.0;
        double l1 = 0.0;
        total += gauss_kronrod<double, 15>::integrate(mapped, 0.0, std::numbers::pi, opts.max_depth,
                                                      opts.relative_tolerance, &error, &l1);
        total_error += error;
        total_l1 += l1;
    }
    // Boost stops refining a subinterval once |K15 - G7| drops below tol times
    // its local estimate, so the summed estimate lands near tol * L1 by design.
    // Depth exhaustion leaves it orders of magnitude higher.
    const double allowed =
        std::max(kFailureFactor * opts.relative_tolerance * total_l1, opts.absolute_tolerance);
    if (!std::isfinite(total) || total_error > allowed) {
        throw QuadratureFailure(label + ": error estimate " + detail::format_sci(total_error) +
                                " exceeds tolerance " + detail::format_sci(allowed));
    }
    return total;
}

}  // namespace mirrorscan
