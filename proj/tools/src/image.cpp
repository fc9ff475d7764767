#include "image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <vector>

#include <png.h>

#include "config.hpp"

namespace mirrorscan::cli {

namespace {

struct Rgb {
    unsigned char r, g, b;
};

// Coarse samples of the viridis colormap.
constexpr std::array<std::array<double, 3>, 6> kViridis{{{0.267, 0.005, 0.329},
                                                         {0.254, 0.265, 0.530},
                                                         {0.164, 0.471, 0.558},
                                                         {0.135, 0.659, 0.518},
                                                         {0.478, 0.821, 0.318},
                                                         {0.993, 0.906, 0.144}}};

Rgb colormap(double t) {
    t = std::clamp(t, 0.0, 1.0) * (kViridis.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), kViridis.size() - 2);
    const double f = t - static_cast<double>(i);
    auto channel = [&](int c) {
        return static_cast<unsigned char>(std::lround(255.0 * ((1 - f) * kViridis[i][c] + f * kViridis[i + 1][c])));
    };
    return {channel(0), channel(1), channel(2)};
}

void write_png(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<Rgb>& pixels) {
    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!file) throw ConfigError("output.directory", "cannot write '" + path.string() + "'");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw ConfigError("output.image", "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ConfigError("output.image", "libpng failed writing '" + path.string() + "'");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < height; ++y) {
        auto* row = const_cast<png_bytep>(reinterpret_cast<const unsigned char*>(&pixels[y * width]));
        png_write_row(png, row);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_heatmap_png(const std::filesystem::path& path, const EnhancementMap& map) {
    const std::size_t w = map.lambda_grid.size();
    const std::size_t h = map.d_grid.size();
    const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
    const double span = *hi > *lo ? *hi - *lo : 1.0;
    std::vector<Rgb> pixels(w * h);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            pixels[(h - 1 - i) * w + j] = colormap((map.at(i, j) - *lo) / span);
        }
    }
    write_png(path, w, h, pixels);
}

void write_polar_png(const std::filesystem::path& path, const AngularPattern& pattern,
                     const OrientationWeights& weights, double theta_max) {
    constexpr int kSize = 401;
    constexpr int kCenter = kSize / 2;
    constexpr double kRadius = kSize / 2 - 4;
    std::vector<double> density(pattern.theta.size());
    for (std::size_t i = 0; i < density.size(); ++i) {
        const auto& p = pattern.densities[i];
        density[i] = weights.perpendicular * p.perp_p + weights.parallel * (p.par_p + p.par_s);
    }
    const double peak = density.empty() ? 1.0 : std::max(*std::max_element(density.begin(), density.end()), 1e-300);
    auto curve = [&](double theta) {
        if (pattern.theta.empty()) return 0.0;
        auto it = std::upper_bound(pattern.theta.begin(), pattern.theta.end(), theta);
        if (it == pattern.theta.begin()) return density.front() / peak;
        if (it == pattern.theta.end()) return density.back() / peak;
        const auto k = static_cast<std::size_t>(it - pattern.theta.begin());
        const double f = (theta - pattern.theta[k - 1]) / (pattern.theta[k] - pattern.theta[k - 1]);
        return ((1 - f) * density[k - 1] + f * density[k]) / peak;
    };

    const Rgb white{255, 255, 255};
    const Rgb fill = colormap(0.35);
    const Rgb cone{200, 40, 40};
    const Rgb axis{120, 120, 120};
    std::vector<Rgb> pixels(kSize * kSize, white);
    for (int y = 0; y < kSize; ++y) {
        for (int x = 0; x < kSize; ++x) {
            const double dx = x - kCenter;
            const double dy = y - kCenter;  // image y grows downward, into the host
            auto& px = pixels[static_cast<std::size_t>(y) * kSize + x];
            if (y == kCenter) {
                px = axis;
                continue;
            }
            if (dy <= 0) continue;
            const double r = std::hypot(dx, dy) / kRadius;
            const double theta = std::atan2(std::abs(dx), dy);
            if (r <= curve(theta)) px = fill;
            const double off_line = std::abs(std::abs(dx) * std::cos(theta_max) - dy * std::sin(theta_max));
            if (r <= 1.0 && off_line < 0.8) px = cone;
        }
    }
    write_png(path, kSize, kSize, pixels);
}

}  // namespace mirrorscan::cli
