#pragma once

#include <filesystem>

#include "mirrorscan/collection.hpp"
#include "mirrorscan/dipole_emission.hpp"

namespace mirrorscan::cli {

// One pixel per map cell: wavelength left to right, gap width bottom to top.
void write_heatmap_png(const std::filesystem::path& path, const EnhancementMap& map);

// Lower half-plane polar plot of the orientation-weighted pattern, with the
// collection cone edges drawn at +-theta_max.
void write_polar_png(const std::filesystem::path& path, const AngularPattern& pattern,
                     const OrientationWeights& weights, double theta_max);

}  // namespace mirrorscan::cli
