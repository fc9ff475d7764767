#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirrorscan/collection.hpp"
#include "mirrorscan/dipole_emission.hpp"
#include "mirrorscan/errors.hpp"
#include "mirrorscan/exp_pipeline.hpp"

namespace mirrorscan::cli {

// Invalid or unresolvable configuration; `field` is the dotted key path.
class ConfigError : public InputError {
public:
    ConfigError(const std::string& field, const std::string& what)
        : InputError(field + ": " + what), field_(field) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct Range {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    // start, start + step, ... up to stop (inclusive within 1e-9 steps).
    [[nodiscard]] std::vector<double> values() const;
};

struct MaterialSpec {
    enum class Kind { Constant, Table, Ideal };
    Kind kind = Kind::Constant;
    double n = 1.0;
    double k = 0.0;
    std::filesystem::path table;
};

struct LayerSpec {
    std::string material;
    double thickness_nm = 0.0;  // unused for the gap layer
    bool gap = false;
};

enum class SweepAxis { Distance, Wavelength };

struct PurcellSweep {
    SweepAxis axis = SweepAxis::Distance;
    double fixed = 700.0;  // lambda for a distance sweep, d for a wavelength sweep
    Range range{100.0, 5000.0, 10.0};
};

struct RunConfig {
    std::map<std::string, MaterialSpec> materials;
    std::string host = "diamond";
    std::vector<LayerSpec> layers;
    std::string exit = "silver";

    double depth_nm = 8.0;
    std::string weights_mode = "nv";  // nv | geometric | explicit
    OrientationWeights weights = OrientationWeights::nv_default();

    double numerical_aperture = 0.35;
    bool bottom_transmission = false;
    Normalization normalization = Normalization::Raw;
    std::optional<std::filesystem::path> reference_spectrum;

    Range lambda{540.0, 900.0, 1.0};
    Range d{500.0, 20500.0, 10.0};
    PurcellSweep purcell;
    double pattern_step_deg = 0.5;
    D0Options d0;

    std::filesystem::path output_dir = "mirrorscan_out";
    bool image = false;
    unsigned workers = 0;
};

/// Default setup: diamond (n = 2.41) | air gap | bundled silver table, z0 = 8 nm.
RunConfig default_config();

/// Reads a JSON config on top of the defaults. Relative paths are resolved
/// against the config file's directory. Throws ConfigError naming the field.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Canonical JSON of everything that affects numerical output (not the output
/// directory, image flag or worker count). Table materials are identified by
/// the hash of the file contents, not by path.
nlohmann::json canonical_json(const RunConfig& config);

/// "fnv1a64:" followed by 16 hex digits.
std::string fingerprint(const RunConfig& config);
std::uint64_t fnv1a64(std::string_view bytes);

/// Materials, environment and collection geometry built from a config.
struct Model {
    std::map<std::string, OpticalMaterial> materials;
    EmitterEnvironment env;
    std::size_t gap_layer = 0;
    CollectionGeometry geometry;
};

Model build_model(const RunConfig& config);

}  // namespace mirrorscan::cli
