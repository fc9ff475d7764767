#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

#include "mirrorscan/io.hpp"

namespace mirrorscan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void reject_unknown(const json& obj, const std::string& field, std::initializer_list<const char*> allowed) {
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!names.contains(key)) throw ConfigError(join(field, key), "unknown key");
    }
}

const json& require_object(const json& value, const std::string& field) {
    if (!value.is_object()) throw ConfigError(field, "expected an object");
    return value;
}

double get_number(const json& value, const std::string& field) {
    if (!value.is_number()) throw ConfigError(field, "expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    return v;
}

double get_positive(const json& value, const std::string& field) {
    const double v = get_number(value, field);
    if (!(v > 0.0)) throw ConfigError(field, "must be > 0");
    return v;
}

bool get_bool(const json& value, const std::string& field) {
    if (!value.is_boolean()) throw ConfigError(field, "expected true or false");
    return value.get<bool>();
}

std::string get_string(const json& value, const std::string& field) {
    if (!value.is_string()) throw ConfigError(field, "expected a string");
    return value.get<std::string>();
}

fs::path resolve_path(const json& value, const std::string& field, const fs::path& base_dir) {
    fs::path p = get_string(value, field);
    if (p.empty()) throw ConfigError(field, "empty path");
    if (p.is_relative()) p = base_dir / p;
    return p.lexically_normal();
}

Range parse_range(const json& value, const std::string& field) {
    require_object(value, field);
    reject_unknown(value, field, {"start", "stop", "step"});
    Range r;
    for (const char* key : {"start", "stop", "step"}) {
        if (!value.contains(key)) throw ConfigError(join(field, key), "missing");
    }
    r.start = get_number(value["start"], join(field, "start"));
    r.stop = get_number(value["stop"], join(field, "stop"));
    r.step = get_positive(value["step"], join(field, "step"));
    if (r.stop < r.start) throw ConfigError(field, "stop must not be below start");
    return r;
}

MaterialSpec parse_material(const json& value, const std::string& field, const fs::path& base_dir) {
    require_object(value, field);
    reject_unknown(value, field, {"n", "k", "table", "ideal_mirror"});
    MaterialSpec m;
    const int kinds = int(value.contains("n")) + int(value.contains("table")) +
                      int(value.contains("ideal_mirror"));
    if (kinds != 1) throw ConfigError(field, "give exactly one of 'n', 'table' or 'ideal_mirror'");
    if (value.contains("n")) {
        m.kind = MaterialSpec::Kind::Constant;
        m.n = get_positive(value["n"], join(field, "n"));
        if (value.contains("k")) {
            m.k = get_number(value["k"], join(field, "k"));
            if (m.k < 0.0) throw ConfigError(join(field, "k"), "must be >= 0");
        }
    } else if (value.contains("table")) {
        if (value.contains("k")) throw ConfigError(join(field, "k"), "not allowed with 'table'");
        m.kind = MaterialSpec::Kind::Table;
        const std::string tfield = join(field, "table");
        m.table = resolve_path(value["table"], tfield, base_dir);
        if (!fs::is_regular_file(m.table)) {
            throw ConfigError(tfield, "dispersion table '" + m.table.string() + "' not found");
        }
    } else {
        if (value.contains("k")) throw ConfigError(join(field, "k"), "not allowed with 'ideal_mirror'");
        if (!get_bool(value["ideal_mirror"], join(field, "ideal_mirror"))) {
            throw ConfigError(join(field, "ideal_mirror"), "must be true when present");
        }
        m.kind = MaterialSpec::Kind::Ideal;
    }
    return m;
}

void parse_stack(const json& value, RunConfig& cfg) {
    const std::string field = "stack";
    require_object(value, field);
    reject_unknown(value, field, {"host", "layers", "exit"});
    if (value.contains("host")) cfg.host = get_string(value["host"], "stack.host");
    if (value.contains("exit")) cfg.exit = get_string(value["exit"], "stack.exit");
    if (value.contains("layers")) {
        const auto& layers = value["layers"];
        if (!layers.is_array()) throw ConfigError("stack.layers", "expected an array");
        cfg.layers.clear();
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const std::string lf = "stack.layers[" + std::to_string(i) + "]";
            require_object(layers[i], lf);
            reject_unknown(layers[i], lf, {"material", "thickness_nm", "gap"});
            LayerSpec layer;
            if (!layers[i].contains("material")) throw ConfigError(join(lf, "material"), "missing");
            layer.material = get_string(layers[i]["material"], join(lf, "material"));
            if (layers[i].contains("gap")) layer.gap = get_bool(layers[i]["gap"], join(lf, "gap"));
            if (layers[i].contains("thickness_nm")) {
                if (layer.gap) throw ConfigError(join(lf, "thickness_nm"), "the gap layer takes its width from the d grid");
                layer.thickness_nm = get_positive(layers[i]["thickness_nm"], join(lf, "thickness_nm"));
            } else if (!layer.gap) {
                throw ConfigError(join(lf, "thickness_nm"), "missing");
            }
            cfg.layers.push_back(layer);
        }
    }
}

void parse_emitter(const json& value, RunConfig& cfg) {
    require_object(value, "emitter");
    reject_unknown(value, "emitter", {"depth_nm", "weights"});
    if (value.contains("depth_nm")) cfg.depth_nm = get_positive(value["depth_nm"], "emitter.depth_nm");
    if (!value.contains("weights")) return;
    const auto& w = value["weights"];
    if (w.is_string()) {
        const auto mode = w.get<std::string>();
        if (mode == "nv") {
            cfg.weights = OrientationWeights::nv_default();
        } else if (mode == "geometric") {
            cfg.weights = OrientationWeights::nv_geometric();
        } else {
            throw ConfigError("emitter.weights", "expected 'nv', 'geometric' or an object");
        }
        cfg.weights_mode = mode;
        return;
    }
    require_object(w, "emitter.weights");
    reject_unknown(w, "emitter.weights", {"parallel", "perpendicular"});
    for (const char* key : {"parallel", "perpendicular"}) {
        if (!w.contains(key)) throw ConfigError(join("emitter.weights", key), "missing");
    }
    cfg.weights.parallel = get_number(w["parallel"], "emitter.weights.parallel");
    cfg.weights.perpendicular = get_number(w["perpendicular"], "emitter.weights.perpendicular");
    cfg.weights_mode = "explicit";
    try {
        cfg.weights.validate();
    } catch (const ValidationError& e) {
        throw ConfigError("emitter.weights", e.what());
    }
}

void parse_collection(const json& value, RunConfig& cfg, const fs::path& base_dir) {
    require_object(value, "collection");
    reject_unknown(value, "collection",
                   {"numerical_aperture", "bottom_transmission", "normalization", "reference_spectrum"});
    if (value.contains("numerical_aperture")) {
        cfg.numerical_aperture = get_number(value["numerical_aperture"], "collection.numerical_aperture");
        if (!(cfg.numerical_aperture > 0.0 && cfg.numerical_aperture <= 1.0)) {
            throw ConfigError("collection.numerical_aperture", "must lie in (0, 1]");
        }
    }
    if (value.contains("bottom_transmission")) {
        cfg.bottom_transmission = get_bool(value["bottom_transmission"], "collection.bottom_transmission");
    }
    if (value.contains("normalization")) {
        try {
            cfg.normalization = parse_normalization(get_string(value["normalization"], "collection.normalization"));
        } catch (const ValidationError& e) {
            throw ConfigError("collection.normalization", e.what());
        }
    }
    if (value.contains("reference_spectrum") && !value["reference_spectrum"].is_null()) {
        auto p = resolve_path(value["reference_spectrum"], "collection.reference_spectrum", base_dir);
        if (!fs::is_regular_file(p)) {
            throw ConfigError("collection.reference_spectrum", "file '" + p.string() + "' not found");
        }
        cfg.reference_spectrum = p;
    }
}

void parse_purcell(const json& value, RunConfig& cfg) {
    require_object(value, "purcell");
    reject_unknown(value, "purcell", {"sweep", "lambda_nm", "d_nm"});
    std::string sweep = "distance";
    if (value.contains("sweep")) sweep = get_string(value["sweep"], "purcell.sweep");
    const char* fixed_key = nullptr;
    const char* range_key = nullptr;
    if (sweep == "distance") {
        cfg.purcell.axis = SweepAxis::Distance;
        fixed_key = "lambda_nm";
        range_key = "d_nm";
    } else if (sweep == "wavelength") {
        cfg.purcell.axis = SweepAxis::Wavelength;
        fixed_key = "d_nm";
        range_key = "lambda_nm";
    } else {
        throw ConfigError("purcell.sweep", "expected 'distance' or 'wavelength'");
    }
    const std::string ff = join("purcell", fixed_key);
    const std::string rf = join("purcell", range_key);
    if (!value.contains(fixed_key)) throw ConfigError(ff, "missing");
    if (!value.contains(range_key)) throw ConfigError(rf, "missing");
    cfg.purcell.fixed = get_number(value[fixed_key], ff);
    if (cfg.purcell.fixed < 0.0) throw ConfigError(ff, "must be >= 0");
    cfg.purcell.range = parse_range(value[range_key], rf);
    if (cfg.purcell.range.start < 0.0) throw ConfigError(join(rf, "start"), "must be >= 0");
}

void parse_fit(const json& value, RunConfig& cfg) {
    require_object(value, "fit_d0");
    reject_unknown(value, "fit_d0",
                   {"search_min_nm", "search_max_nm", "step_nm", "poor_fit_rms_nm", "smoothing_window",
                    "min_prominence"});
    auto& o = cfg.d0;
    if (value.contains("search_min_nm")) o.search_min_nm = get_number(value["search_min_nm"], "fit_d0.search_min_nm");
    if (value.contains("search_max_nm")) o.search_max_nm = get_number(value["search_max_nm"], "fit_d0.search_max_nm");
    if (value.contains("step_nm")) o.step_nm = get_positive(value["step_nm"], "fit_d0.step_nm");
    if (value.contains("poor_fit_rms_nm")) {
        o.poor_fit_rms_nm = get_positive(value["poor_fit_rms_nm"], "fit_d0.poor_fit_rms_nm");
    }
    if (value.contains("min_prominence")) {
        o.fringes.min_prominence = get_number(value["min_prominence"], "fit_d0.min_prominence");
        if (o.fringes.min_prominence < 0.0) throw ConfigError("fit_d0.min_prominence", "must be >= 0");
    }
    if (value.contains("smoothing_window")) {
        const auto& w = value["smoothing_window"];
        if (!w.is_number_integer() || (w.get<int>() != 5 && w.get<int>() != 7)) {
            throw ConfigError("fit_d0.smoothing_window", "must be 5 or 7");
        }
        o.fringes.smoothing_window = w.get<std::size_t>();
    }
    if (o.search_min_nm < 0.0) throw ConfigError("fit_d0.search_min_nm", "must be >= 0");
    if (o.search_max_nm < o.search_min_nm) throw ConfigError("fit_d0.search_max_nm", "must not be below search_min_nm");
}

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

json range_json(const Range& r) { return {{"start", r.start}, {"stop", r.stop}, {"step", r.step}}; }

}  // namespace

std::vector<double> Range::values() const {
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
    return out;
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.materials["diamond"] = {MaterialSpec::Kind::Constant, materials::kDiamondIndex, 0.0, {}};
    cfg.materials["air"] = {MaterialSpec::Kind::Constant, 1.0, 0.0, {}};
    cfg.materials["silver"] = {MaterialSpec::Kind::Table, 0.0, 0.0, materials::bundled_silver_table()};
    cfg.layers = {LayerSpec{"air", 0.0, true}};
    return cfg;
}

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
    RunConfig cfg = default_config();
    require_object(doc, "config");
    reject_unknown(doc, "",
                   {"materials", "stack", "emitter", "collection", "grids", "purcell", "pattern", "fit_d0",
                    "output", "workers"});
    if (doc.contains("materials")) {
        const auto& mats = require_object(doc["materials"], "materials");
        for (const auto& [name, spec] : mats.items()) {
            cfg.materials[name] = parse_material(spec, "materials." + name, base_dir);
        }
    }
    if (doc.contains("stack")) parse_stack(doc["stack"], cfg);
    if (doc.contains("emitter")) parse_emitter(doc["emitter"], cfg);
    if (doc.contains("collection")) parse_collection(doc["collection"], cfg, base_dir);
    if (doc.contains("grids")) {
        const auto& g = require_object(doc["grids"], "grids");
        reject_unknown(g, "grids", {"lambda_nm", "d_nm"});
        if (g.contains("lambda_nm")) cfg.lambda = parse_range(g["lambda_nm"], "grids.lambda_nm");
        if (g.contains("d_nm")) cfg.d = parse_range(g["d_nm"], "grids.d_nm");
        if (cfg.lambda.start <= 0.0) throw ConfigError("grids.lambda_nm.start", "must be > 0");
        if (cfg.d.start < 0.0) throw ConfigError("grids.d_nm.start", "must be >= 0");
    }
    if (doc.contains("purcell")) parse_purcell(doc["purcell"], cfg);
    if (doc.contains("pattern")) {
        const auto& p = require_object(doc["pattern"], "pattern");
        reject_unknown(p, "pattern", {"theta_step_deg"});
        if (p.contains("theta_step_deg")) {
            cfg.pattern_step_deg = get_positive(p["theta_step_deg"], "pattern.theta_step_deg");
            if (cfg.pattern_step_deg >= 90.0) throw ConfigError("pattern.theta_step_deg", "must be below 90");
        }
    }
    if (doc.contains("fit_d0")) parse_fit(doc["fit_d0"], cfg);
    if (doc.contains("output")) {
        const auto& o = require_object(doc["output"], "output");
        reject_unknown(o, "output", {"directory", "image"});
        if (o.contains("directory")) cfg.output_dir = resolve_path(o["directory"], "output.directory", base_dir);
        if (o.contains("image")) cfg.image = get_bool(o["image"], "output.image");
    }
    if (doc.contains("workers")) {
        const auto& w = doc["workers"];
        if (!w.is_number_integer() || w.get<long long>() < 0) {
            throw ConfigError("workers", "expected a non-negative integer (0 = all hardware threads)");
        }
        cfg.workers = w.get<unsigned>();
    }
    // Resolve references now so the error names the referencing field.
    auto check_ref = [&](const std::string& name, const std::string& field) {
        if (!cfg.materials.contains(name)) throw ConfigError(field, "unknown material '" + name + "'");
    };
    check_ref(cfg.host, "stack.host");
    check_ref(cfg.exit, "stack.exit");
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        check_ref(cfg.layers[i].material, "stack.layers[" + std::to_string(i) + "].material");
    }
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    auto dir = path.parent_path();
    if (dir.empty()) dir = ".";
    return parse_config(doc, dir);
}

json canonical_json(const RunConfig& cfg) {
    json mats = json::object();
    for (const auto& [name, m] : cfg.materials) {
        switch (m.kind) {
            case MaterialSpec::Kind::Constant: mats[name] = {{"n", m.n}, {"k", m.k}}; break;
            case MaterialSpec::Kind::Table: mats[name] = {{"table_fnv1a64", file_hash(m.table)}}; break;
            case MaterialSpec::Kind::Ideal: mats[name] = {{"ideal_mirror", true}}; break;
        }
    }
    json layers = json::array();
    for (const auto& l : cfg.layers) {
        layers.push_back({{"material", l.material}, {"gap", l.gap}, {"thickness_nm", l.thickness_nm}});
    }
    json out;
    out["materials"] = mats;
    out["stack"] = {{"host", cfg.host}, {"layers", layers}, {"exit", cfg.exit}};
    out["emitter"] = {{"depth_nm", cfg.depth_nm},
                      {"weights", {{"parallel", cfg.weights.parallel}, {"perpendicular", cfg.weights.perpendicular}}}};
    out["collection"] = {{"numerical_aperture", cfg.numerical_aperture},
                         {"bottom_transmission", cfg.bottom_transmission},
                         {"normalization", to_string(cfg.normalization)},
                         {"reference_spectrum_fnv1a64",
                          cfg.reference_spectrum ? json(file_hash(*cfg.reference_spectrum)) : json(nullptr)}};
    out["grids"] = {{"lambda_nm", range_json(cfg.lambda)}, {"d_nm", range_json(cfg.d)}};
    out["purcell"] = {{"sweep", cfg.purcell.axis == SweepAxis::Distance ? "distance" : "wavelength"},
                      {"fixed", cfg.purcell.fixed},
                      {"range", range_json(cfg.purcell.range)}};
    out["pattern"] = {{"theta_step_deg", cfg.pattern_step_deg}};
    out["fit_d0"] = {{"search_min_nm", cfg.d0.search_min_nm},
                     {"search_max_nm", cfg.d0.search_max_nm},
                     {"step_nm", cfg.d0.step_nm},
                     {"poor_fit_rms_nm", cfg.d0.poor_fit_rms_nm},
                     {"smoothing_window", cfg.d0.fringes.smoothing_window},
                     {"min_prominence", cfg.d0.fringes.min_prominence}};
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fingerprint(const RunConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_json(config).dump())));
    return std::string("fnv1a64:") + buf;
}

Model build_model(const RunConfig& cfg) {
    std::map<std::string, OpticalMaterial> mats;
    std::size_t gap_layer = 0;
    for (const auto& [name, spec] : cfg.materials) {
        const std::string field = "materials." + name;
        switch (spec.kind) {
            case MaterialSpec::Kind::Constant:
                mats.emplace(name, OpticalMaterial(name, ConstantIndex{spec.n, spec.k}));
                break;
            case MaterialSpec::Kind::Table:
                try {
                    mats.emplace(name, OpticalMaterial(name, load_dispersion_table(spec.table)));
                } catch (const InputError& e) {
                    throw ConfigError(field + ".table", e.what());
                }
                break;
            case MaterialSpec::Kind::Ideal:
                mats.emplace(name, OpticalMaterial(name, IdealMirror{}));
                break;
        }
    }
    const auto& host = mats.at(cfg.host);
    const auto& host_spec = cfg.materials.at(cfg.host);
    if (host_spec.kind != MaterialSpec::Kind::Constant || host_spec.k != 0.0) {
        throw ConfigError("stack.host", "host must be a lossless constant-index material");
    }
    std::vector<Layer> layers;
    std::size_t gaps = 0;
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        const auto& spec = cfg.layers[i];
        const auto& mat = mats.at(spec.material);
        if (mat.is_ideal_mirror()) {
            throw ConfigError("stack.layers[" + std::to_string(i) + "].material",
                              "an ideal mirror can only be the exit half-space");
        }
        if (spec.gap) {
            gap_layer = i;
            ++gaps;
        }
        layers.push_back(Layer{mat, spec.gap ? 1000.0 : spec.thickness_nm});
    }
    if (gaps != 1) throw ConfigError("stack.layers", "exactly one layer must be marked \"gap\": true");

    CollectionGeometry geometry;
    geometry.numerical_aperture = cfg.numerical_aperture;
    geometry.include_bottom_transmission = cfg.bottom_transmission;
    geometry.host_index = host_spec.n;
    if (!(geometry.host_index > geometry.numerical_aperture)) {
        throw ConfigError("collection.numerical_aperture", "must be below the host index");
    }
    EmitterEnvironment env{host, cfg.depth_nm, LayerStack(host, std::move(layers), mats.at(cfg.exit)), host,
                           cfg.weights};
    return Model{std::move(mats), std::move(env), gap_layer, geometry};
}

}  // namespace mirrorscan::cli
