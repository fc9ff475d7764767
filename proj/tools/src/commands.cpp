#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "image.hpp"
#include "mirrorscan/io.hpp"
#include "mirrorscan/parallel.hpp"

namespace mirrorscan::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string output_dir;
    std::optional<unsigned> workers;
    std::optional<bool> image;
};

struct Session {
    RunConfig config;
    std::string fingerprint;
    std::ostream& out;
};

Session open_session(const GlobalOptions& g, std::ostream& out) {
    RunConfig cfg = g.config_path.empty() ? default_config() : load_config(g.config_path);
    if (!g.output_dir.empty()) cfg.output_dir = g.output_dir;
    if (g.workers) cfg.workers = *g.workers;
    if (g.image) cfg.image = *g.image;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec || !fs::is_directory(cfg.output_dir)) {
        throw ConfigError("output.directory", "cannot create '" + cfg.output_dir.string() + "'");
    }
    Session s{std::move(cfg), {}, out};
    s.fingerprint = fingerprint(s.config);
    return s;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("output.directory", "cannot write '" + path.string() + "'");
    return f;
}

void finish_output(std::ofstream& f, const fs::path& path) {
    f.flush();
    if (!f) throw ConfigError("output.directory", "write failed for '" + path.string() + "'");
}

std::string file_tag(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ostringstream s;
    s << "fnv1a64:" << std::hex;
    s.width(16);
    s.fill('0');
    s << fnv1a64(bytes);
    return s.str();
}

std::string tag_number(double v) {
    std::string s = format_number(v);
    for (auto& c : s) {
        if (c == '.') c = 'p';
    }
    return s;
}

CommentBlock base_comments(const Session& s, const std::string& command) {
    return {{"command", command},
            {"config_fingerprint", s.fingerprint},
            {"weights_mode", s.config.weights_mode}};
}

void report_written(const Session& s, const fs::path& path) { s.out << "wrote " << path.string() << '\n'; }

// ---- map ---------------------------------------------------------------

int cmd_map(const GlobalOptions& g, std::ostream& out) {
    Session s = open_session(g, out);
    const Model model = build_model(s.config);
    const auto d = s.config.d.values();
    const auto lambda = s.config.lambda.values();

    MapOptions opts;
    opts.workers = s.config.workers;
    opts.gap_layer = model.gap_layer;
    EnhancementMap map = enhancement_map(d, lambda, model.geometry, model.env, opts);
    if (s.config.normalization == Normalization::UnitCounts) {
        if (!s.config.reference_spectrum) {
            throw ConfigError("collection.reference_spectrum", "required for unit_counts normalization");
        }
        map = normalized_model_enhancement(map, read_reference_csv(*s.config.reference_spectrum));
    }

    const fs::path csv = s.config.output_dir / "enhancement_map.csv";
    auto f = open_output(csv);
    write_map_csv(f, map, base_comments(s, "map"));
    finish_output(f, csv);
    report_written(s, csv);
    if (s.config.image) {
        const fs::path png = s.config.output_dir / "enhancement_map.png";
        write_heatmap_png(png, map);
        report_written(s, png);
    }
    return kExitOk;
}

// ---- pattern -----------------------------------------------------------

int cmd_pattern(const GlobalOptions& g, double d, double lambda, std::ostream& out) {
    if (!(d >= 0.0)) throw ConfigError("--d", "must be >= 0");
    Session s = open_session(g, out);
    const Model model = build_model(s.config);
    const auto env = with_gap(model.env, d, model.gap_layer);

    const double step = s.config.pattern_step_deg * std::numbers::pi / 180.0;
    std::vector<double> theta;
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * step;
        if (t >= std::numbers::pi / 2.0 - 1e-12) break;
        theta.push_back(t);
    }
    const AngularPattern pattern = angular_pattern(env, lambda, theta);
    const double theta_max = model.geometry.half_angle();
    const double collected = collected_power(env, lambda, model.geometry);
    const double downward = total_decay(env, lambda).radiative_down;
    const double reference = collected_power(without_mirror(env), lambda, model.geometry);

    auto comments = base_comments(s, "pattern");
    comments.emplace_back("d_nm", format_number(d));
    comments.emplace_back("lambda_nm", format_number(lambda));
    comments.emplace_back("numerical_aperture", format_number(model.geometry.numerical_aperture));
    comments.emplace_back("na_cone_theta_max_rad", format_number(theta_max));
    comments.emplace_back("collected_power", format_number(collected));
    comments.emplace_back("downward_power", format_number(downward));
    comments.emplace_back("na_cone_fraction", format_number(collected / downward));
    comments.emplace_back("no_mirror_collected_power", format_number(reference));
    comments.emplace_back("enhancement", format_number(collected / reference));

    const std::string stem = "pattern_d" + tag_number(d) + "_lambda" + tag_number(lambda);
    const fs::path csv = s.config.output_dir / (stem + ".csv");
    auto f = open_output(csv);
    write_pattern_csv(f, pattern, comments);
    finish_output(f, csv);
    report_written(s, csv);
    if (s.config.image) {
        const fs::path png = s.config.output_dir / (stem + ".png");
        write_polar_png(png, pattern, env.weights, theta_max);
        report_written(s, png);
    }
    return kExitOk;
}

// ---- purcell -----------------------------------------------------------

int cmd_purcell(const GlobalOptions& g, std::ostream& out) {
    Session s = open_session(g, out);
    const Model model = build_model(s.config);
    const auto& sweep = s.config.purcell;
    const auto points = sweep.range.values();
    const bool by_distance = sweep.axis == SweepAxis::Distance;

    std::vector<DecayRates> rates(points.size());
    parallel_for(points.size(), s.config.workers, [&](std::size_t i) {
        const double d = by_distance ? points[i] : sweep.fixed;
        const double lambda = by_distance ? sweep.fixed : points[i];
        try {
            rates[i] = total_decay(with_gap(model.env, d, model.gap_layer), lambda);
        } catch (const NumericError& e) {
            throw CellFailure(d, lambda, e.what());
        }
    });

    const fs::path csv = s.config.output_dir / "purcell.csv";
    auto f = open_output(csv);
    auto comments = base_comments(s, "purcell");
    comments.emplace_back("sweep", by_distance ? "distance" : "wavelength");
    for (const auto& [k, v] : comments) f << "# " << k << ": " << v << '\n';
    f << "d_nm,lambda_nm,total,radiative_down,radiative_up,nonradiative,gamma_perp,gamma_par\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = by_distance ? points[i] : sweep.fixed;
        const double lambda = by_distance ? sweep.fixed : points[i];
        const auto& r = rates[i];
        f << format_number(d) << ',' << format_number(lambda) << ',' << format_number(r.total) << ','
          << format_number(r.radiative_down) << ',' << format_number(r.radiative_up) << ','
          << format_number(r.nonradiative) << ',' << format_number(r.perpendicular) << ','
          << format_number(r.parallel) << '\n';
    }
    finish_output(f, csv);
    report_written(s, csv);
    return kExitOk;
}

// ---- enhance -----------------------------------------------------------

int cmd_enhance(const GlobalOptions& g, const std::string& scan_path, const std::string& ref_path,
                std::ostream& out) {
    Session s = open_session(g, out);
    const ScanDataset scan = read_scan_csv(fs::path(scan_path));
    const SpectrumRecord reference = read_reference_csv(fs::path(ref_path));
    const EnhancementMap map = enhancement_from_scan(scan, reference);

    auto comments = base_comments(s, "enhance");
    comments.emplace_back("scan_file", file_tag(scan_path));
    comments.emplace_back("reference_file", file_tag(ref_path));
    const fs::path csv = s.config.output_dir / "measured_enhancement.csv";
    auto f = open_output(csv);
    write_map_csv(f, map, comments);
    finish_output(f, csv);
    report_written(s, csv);
    if (s.config.image) {
        const fs::path png = s.config.output_dir / "measured_enhancement.png";
        write_heatmap_png(png, map);
        report_written(s, png);
    }
    return kExitOk;
}

// ---- fit-d0 ------------------------------------------------------------

void write_diagnostic(const Session& s, const EnhancementMap& measured, double lambda) {
    const fs::path csv = s.config.output_dir / "fit_d0_diagnostic.csv";
    auto f = open_output(csv);
    auto comments = base_comments(s, "fit-d0");
    comments.emplace_back("lambda_nm", format_number(lambda));
    comments.emplace_back("status", "no fringes");
    for (const auto& [k, v] : comments) f << "# " << k << ": " << v << '\n';
    f << "d_nm,enhancement,smoothed\n";
    const auto column = measured.column(measured.lambda_index(lambda));
    std::vector<double> smooth = column;
    if (column.size() >= s.config.d0.fringes.smoothing_window) {
        smooth = savitzky_golay(column, s.config.d0.fringes.smoothing_window);
    }
    for (std::size_t i = 0; i < column.size(); ++i) {
        f << format_number(measured.d_grid[i]) << ',' << format_number(column[i]) << ','
          << format_number(smooth[i]) << '\n';
    }
    finish_output(f, csv);
    report_written(s, csv);
}

int cmd_fit_d0(const GlobalOptions& g, const std::string& map_path, double lambda, std::ostream& out) {
    Session s = open_session(g, out);
    const Model model = build_model(s.config);
    const EnhancementMap measured = read_map_csv(fs::path(map_path));
    (void)measured.lambda_index(lambda);

    const auto generator = precomputed_model_generator(model.env, model.geometry, lambda, measured.d_grid,
                                                       s.config.d0, s.config.workers, model.gap_layer);
    D0Estimate est;
    try {
        est = estimate_d0(measured, generator, lambda, s.config.d0);
    } catch (const NoFringes&) {
        write_diagnostic(s, measured, lambda);
        throw;
    }

    auto comments = base_comments(s, "fit-d0");
    comments.emplace_back("measured_map", file_tag(map_path));
    const fs::path csv = s.config.output_dir / "fit_d0.csv";
    auto f = open_output(csv);
    for (const auto& [k, v] : comments) f << "# " << k << ": " << v << '\n';
    f << "lambda_nm,d0_nm,coarse_d0_nm,rms_residual_nm,measured_maxima,model_maxima,poor_fit\n";
    f << format_number(lambda) << ',' << format_number(est.offset_nm) << ','
      << format_number(est.coarse_offset_nm) << ',' << format_number(est.rms_residual_nm) << ','
      << est.measured_maxima << ',' << est.model_maxima << ',' << (est.poor_fit ? "true" : "false") << '\n';
    finish_output(f, csv);

    const fs::path curve = s.config.output_dir / "fit_d0_residuals.csv";
    auto fc = open_output(curve);
    for (const auto& [k, v] : comments) fc << "# " << k << ": " << v << '\n';
    fc << "offset_nm,rms_residual_nm\n";
    for (const auto& [offset, rms] : est.residual_curve) {
        fc << format_number(offset) << ',' << format_number(rms) << '\n';
    }
    finish_output(fc, curve);

    out << "d0 estimate at lambda = " << format_number(lambda) << " nm: " << format_number(est.offset_nm)
        << " nm (coarse " << format_number(est.coarse_offset_nm) << " nm)\n"
        << "rms fringe residual: " << format_number(est.rms_residual_nm) << " nm\n"
        << "fringe maxima: measured " << est.measured_maxima << ", model " << est.model_maxima << '\n';
    if (est.poor_fit) {
        out << "warning: poor fit (rms above " << format_number(s.config.d0.poor_fit_rms_nm) << " nm)\n";
    }
    report_written(s, csv);
    report_written(s, curve);
    return kExitOk;
}

// ---- materials ---------------------------------------------------------

int cmd_materials(const GlobalOptions& g, double lambda, std::ostream& out) {
    RunConfig cfg = g.config_path.empty() ? default_config() : load_config(g.config_path);
    const Model model = build_model(cfg);
    out << "# config_fingerprint: " << fingerprint(cfg) << '\n';
    out << "material,lambda_nm,n,k,eps_real,eps_imag\n";
    for (const auto& [name, mat] : model.materials) {
        out << name << ',' << format_number(lambda) << ',';
        if (mat.is_ideal_mirror()) {
            out << "ideal_mirror,,,\n";
            continue;
        }
        const Complex n = complex_index(mat, lambda);
        const Complex eps = permittivity(mat, lambda);
        out << format_number(n.real()) << ',' << format_number(n.imag()) << ',' << format_number(eps.real())
            << ',' << format_number(eps.imag()) << '\n';
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Emitter-mirror interference model: decay rates, patterns, enhancement maps"};
    app.name(args.empty() ? "mirrorscan" : fs::path(args.front()).filename().string());
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("-c,--config", g.config_path, "JSON run configuration");
    app.add_option("-o,--output", g.output_dir, "Output directory (overrides output.directory)");
    app.add_option("-j,--workers", g.workers, "Worker threads, 0 = all hardware threads");
    app.add_flag("--image,!--no-image", g.image, "Write PNG renderings next to the CSV files");

    auto* map = app.add_subcommand("map", "Enhancement map over the configured d and lambda grids");

    double pattern_d = 0.0;
    double pattern_lambda = 0.0;
    auto* pattern = app.add_subcommand("pattern", "Angular power density at one (d, lambda)");
    pattern->add_option("--d", pattern_d, "Gap width in nm")->required();
    pattern->add_option("--lambda", pattern_lambda, "Wavelength in nm")->required();

    auto* purcell = app.add_subcommand("purcell", "Decay-rate sweep over d or lambda");

    std::string scan_path;
    std::string ref_path;
    auto* enhance = app.add_subcommand("enhance", "Enhancement map from measured spectra");
    enhance->add_option("--scan", scan_path, "Scan dataset CSV")->required();
    enhance->add_option("--reference", ref_path, "Reference spectrum CSV")->required();

    std::string measured_path;
    double fit_lambda = 700.0;
    auto* fit = app.add_subcommand("fit-d0", "Estimate the smallest mirror gap from fringe positions");
    fit->add_option("--map", measured_path, "Measured enhancement map CSV")->required();
    fit->add_option("--lambda", fit_lambda, "Wavelength column to fit (nm)")->capture_default_str();

    double mat_lambda = 0.0;
    auto* mats = app.add_subcommand("materials", "Print resolved refractive indices");
    mats->add_option("--lambda", mat_lambda, "Wavelength in nm")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*map) return cmd_map(g, out);
        if (*pattern) return cmd_pattern(g, pattern_d, pattern_lambda, out);
        if (*purcell) return cmd_purcell(g, out);
        if (*enhance) return cmd_enhance(g, scan_path, ref_path, out);
        if (*fit) return cmd_fit_d0(g, measured_path, fit_lambda, out);
        if (*mats) return cmd_materials(g, mat_lambda, out);
    } catch (const InputError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const AnalysisError& e) {
        err << "analysis error: " << e.what() << '\n';
        return kExitAnalysis;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace mirrorscan::cli
