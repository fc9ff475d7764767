#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "mirrorscan/collection.hpp"
#include "mirrorscan/io.hpp"
#include "oracles.hpp"

using namespace mirrorscan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigDir = MIRRORSCAN_CONFIG_DIR;

json default_json() {
    std::ifstream in(kConfigDir / "default.json");
    json j = json::parse(in);
    j["materials"]["silver"]["table"] = fs::absolute(kConfigDir / "../core/data/silver_johnson_christy.csv").string();
    return j;
}

fs::path write_config(const std::string& name, const json& j) {
    return oracle::temp_file(name + ".json", j.dump(2));
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "mirrorscan");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string comment_value(const std::string& text, const std::string& key) {
    const std::string tag = "# " + key + ": ";
    const auto pos = text.find(tag);
    if (pos == std::string::npos) return {};
    const auto end = text.find('\n', pos);
    return text.substr(pos + tag.size(), end - pos - tag.size());
}

std::vector<std::vector<double>> data_rows(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<double> row;
        std::istringstream fields(line);
        std::string f;
        while (std::getline(fields, f, ',')) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            row.push_back(end == f.c_str() ? std::nan("") : v);
        }
        rows.push_back(row);
    }
    return rows;
}

EmitterEnvironment silver_gap(double gap_nm) { return mirror_environment(materials::silver(), gap_nm); }

void set_grids(json& j, double d0, double d1, double dd, double l0, double l1, double dl) {
    j["grids"]["d_nm"] = {{"start", d0}, {"stop", d1}, {"step", dd}};
    j["grids"]["lambda_nm"] = {{"start", l0}, {"stop", l1}, {"step", dl}};
}

}  // namespace

TEST(Cli, OneCellMapMatchesLibrary) {
    json j = default_json();
    set_grids(j, 1234, 1234, 10, 654, 654, 1);
    const auto cfg = write_config("one_cell", j);
    const auto dir = oracle::temp_dir("cli_one_cell");
    const auto r = run_cli({"-c", cfg.string(), "-o", dir.string(), "map"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto map = read_map_csv(dir / "enhancement_map.csv");
    ASSERT_EQ(map.values.size(), 1u);
    EXPECT_NEAR(map.values[0], enhancement(silver_gap(1234.0), 654.0, {}), 1e-12);
    ASSERT_NE(map.find_metadata("config_fingerprint"), nullptr);
    EXPECT_EQ(map.find_metadata("config_fingerprint")->rfind("fnv1a64:", 0), 0u);
}

TEST(Cli, MissingTableIsConfigError) {
    json j = default_json();
    j["materials"]["silver"]["table"] = "/nonexistent/silver.csv";
    const auto cfg = write_config("missing_table", j);
    const auto r = run_cli({"-c", cfg.string(), "-o", oracle::temp_dir("cli_missing").string(), "map"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("materials.silver.table"), std::string::npos) << r.err;
}

TEST(Cli, UnknownKeyAndBadArguments) {
    json j = default_json();
    j["emitter"]["depht_nm"] = 8;
    const auto cfg = write_config("typo", j);
    const auto r = run_cli({"-c", cfg.string(), "map"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("emitter.depht_nm"), std::string::npos) << r.err;
    EXPECT_EQ(run_cli({"pattern", "--d", "abc", "--lambda", "700"}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, PatternConeOrdering) {
    const auto dir = oracle::temp_dir("cli_pattern");
    double collected[2];
    double reference = 0.0;
    const double gaps[2] = {130.0, 350.0};
    for (int i = 0; i < 2; ++i) {
        const auto r = run_cli({"-o", dir.string(), "pattern", "--d", i == 0 ? "130" : "350", "--lambda", "700"});
        ASSERT_EQ(r.code, 0) << r.err;
        const auto text = slurp(dir / (i == 0 ? "pattern_d130_lambda700.csv" : "pattern_d350_lambda700.csv"));
        collected[i] = std::stod(comment_value(text, "collected_power"));
        reference = std::stod(comment_value(text, "no_mirror_collected_power"));
        EXPECT_NEAR(collected[i], collected_power(silver_gap(gaps[i]), 700.0, {}), 1e-12);
        EXPECT_FALSE(data_rows(text).empty());
    }
    EXPECT_GT(collected[0], reference);
    EXPECT_GT(reference, collected[1]);
}

TEST(Cli, PurcellDefaultSweep) {
    const auto dir = oracle::temp_dir("cli_purcell");
    const auto r = run_cli({"-o", dir.string(), "purcell"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = data_rows(slurp(dir / "purcell.csv"));
    ASSERT_EQ(rows.size(), 491u);
    for (const auto& row : rows) {
        if (row[0] >= 110.0) {
            EXPECT_GE(row[2], 0.63) << row[0];
            EXPECT_LE(row[2], 0.80) << row[0];
        }
    }
}

TEST(Cli, PurcellQuenchingAndHomogeneous) {
    json j = default_json();
    j["purcell"] = {{"sweep", "distance"}, {"lambda_nm", 700}, {"d_nm", {{"start", 20}, {"stop", 1000}, {"step", 980}}}};
    const auto dir = oracle::temp_dir("cli_purcell_q");
    ASSERT_EQ(run_cli({"-c", write_config("quench", j).string(), "-o", dir.string(), "purcell"}).code, 0);
    const auto rows = data_rows(slurp(dir / "purcell.csv"));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_GT(rows[0][5], rows[1][5]);

    j["stack"]["exit"] = "diamond";
    j["stack"]["layers"] = json::array({{{"material", "diamond"}, {"gap", true}}});
    const auto dir2 = oracle::temp_dir("cli_purcell_h");
    const auto r = run_cli({"-c", write_config("homog", j).string(), "-o", dir2.string(), "purcell"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& row : data_rows(slurp(dir2 / "purcell.csv"))) EXPECT_NEAR(row[2], 1.0, 1e-6);
}

TEST(Cli, EnhanceEqualSpectraAndTruncation) {
    const std::vector<double> l{600.0, 601.0, 602.0, 603.0};
    ScanDataset scan{{500.0, 510.0}, l, {{1.0, 2.0, 3.0, 2.0}, {2.0, 4.0, 6.0, 4.0}}};
    SpectrumRecord ref{l, {1.0, 2.0, 3.0, 2.0}};
    const auto dir = oracle::temp_dir("cli_enhance");
    {
        std::ofstream s(dir / "scan.csv");
        write_scan_csv(s, scan);
        std::ofstream r(dir / "ref.csv");
        write_reference_csv(r, ref);
    }
    const auto r = run_cli({"-o", dir.string(), "enhance", "--scan", (dir / "scan.csv").string(), "--reference",
                            (dir / "ref.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto map = read_map_csv(dir / "measured_enhancement.csv");
    for (double v : map.values) EXPECT_NEAR(v, 1.0, 1e-12);
    EXPECT_FALSE(comment_value(slurp(dir / "measured_enhancement.csv"), "config_fingerprint").empty());

    const auto bad = oracle::temp_file("truncated_scan.csv", "# lambda_nm:,600,601,602\n500,1,2,3\n510,1,2\n");
    const auto rb = run_cli({"-o", dir.string(), "enhance", "--scan", bad.string(), "--reference",
                             (dir / "ref.csv").string()});
    EXPECT_EQ(rb.code, 2);
    EXPECT_NE(rb.err.find("line 3"), std::string::npos) << rb.err;
}

TEST(Cli, EnhanceSyntheticRoundTrip) {
    std::vector<double> d, l;
    for (double x = 500.0; x <= 800.0; x += 50.0) d.push_back(x);
    for (double x = 650.0; x <= 750.0; x += 10.0) l.push_back(x);
    const auto model = enhancement_map(d, l, {}, silver_gap(100.0), {});
    SpectrumRecord ref{l, {}};
    for (double x : l) ref.counts.push_back(1.0 + std::exp(-std::pow((x - 700.0) / 40.0, 2)));
    ScanDataset scan{d, l, {}};
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::vector<double> c;
        for (std::size_t k = 0; k < l.size(); ++k) c.push_back(500.0 * (1.0 + 0.1 * i) * ref.counts[k] * model.at(i, k));
        scan.counts.push_back(c);
    }
    const auto dir = oracle::temp_dir("cli_enhance_rt");
    {
        std::ofstream s(dir / "scan.csv");
        write_scan_csv(s, scan);
        std::ofstream r(dir / "ref.csv");
        write_reference_csv(r, ref);
    }
    ASSERT_EQ(run_cli({"-o", dir.string(), "enhance", "--scan", (dir / "scan.csv").string(), "--reference",
                       (dir / "ref.csv").string()})
                  .code,
              0);
    const auto measured = read_map_csv(dir / "measured_enhancement.csv");
    const auto expected = normalized_model_enhancement(model, ref);
    for (std::size_t i = 0; i < expected.values.size(); ++i) {
        EXPECT_NEAR(measured.values[i], expected.values[i], 1e-6 * expected.values[i]);
    }
}

TEST(Cli, FitD0FromModelMap) {
    json j = default_json();
    set_grids(j, 500, 12500, 10, 700, 700, 1);
    const auto cfg = write_config("fit", j);
    const auto dir = oracle::temp_dir("cli_fit");
    ASSERT_EQ(run_cli({"-c", cfg.string(), "-o", dir.string(), "map"}).code, 0);

    auto r = run_cli({"-c", cfg.string(), "-o", dir.string(), "fit-d0", "--map", (dir / "enhancement_map.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = data_rows(slurp(dir / "fit_d0.csv"));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0][1], 500.0, 5.0);
    EXPECT_NE(r.out.find("d0 estimate"), std::string::npos);

    auto noisy = read_map_csv(dir / "enhancement_map.csv");
    std::mt19937 rng(5);
    std::normal_distribution<double> n(0.0, 0.02);
    for (double& v : noisy.values) v *= 1.0 + n(rng);
    {
        std::ofstream f(dir / "noisy.csv");
        write_map_csv(f, noisy);
    }
    r = run_cli({"-c", cfg.string(), "-o", dir.string(), "fit-d0", "--map", (dir / "noisy.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    rows = data_rows(slurp(dir / "fit_d0.csv"));
    EXPECT_NEAR(rows[0][1], 500.0, 20.0);
}

TEST(Cli, FitD0WithoutFringesIsAnalysisError) {
    EnhancementMap flat;
    for (int i = 0; i < 50; ++i) flat.d_grid.push_back(500.0 + 10.0 * i);
    flat.lambda_grid = {700.0};
    for (int i = 0; i < 50; ++i) flat.values.push_back(1.0 + 0.001 * i);
    const auto dir = oracle::temp_dir("cli_fit_flat");
    {
        std::ofstream f(dir / "flat.csv");
        write_map_csv(f, flat);
    }
    const auto r = run_cli({"-o", dir.string(), "fit-d0", "--map", (dir / "flat.csv").string()});
    EXPECT_EQ(r.code, 4) << r.err;
    EXPECT_TRUE(fs::exists(dir / "fit_d0_diagnostic.csv"));
}

TEST(Cli, WorkerCountDoesNotChangeOutput) {
    json j = default_json();
    set_grids(j, 500, 1500, 50, 600, 800, 20);
    const auto cfg = write_config("workers", j);
    const auto a = oracle::temp_dir("cli_j1");
    const auto b = oracle::temp_dir("cli_j3");
    ASSERT_EQ(run_cli({"-c", cfg.string(), "-o", a.string(), "-j", "1", "map"}).code, 0);
    ASSERT_EQ(run_cli({"-c", cfg.string(), "-o", b.string(), "-j", "3", "map"}).code, 0);
    EXPECT_EQ(slurp(a / "enhancement_map.csv"), slurp(b / "enhancement_map.csv"));
}

TEST(Cli, ImageToggleWritesPng) {
    json j = default_json();
    set_grids(j, 500, 600, 50, 690, 710, 10);
    const auto cfg = write_config("image", j);
    const auto dir = oracle::temp_dir("cli_image");
    ASSERT_EQ(run_cli({"-c", cfg.string(), "-o", dir.string(), "--image", "map"}).code, 0);
    EXPECT_TRUE(fs::exists(dir / "enhancement_map.png"));
    const auto dir2 = oracle::temp_dir("cli_no_image");
    ASSERT_EQ(run_cli({"-c", cfg.string(), "-o", dir2.string(), "--no-image", "map"}).code, 0);
    EXPECT_FALSE(fs::exists(dir2 / "enhancement_map.png"));
}

TEST(Cli, MaterialsListsSilver) {
    const auto r = run_cli({"materials", "--lambda", "700"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("silver,700,"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("diamond,700,2.41,0"), std::string::npos) << r.out;
    EXPECT_EQ(run_cli({"materials", "--lambda", "100"}).code, 2);
}
