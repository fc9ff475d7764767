#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <sstream>

#include "mirrorscan/errors.hpp"
#include "mirrorscan/io.hpp"
#include "oracles.hpp"

using namespace mirrorscan;

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.5), "0.5");
    EXPECT_EQ(format_number(700.0), "700");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, i % 20 - 10);
        EXPECT_EQ(std::stod(format_number(v)), v);
    }
}

TEST(MapCsv, RoundTripIsBitExact) {
    EnhancementMap map;
    map.d_grid = {500.0, 510.0, 520.0};
    map.lambda_grid = {699.5, 700.0};
    map.values = {1.0 / 3.0, 2.0 / 7.0, 1.23456789012345678, 2.0, 0.1, std::nextafter(1.0, 2.0)};
    map.set_metadata("normalization", "raw");
    std::ostringstream out;
    write_map_csv(out, map, {{"command", "map"}});
    std::istringstream in(out.str());
    const auto back = read_map_csv(in, "memory");
    EXPECT_EQ(back.d_grid, map.d_grid);
    EXPECT_EQ(back.lambda_grid, map.lambda_grid);
    EXPECT_EQ(back.values, map.values);
    ASSERT_NE(back.find_metadata("command"), nullptr);
    EXPECT_EQ(*back.find_metadata("normalization"), "raw");
}

TEST(MapCsv, FieldCountErrorNamesLine) {
    const std::string text = "# normalization: raw\nd_nm\\lambda_nm,700,701\n500,1,1\n510,1\n";
    std::istringstream in(text);
    try {
        read_map_csv(in, "memory");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
    std::istringstream bad("d_nm\\lambda_nm,700,701\n500,1,-1\n");
    EXPECT_THROW(read_map_csv(bad, "memory"), ParseError);
}

TEST(ScanCsv, RoundTripAndErrors) {
    ScanDataset scan{{500.0, 510.0}, {600.0, 601.0, 602.0}, {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}}};
    std::ostringstream out;
    write_scan_csv(out, scan, {{"sample", "toy"}});
    std::istringstream in(out.str());
    const auto back = read_scan_csv(in, "memory");
    EXPECT_EQ(back.d_nm, scan.d_nm);
    EXPECT_EQ(back.lambda_nm, scan.lambda_nm);
    EXPECT_EQ(back.counts, scan.counts);

    std::istringstream truncated("# lambda_nm:,600,601,602\n500,1,2,3\n510,4,5\n");
    try {
        read_scan_csv(truncated, "memory");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::istringstream no_header("500,1,2,3\n");
    EXPECT_THROW(read_scan_csv(no_header, "memory"), ParseError);
    std::istringstream twice("# lambda_nm:,600,601\n# lambda_nm:,600,601\n500,1,2\n");
    EXPECT_THROW(read_scan_csv(twice, "memory"), ParseError);
}

TEST(ReferenceCsv, OptionalLabel) {
    std::istringstream plain("# lambda_nm:,600,601,602\n1,2,3\n");
    std::istringstream labelled("# lambda_nm:,600,601,602\nreference,1,2,3\n");
    const auto a = read_reference_csv(plain, "memory");
    const auto b = read_reference_csv(labelled, "memory");
    EXPECT_EQ(a.counts, (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(a.lambda_nm, b.lambda_nm);
    std::ostringstream out;
    write_reference_csv(out, a);
    std::istringstream again(out.str());
    EXPECT_EQ(read_reference_csv(again, "memory").counts, a.counts);
}

TEST(Files, MissingPathIsParseError) {
    EXPECT_THROW(read_map_csv(std::filesystem::path("/nonexistent/map.csv")), ParseError);
    EXPECT_THROW(read_scan_csv(std::filesystem::path("/nonexistent/scan.csv")), ParseError);
    const auto p = oracle::temp_file("ref.csv", "# lambda_nm:,600,601\nref,1,1\n");
    EXPECT_EQ(read_reference_csv(p).counts.size(), 2u);
}
