#include "mirrorscan/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "mirrorscan/errors.hpp"
#include "text_util.hpp"

namespace mirrorscan {

namespace {

constexpr std::string_view kLambdaPrefix = "# lambda_nm:";
constexpr std::string_view kMapCorner = "d_nm\\lambda_nm";

void write_comments(std::ostream& out, const CommentBlock& comments) {
    for (const auto& [key, value] : comments) out << "# " << key << ": " << value << '\n';
}

std::vector<double> parse_numbers(std::span<const std::string_view> fields, std::size_t line,
                                  const std::string& source) {
    std::vector<double> out;
    out.reserve(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        double v = 0.0;
        if (!detail::parse_double(fields[i], v)) {
            throw ParseError(source + ": column " + std::to_string(i + 1) + ": cannot parse '" +
                                 std::string(detail::trim(fields[i])) + "' as a number",
                             line);
        }
        out.push_back(v);
    }
    return out;
}

std::vector<double> parse_lambda_header(std::string_view text, std::size_t line, const std::string& source) {
    text.remove_prefix(kLambdaPrefix.size());
    std::vector<std::string_view> fields;
    for (auto f : detail::split(text, ',')) {
        if (!detail::trim(f).empty()) fields.push_back(f);
    }
    if (fields.empty()) throw ParseError(source + ": empty wavelength grid", line);
    return parse_numbers(fields, line, source);
}

template <class Reader>
auto open_and_read(const std::filesystem::path& path, Reader reader) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return reader(in, path.string());
}

}  // namespace

std::string format_number(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

void write_pattern_csv(std::ostream& out, const AngularPattern& pattern, const CommentBlock& comments) {
    write_comments(out, comments);
    out << "theta_rad,perp_p,par_p,par_s\n";
    for (std::size_t i = 0; i < pattern.theta.size(); ++i) {
        const auto& p = pattern.densities[i];
        out << format_number(pattern.theta[i]) << ',' << format_number(p.perp_p) << ','
            << format_number(p.par_p) << ',' << format_number(p.par_s) << '\n';
    }
}

void write_map_csv(std::ostream& out, const EnhancementMap& map, const CommentBlock& extra) {
    write_comments(out, map.metadata);
    write_comments(out, extra);
    out << kMapCorner;
    for (double l : map.lambda_grid) out << ',' << format_number(l);
    out << '\n';
    for (std::size_t i = 0; i < map.d_grid.size(); ++i) {
        out << format_number(map.d_grid[i]);
        for (std::size_t j = 0; j < map.lambda_grid.size(); ++j) out << ',' << format_number(map.at(i, j));
        out << '\n';
    }
}

EnhancementMap read_map_csv(std::istream& in, const std::string& source) {
    EnhancementMap map;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const auto body = detail::trim(text.substr(1));
            const auto colon = body.find(':');
            if (colon != std::string_view::npos) {
                map.metadata.emplace_back(std::string(detail::trim(body.substr(0, colon))),
                                          std::string(detail::trim(body.substr(colon + 1))));
            }
            continue;
        }
        const auto fields = detail::split(text, ',');
        if (!header) {
            if (fields.size() < 2) throw ParseError(source + ": header needs a wavelength grid", line_no);
            map.lambda_grid = parse_numbers(std::span(fields).subspan(1), line_no, source);
            header = true;
            continue;
        }
        if (fields.size() != map.lambda_grid.size() + 1) {
            throw ParseError(source + ": expected " + std::to_string(map.lambda_grid.size() + 1) +
                                 " fields, got " + std::to_string(fields.size()),
                             line_no);
        }
        const auto numbers = parse_numbers(fields, line_no, source);
        map.d_grid.push_back(numbers.front());
        map.values.insert(map.values.end(), numbers.begin() + 1, numbers.end());
    }
    if (!header) throw ParseError(source + ": missing header row");
    if (map.d_grid.empty()) throw ParseError(source + ": no data rows");
    try {
        map.validate();
    } catch (const ValidationError& e) {
        throw ParseError(source + ": " + e.what());
    }
    return map;
}

EnhancementMap read_map_csv(const std::filesystem::path& path) {
    return open_and_read(path, [](std::istream& in, const std::string& s) { return read_map_csv(in, s); });
}

void write_scan_csv(std::ostream& out, const ScanDataset& scan, const CommentBlock& comments) {
    out << kLambdaPrefix;
    for (double l : scan.lambda_nm) out << ',' << format_number(l);
    out << '\n';
    write_comments(out, comments);
    for (std::size_t i = 0; i < scan.d_nm.size(); ++i) {
        out << format_number(scan.d_nm[i]);
        for (double c : scan.counts[i]) out << ',' << format_number(c);
        out << '\n';
    }
}

ScanDataset read_scan_csv(std::istream& in, const std::string& source) {
    ScanDataset scan;
    std::string line;
    std::size_t line_no = 0;
    bool grid = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (text.starts_with(kLambdaPrefix)) {
            if (grid) throw ParseError(source + ": duplicate wavelength header", line_no);
            scan.lambda_nm = parse_lambda_header(text, line_no, source);
            grid = true;
            continue;
        }
        if (text.front() == '#') continue;
        if (!grid) throw ParseError(source + ": data row before '# lambda_nm:' header", line_no);
        const auto fields = detail::split(text, ',');
        if (fields.size() != scan.lambda_nm.size() + 1) {
            throw ParseError(source + ": expected " + std::to_string(scan.lambda_nm.size() + 1) +
                                 " fields (d_nm plus one count per wavelength), got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        auto numbers = parse_numbers(fields, line_no, source);
        scan.d_nm.push_back(numbers.front());
        scan.counts.emplace_back(numbers.begin() + 1, numbers.end());
    }
    if (!grid) throw ParseError(source + ": missing '# lambda_nm:' header");
    if (scan.d_nm.empty()) throw ParseError(source + ": no spectra");
    return scan;
}

ScanDataset read_scan_csv(const std::filesystem::path& path) {
    return open_and_read(path, [](std::istream& in, const std::string& s) { return read_scan_csv(in, s); });
}

void write_reference_csv(std::ostream& out, const SpectrumRecord& spectrum, const CommentBlock& comments) {
    out << kLambdaPrefix;
    for (double l : spectrum.lambda_nm) out << ',' << format_number(l);
    out << '\n';
    write_comments(out, comments);
    for (std::size_t i = 0; i < spectrum.counts.size(); ++i) {
        out << (i ? "," : "") << format_number(spectrum.counts[i]);
    }
    out << '\n';
}

SpectrumRecord read_reference_csv(std::istream& in, const std::string& source) {
    SpectrumRecord spectrum;
    std::string line;
    std::size_t line_no = 0;
    bool grid = false;
    bool row = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (text.starts_with(kLambdaPrefix)) {
            if (grid) throw ParseError(source + ": duplicate wavelength header", line_no);
            spectrum.lambda_nm = parse_lambda_header(text, line_no, source);
            grid = true;
            continue;
        }
        if (text.front() == '#') continue;
        if (!grid) throw ParseError(source + ": data row before '# lambda_nm:' header", line_no);
        if (row) throw ParseError(source + ": reference file must contain a single spectrum", line_no);
        auto fields = detail::split(text, ',');
        const std::size_t n = spectrum.lambda_nm.size();
        if (fields.size() == n + 1) {
            fields.erase(fields.begin());
        } else if (fields.size() != n) {
            throw ParseError(source + ": expected " + std::to_string(n) + " counts, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        spectrum.counts = parse_numbers(fields, line_no, source);
        row = true;
    }
    if (!grid) throw ParseError(source + ": missing '# lambda_nm:' header");
    if (!row) throw ParseError(source + ": no spectrum row");
    try {
        spectrum.validate();
    } catch (const ValidationError& e) {
        throw ParseError(source + ": " + e.what());
    }
    return spectrum;
}

SpectrumRecord read_reference_csv(const std::filesystem::path& path) {
    return open_and_read(path,
                         [](std::istream& in, const std::string& s) { return read_reference_csv(in, s); });
}

}  // namespace mirrorscan
