#include "mirrorscan/materials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "mirrorscan/errors.hpp"
#include "text_util.hpp"

namespace mirrorscan {

DispersionTable::DispersionTable(std::vector<DispersionRow> rows, std::string source)
    : rows_(std::move(rows)), source_(std::move(source)) {
    if (rows_.size() < 2) {
        throw ValidationError(source_ + ": dispersion table needs at least 2 rows");
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        if (!std::isfinite(r.wavelength_nm) || !std::isfinite(r.n) || !std::isfinite(r.k)) {
            throw ValidationError(source_ + ": non-finite value in row " + std::to_string(i + 1));
        }
        if (r.n <= 0.0) {
            throw ValidationError(source_ + ": n must be positive (row " + std::to_string(i + 1) + ")");
        }
        if (r.k < 0.0) {
            throw ValidationError(source_ + ": k must be non-negative (row " +
                                  std::to_string(i + 1) + ")");
        }
        if (i > 0 && !(r.wavelength_nm > rows_[i - 1].wavelength_nm)) {
            throw ValidationError(source_ + ": wavelengths must be strictly increasing (row " +
                                  std::to_string(i + 1) + ")");
        }
    }
}

Complex DispersionTable::at(double wavelength_nm) const {
    if (!(wavelength_nm >= min_wavelength() && wavelength_nm <= max_wavelength())) {
        std::ostringstream msg;
        msg << source_ << ": wavelength " << wavelength_nm << " nm outside table span ["
            << min_wavelength() << ", " << max_wavelength() << "] nm";
        throw OutOfRange(msg.str());
    }
    auto hi = std::lower_bound(rows_.begin(), rows_.end(), wavelength_nm,
                               [](const DispersionRow& r, double w) { return r.wavelength_nm < w; });
    if (hi->wavelength_nm == wavelength_nm) {
        return {hi->n, hi->k};
    }
    auto lo = std::prev(hi);
    const double t = (wavelength_nm - lo->wavelength_nm) / (hi->wavelength_nm - lo->wavelength_nm);
    return {lo->n + t * (hi->n - lo->n), lo->k + t * (hi->k - lo->k)};
}

DispersionTable parse_dispersion_table(std::istream& in, const std::string& source) {
    std::vector<DispersionRow> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        if (!header_seen) {
            if (detail::strip_spaces(text) != "wavelength_nm,n,k") {
                throw ParseError(source + ": expected header 'wavelength_nm,n,k'", line_no);
            }
            header_seen = true;
            continue;
        }
        const auto fields = detail::split(text, ',');
        if (fields.size() != 3) {
            throw ParseError(source + ": expected 3 fields, got " + std::to_string(fields.size()),
                             line_no);
        }
        DispersionRow row{};
        double* dst[] = {&row.wavelength_nm, &row.n, &row.k};
        for (std::size_t i = 0; i < 3; ++i) {
            if (!detail::parse_double(fields[i], *dst[i])) {
                throw ParseError(source + ": cannot parse '" + std::string(detail::trim(fields[i])) +
                                     "' as a number",
                                 line_no);
            }
        }
        rows.push_back(row);
    }
    if (!header_seen) throw ParseError(source + ": missing header 'wavelength_nm,n,k'");
    return DispersionTable(std::move(rows), source);
}

DispersionTable load_dispersion_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dispersion table '" + path.string() + "'");
    return parse_dispersion_table(in, path.string());
}

OpticalMaterial::OpticalMaterial(std::string name, ConstantIndex index)
    : name_(std::move(name)), model_(index) {
    if (!(index.n > 0.0) || !std::isfinite(index.n)) {
        throw ValidationError("material '" + name_ + "': constant index n must be positive");
    }
    if (!(index.k >= 0.0) || !std::isfinite(index.k)) {
        throw ValidationError("material '" + name_ + "': k must be non-negative");
    }
}

OpticalMaterial::OpticalMaterial(std::string name, DispersionTable table)
    : name_(std::move(name)), model_(std::make_shared<const DispersionTable>(std::move(table))) {}

OpticalMaterial::OpticalMaterial(std::string name, IdealMirror mirror)
    : name_(std::move(name)), model_(mirror) {}

const DispersionTable* OpticalMaterial::table() const noexcept {
    if (const auto* t = std::get_if<Tabulated>(&model_)) return t->get();
    return nullptr;
}

double OpticalMaterial::min_wavelength() const noexcept {
    if (const auto* t = table()) return t->min_wavelength();
    return 0.0;
}

double OpticalMaterial::max_wavelength() const noexcept {
    if (const auto* t = table()) return t->max_wavelength();
    return std::numeric_limits<double>::infinity();
}

Complex complex_index(const OpticalMaterial& material, double wavelength_nm) {
    return std::visit(
        [&](const auto& m) -> Complex {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantIndex>) {
                return {m.n, m.k};
            } else if constexpr (std::is_same_v<T, OpticalMaterial::Tabulated>) {
                return m->at(wavelength_nm);
            } else {
                throw ValidationError("material '" + material.name() +
                                      "' is an ideal mirror and has no refractive index");
            }
        },
        material.model());
}

Complex permittivity(const OpticalMaterial& material, double wavelength_nm) {
    const Complex n = complex_index(material, wavelength_nm);
    return n * n;
}

namespace materials {

OpticalMaterial diamond() { return {"diamond", ConstantIndex{kDiamondIndex, 0.0}}; }
OpticalMaterial air() { return {"air", ConstantIndex{1.0, 0.0}}; }
OpticalMaterial ideal_mirror() { return {"ideal_mirror", IdealMirror{}}; }
OpticalMaterial silver(const std::filesystem::path& table_path) {
    return {"silver", load_dispersion_table(table_path)};
}

std::filesystem::path bundled_silver_table() {
    return std::filesystem::path(MIRRORSCAN_DATA_DIR) / "silver_johnson_christy.csv";
}

OpticalMaterial silver() { return silver(bundled_silver_table()); }

}  // namespace materials

}  // namespace mirrorscan
