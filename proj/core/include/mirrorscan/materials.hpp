#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace mirrorscan {

using Complex = std::complex<double>;

struct DispersionRow {
    double wavelength_nm;
    double n;
    double k;
};

/// Tabulated complex refractive index n + ik versus vacuum wavelength.
///
/// Rows are strictly increasing in wavelength, with n > 0 and k >= 0.
/// Queries interpolate n and k separately and linearly in wavelength; queries
/// outside the tabulated span throw OutOfRange rather than extrapolate.
class DispersionTable {
public:
    DispersionTable(std::vector<DispersionRow> rows, std::string source);

    [[nodiscard]] const std::vector<DispersionRow>& rows() const noexcept { return rows_; }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] double min_wavelength() const noexcept { return rows_.front().wavelength_nm; }
    [[nodiscard]] double max_wavelength() const noexcept { return rows_.back().wavelength_nm; }

    [[nodiscard]] Complex at(double wavelength_nm) const;

private:
    std::vector<DispersionRow> rows_;
    std::string source_;
};

/// Parses the `wavelength_nm,n,k` CSV format. `#` lines are comments.
DispersionTable parse_dispersion_table(std::istream& in, const std::string& source);
DispersionTable load_dispersion_table(const std::filesystem::path& path);

struct ConstantIndex {
    double n = 1.0;
    double k = 0.0;
};

// Perfect reflector. Only valid as the exit half-space of a stack, where it
// bypasses the Fresnel formulas (r_s = -1, r_p = +1).
struct IdealMirror {};

class OpticalMaterial {
public:
    using Tabulated = std::shared_ptr<const DispersionTable>;
    using Model = std::variant<ConstantIndex, Tabulated, IdealMirror>;

    OpticalMaterial(std::string name, ConstantIndex index);
    OpticalMaterial(std::string name, DispersionTable table);
    OpticalMaterial(std::string name, IdealMirror mirror);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const Model& model() const noexcept { return model_; }
    [[nodiscard]] bool is_ideal_mirror() const noexcept {
        return std::holds_alternative<IdealMirror>(model_);
    }
    [[nodiscard]] bool is_constant() const noexcept {
        return std::holds_alternative<ConstantIndex>(model_);
    }
    [[nodiscard]] const DispersionTable* table() const noexcept;

    // Wavelength span over which the material is defined; unbounded for
    // constant indices.
    [[nodiscard]] double min_wavelength() const noexcept;
    [[nodiscard]] double max_wavelength() const noexcept;

private:
    std::string name_;
    Model model_;
};

/// n + ik at the given vacuum wavelength. Throws OutOfRange for tabulated
/// materials queried outside their table, ValidationError for IdealMirror.
Complex complex_index(const OpticalMaterial& material, double wavelength_nm);

/// (n + ik)^2, computed after interpolating n and k.
Complex permittivity(const OpticalMaterial& material, double wavelength_nm);

namespace materials {

inline constexpr double kDiamondIndex = 2.41;

OpticalMaterial diamond();
OpticalMaterial air();
OpticalMaterial ideal_mirror();
OpticalMaterial silver(const std::filesystem::path& table_path);

/// Bundled Johnson & Christy silver table (build tree or install prefix).
std::filesystem::path bundled_silver_table();
OpticalMaterial silver();

}  // namespace materials

}  // namespace mirrorscan
