#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mirrorscan/collection.hpp"
#include "mirrorscan/dipole_emission.hpp"
#include "mirrorscan/exp_pipeline.hpp"

namespace mirrorscan {

using CommentBlock = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

// Angular pattern: `# key: value` comments, then `theta_rad,perp_p,par_p,par_s`.
void write_pattern_csv(std::ostream& out, const AngularPattern& pattern, const CommentBlock& comments);

// Enhancement map: comments (map metadata first, then `extra`), a header row
// `d_nm\lambda_nm,<lambda grid>`, then one row per d: `d, E(d, l1), ...`.
void write_map_csv(std::ostream& out, const EnhancementMap& map, const CommentBlock& extra = {});
EnhancementMap read_map_csv(std::istream& in, const std::string& source);
EnhancementMap read_map_csv(const std::filesystem::path& path);

// Scan dataset: `# lambda_nm:,<grid>` then rows `d_nm, c1, c2, ...`.
void write_scan_csv(std::ostream& out, const ScanDataset& scan, const CommentBlock& comments = {});
ScanDataset read_scan_csv(std::istream& in, const std::string& source);
ScanDataset read_scan_csv(const std::filesystem::path& path);

// Reference spectrum: same header and a single row of counts (an optional
// leading label field is ignored).
void write_reference_csv(std::ostream& out, const SpectrumRecord& spectrum,
                         const CommentBlock& comments = {});
SpectrumRecord read_reference_csv(std::istream& in, const std::string& source);
SpectrumRecord read_reference_csv(const std::filesystem::path& path);

}  // namespace mirrorscan
