#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lrbathy/geometry.hpp"
#include "lrbathy/lr_surface.hpp"
#include "lrbathy/survey.hpp"

namespace lrb {

inline constexpr std::uint32_t kSurfaceFormatVersion = 1;

// Surface files. The layouts are documented in docs/file_formats.md.

void write_surface_binary(const LRSurface& s, std::ostream& out);
LRSurface read_surface_binary(std::istream& in);

void write_surface_text(const LRSurface& s, std::ostream& out);
LRSurface read_surface_text(std::istream& in);

/// Exact size in bytes of the binary serialization.
std::size_t binary_size(const LRSurface& s);

/// Chooses the format by extension: ".lrt" is text, anything else binary.
void save_surface(const LRSurface& s, const std::filesystem::path& p);
/// Detects the format from the leading magic bytes.
LRSurface load_surface(const std::filesystem::path& p);

// Point and survey files.

/// Reads whitespace or comma separated "x y z" rows, or the binary point
/// format. Header lines starting with '#' carry "key: value" metadata.
Survey read_survey(std::istream& in, const std::string& fallback_id);
Survey load_survey(const std::filesystem::path& p);
std::vector<Point3> load_points(const std::filesystem::path& p);

void write_survey_text(const Survey& s, std::ostream& out);
void write_survey_binary(const Survey& s, std::ostream& out);
/// ".lrp" selects the binary point format, anything else text.
void save_survey(const Survey& s, const std::filesystem::path& p);

/// Formats a double so that it reads back to the same value.
std::string format_exact(double x);

}  // namespace lrb
