#pragma once

#include <filesystem>
#include <string>

#include "bldl/core.hpp"

namespace bldl::io {

// Reads a numeric CSV, one record per line. A first line that does not parse
// as numbers is treated as a header and skipped. Blank trailing lines are
// ignored. Throws ParseError with the 1-based line number.
Matrix read_csv(const std::filesystem::path& path);

// Writes `rows` one record per line, reals at 17 significant digits.
void write_csv(const std::filesystem::path& path, const Matrix& rows);

std::string format_real(double v);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace bldl::io
