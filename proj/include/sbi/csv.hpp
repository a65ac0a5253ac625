#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sbi/types.hpp"

namespace sbi {

// Numeric CSV: comma separated, one row per line. A first line that does not
// parse as numbers is treated as a header and skipped.
SampleMatrix read_csv(const std::filesystem::path& path);
SampleMatrix read_csv(std::istream& in);

// Writes with 17 significant digits so values round-trip exactly.
void write_csv(const std::filesystem::path& path, const SampleMatrix& m);
void write_csv(std::ostream& out, const SampleMatrix& m);

}  // namespace sbi
