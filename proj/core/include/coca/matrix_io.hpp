#pragma once

#include "coca/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace coca {

struct CsvTable {
  std::vector<std::string> header;  // empty when the input had none
  Matrix values;
};

/// Comma-separated, one observation per row. Empty or non-numeric fields
/// and ragged rows throw InvalidData naming the line.
[[nodiscard]] CsvTable parse_csv(std::istream& in, bool has_header);
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path, bool has_header);

/// Dense CSV, 17 significant digits so values round-trip exactly.
void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header = {});
void write_csv(const std::filesystem::path& path, const Matrix& m,
               const std::vector<std::string>& header = {});

/// Round-trip formatting of one double.
[[nodiscard]] std::string format_double(double x);

/// {"kind": ..., "rows": d, "cols": d, "matrix": [[...], ...]}
[[nodiscard]] std::string estimate_to_json(const Matrix& m, std::string_view kind);
[[nodiscard]] Matrix estimate_from_json(std::string_view text, std::string* kind = nullptr);

}  // namespace coca
