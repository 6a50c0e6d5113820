#include "coca/matrix_io.hpp"

#include "coca/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace coca {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_field(const std::string& raw, std::size_t line_no) {
  const std::string f = trim(raw);
  double v = 0.0;
  const auto* end = f.data() + f.size();
  const auto [ptr, ec] = std::from_chars(f.data(), end, v);
  if (f.empty() || ec != std::errc{} || ptr != end) {
    throw InvalidData("line " + std::to_string(line_no) + ": missing or non-numeric value '" + f + "'");
  }
  if (!std::isfinite(v)) throw InvalidData("line " + std::to_string(line_no) + ": non-finite value");
  return v;
}

}  // namespace

CsvTable parse_csv(std::istream& in, bool has_header) {
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (has_header && table.header.empty() && rows.empty()) {
      for (auto& f : fields) table.header.push_back(trim(f));
      width = fields.size();
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw InvalidData("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                        " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(width);
    for (const auto& f : fields) row.push_back(parse_field(f, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidData("no data rows");
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return parse_csv(in, has_header);
}

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_csv(out, m, header);
}

std::string estimate_to_json(const Matrix& m, std::string_view kind) {
  nlohmann::json j;
  j["kind"] = std::string(kind);
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto& rows = j["matrix"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return j.dump(2);
}

Matrix estimate_from_json(std::string_view text, std::string* kind) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidData(std::string("malformed estimate JSON: ") + e.what());
  }
  if (!j.contains("matrix") || !j["matrix"].is_array()) throw InvalidData("estimate JSON lacks a matrix");
  const auto& rows = j["matrix"];
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != c) throw InvalidData("ragged matrix in estimate JSON");
    for (Eigen::Index k = 0; k < c; ++k) {
      if (!rows[i][k].is_number()) throw InvalidData("non-numeric entry in estimate JSON");
      m(i, k) = rows[i][k].get<double>();
    }
  }
  const auto declared = [&](const char* field, Eigen::Index actual) {
    if (!j.contains(field)) return;
    if (!j[field].is_number_integer() || j[field].get<Eigen::Index>() != actual) {
      throw InvalidData(std::string("estimate JSON field '") + field + "' does not match the matrix");
    }
  };
  declared("rows", r);
  declared("cols", c);
  if (kind != nullptr) *kind = j.value("kind", "");
  return m;
}

}  // namespace coca
