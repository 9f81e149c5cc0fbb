#include "fcir/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fcir/errors.hpp"

namespace fcir::io {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InternalError("csv row has the wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  return *this;
}

std::string path_csv(const Grid<double>& grid, const Vector<double>& values, std::string_view column) {
  std::string out = "t,";
  out += column;
  out += '\n';
  out.reserve(out.size() + static_cast<std::size_t>(values.size()) * 44);
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    out += format_real(grid.time(j));
    out += ',';
    out += format_real(values[j]);
    out += '\n';
  }
  return out;
}

std::string figure_csv(const Grid<double>& grid, const Vector<double>& lhs, const Vector<double>& rhs) {
  CsvWriter csv({"t", "lhs", "rhs"});
  const Eigen::Index n = std::min(lhs.size(), rhs.size());
  for (Eigen::Index j = 0; j < n; ++j)
    csv.row({format_real(grid.time(j)), format_real(lhs[j]), format_real(rhs[j])});
  return csv.str();
}

std::string intervals_csv(const Grid<double>& grid, const PositivityIntervals& ivs) {
  CsvWriter csv({"kind", "alpha", "beta"});
  for (const auto& iv : ivs.intervals)
    csv.row({iv.closed_open ? "closed_open" : "open", format_real(grid.time(iv.alpha)),
             format_real(grid.time(iv.beta))});
  return csv.str();
}

std::string key_value_lines(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

LoadedPath read_path_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read path file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty path file " + path.string());
  std::vector<double> t, y;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected t,value");
    try {
      t.push_back(std::stod(line.substr(0, comma)));
      y.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  LoadedPath out;
  out.times = std::move(t);
  out.values = Eigen::Map<const Vector<double>>(y.data(), static_cast<Eigen::Index>(y.size()));
  return out;
}

}  // namespace fcir::io
