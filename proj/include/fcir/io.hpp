#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fcir/grid.hpp"
#include "fcir/zeroset.hpp"

namespace fcir::io {

/// 17 significant digits, as used by every CSV.
std::string format_real(double x);

/// Write to `path.tmp` and rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(const std::vector<std::string>& cells);
  const std::string& str() const noexcept { return text_; }
  void save(const std::filesystem::path& path) const { write_file_atomic(path, text_); }

 private:
  std::size_t columns_;
  std::string text_;
};

/// `t,<column>` with one row per node.
std::string path_csv(const Grid<double>& grid, const Vector<double>& values, std::string_view column);

/// Two-column figure data `t,lhs,rhs` over the first `values` nodes.
std::string figure_csv(const Grid<double>& grid, const Vector<double>& lhs, const Vector<double>& rhs);

/// `kind,alpha,beta` with kind in {closed_open, open}; endpoints as times.
std::string intervals_csv(const Grid<double>& grid, const PositivityIntervals& ivs);

/// key=value lines in the given order.
std::string key_value_lines(const std::vector<std::pair<std::string, std::string>>& entries);

struct LoadedPath {
  std::vector<double> times;
  Vector<double> values;
};

/// Read a two-column `t,<name>` CSV written by path_csv.
LoadedPath read_path_csv(const std::filesystem::path& path);

}  // namespace fcir::io
