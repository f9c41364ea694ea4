#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace agepop {

/// 17 significant digits, '.' decimal point.
std::string format_real(double v);

class CsvTable {
 public:
  using Cell = std::variant<std::string, double, long long>;

  explicit CsvTable(std::vector<std::string> header);

  /// Throws std::invalid_argument on a width mismatch or a non-finite number.
  void add_row(std::vector<Cell> row);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  std::string str() const;
  void write(const std::filesystem::path& file) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// A check passes iff observed <= tolerance, so the summary can be
/// re-derived from its own cells.
struct CheckRow {
  std::string check;
  double observed = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

CheckRow check_le(std::string name, double observed, double tolerance);

struct Report {
  std::string name;
  std::vector<std::pair<std::string, CsvTable>> tables;  // file name, table
  std::vector<CheckRow> checks;
  double runtime_seconds = 0.0;

  bool all_pass() const;
  CsvTable summary() const;
  void append(Report other);

  /// Writes every table plus summary.csv into dir. Runtimes are kept out of
  /// these files so they stay reproducible; see write_runtime.
  void write(const std::filesystem::path& dir) const;
  void write_runtime(const std::filesystem::path& dir) const;
};

}  // namespace agepop
