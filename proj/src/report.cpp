#include "agepop/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agepop {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("csv table needs a header");
}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("csv row width does not match the header");
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (const double* d = std::get_if<double>(&row[i]); d && !std::isfinite(*d)) {
      throw std::invalid_argument("non-finite value in column '" + header_[i] + "'");
    }
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out << format_real(v);
            } else {
              out << v;
            }
          },
          row[i]);
    }
    out << '\n';
  }
  return out.str();
}

void CsvTable::write(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << str();
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

CheckRow check_le(std::string name, double observed, double tolerance) {
  // NaN compares false, so a non-finite observation fails.
  return CheckRow{std::move(name), observed, tolerance, observed <= tolerance};
}

bool Report::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

CsvTable Report::summary() const {
  CsvTable t({"check", "observed", "tolerance", "pass"});
  for (const auto& c : checks) {
    // Non-finite observations are spelled out rather than rejected so that
    // a failing check still lands in the summary.
    CsvTable::Cell obs = std::isfinite(c.observed) ? CsvTable::Cell(c.observed) : CsvTable::Cell(format_real(c.observed));
    t.add_row({c.check, obs, c.tolerance, std::string(c.pass ? "true" : "false")});
  }
  return t;
}

void Report::append(Report other) {
  for (auto& t : other.tables) tables.push_back(std::move(t));
  for (auto& c : other.checks) checks.push_back(std::move(c));
  runtime_seconds += other.runtime_seconds;
}

void Report::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [file, table] : tables) table.write(dir / file);
  summary().write(dir / "summary.csv");
}

void Report::write_runtime(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  CsvTable t({"experiment", "seconds"});
  t.add_row({name, runtime_seconds});
  t.write(dir / "runtime.csv");
}

}  // namespace agepop
