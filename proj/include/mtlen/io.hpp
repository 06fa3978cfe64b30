#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "mtlen/engine.hpp"
#include "mtlen/observables.hpp"

namespace mtlen {

/// Comma-separated columnar file; the header names each column with its unit.
class TableWriter {
 public:
  TableWriter(const std::filesystem::path& path, std::vector<std::string> columns);

  TableWriter& row(std::initializer_list<double> values);
  TableWriter& row(const std::vector<double>& values);
  TableWriter& raw_row(const std::vector<std::string>& cells);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

void ensure_directory(const std::filesystem::path& dir);

void write_histogram(const std::filesystem::path& path, const Histogram& h);
void write_band(const std::filesystem::path& path, const Band& band, const std::string& value_unit);

/// Long-format trace: one row per (frame, MT).
void write_trace(const std::filesystem::path& path, const SimulationTrace& trace);

void write_turnover(const std::filesystem::path& path, const std::vector<double>& t_since,
                    const std::vector<double>& values);

}  // namespace mtlen
