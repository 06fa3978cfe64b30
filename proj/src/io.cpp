#include "mtlen/io.hpp"

#include "mtlen/config.hpp"
#include "mtlen/errors.hpp"

namespace mtlen {

TableWriter::TableWriter(const std::filesystem::path& path, std::vector<std::string> columns)
    : path_(path), out_(path), width_(columns.size()) {
  if (!out_) throw Error(ErrorKind::Io, "cannot write " + path.string());
  raw_row(columns);
}

TableWriter& TableWriter::row(std::initializer_list<double> values) {
  return row(std::vector<double>(values));
}

TableWriter& TableWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  return raw_row(cells);
}

TableWriter& TableWriter::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) {
    throw Error(ErrorKind::InvalidArgument, "row width does not match header of " + path_.string());
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) throw Error(ErrorKind::Io, "write failed for " + path_.string());
  return *this;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory " + dir.string());
  }
}

void write_histogram(const std::filesystem::path& path, const Histogram& h) {
  TableWriter w(path, {"bin_left", "bin_right", "count"});
  for (std::size_t i = 0; i < h.count.size(); ++i) {
    w.row({h.left[i], h.right[i], static_cast<double>(h.count[i])});
  }
}

void write_band(const std::filesystem::path& path, const Band& band, const std::string& value_unit) {
  const std::string u = "[" + value_unit + "]";
  TableWriter w(path, {"t[min]", "mean" + u, "q25" + u, "q75" + u});
  for (std::size_t i = 0; i < band.t.size(); ++i) {
    w.row({band.t[i], band.mean[i], band.q25[i], band.q75[i]});
  }
}

void write_trace(const std::filesystem::path& path, const SimulationTrace& trace) {
  const auto& tr = trace.trace;
  TableWriter w(path, {"t[min]", "mt", "x_minus[um]", "x_plus[um]", "length[um]", "phase_plus",
                       "phase_minus"});
  const auto n = static_cast<std::size_t>(tr.n_mt);
  auto phase = [](EndPhase p) { return p == EndPhase::Growth ? std::string("g") : std::string("s"); };
  for (std::size_t f = 0; f < tr.frames(); ++f) {
    const std::string t = format_double(tr.t[f]);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = f * n + i;
      w.raw_row({t, std::to_string(i), format_double(tr.x_minus[k]), format_double(tr.x_plus[k]),
                 format_double(tr.x_plus[k] - tr.x_minus[k]), phase(tr.phase_plus[k]),
                 phase(tr.phase_minus[k])});
    }
  }
}

void write_turnover(const std::filesystem::path& path, const std::vector<double>& t_since,
                    const std::vector<double>& values) {
  TableWriter w(path, {"t_since_pc[min]", "relative_fluorescence[1]"});
  for (std::size_t i = 0; i < t_since.size(); ++i) w.row({t_since[i], values[i]});
}

}  // namespace mtlen
