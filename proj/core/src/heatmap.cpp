#include "tssc/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "tssc/errors.hpp"

namespace tssc {

namespace {

int bin_index(double v, double lo, double hi, int grid) {
  const int i = static_cast<int>(std::floor(grid * (v - lo) / (hi - lo)));
  return std::clamp(i, 0, grid - 1);
}

void finalize_cells(HeatMap& hm, CellNormalization norm) {
  std::uint32_t max_count = 0;
  std::uint64_t total = 0;
  for (std::uint32_t c : hm.raw_counts) {
    max_count = std::max(max_count, c);
    total += c;
  }
  const double denom = norm == CellNormalization::MaxCount
                           ? static_cast<double>(max_count)
                           : static_cast<double>(total);
  hm.cells.resize(hm.raw_counts.size());
  for (std::size_t i = 0; i < hm.raw_counts.size(); ++i) {
    hm.cells[i] = denom > 0.0 ? hm.raw_counts[i] / denom : 0.0;
  }
}

}  // namespace

HeatMap tssc_heatmap(std::span<const TriadPoint> points, int grid,
                     CellNormalization norm) {
  if (points.empty()) throw std::domain_error("tssc_heatmap: empty point sequence");
  if (grid < 2) throw std::domain_error("tssc_heatmap: grid must be >= 2");

  HeatMap hm;
  hm.grid_size = grid;
  hm.lo = -2.0;
  hm.hi = 2.0;
  hm.encoder = EncoderKind::Tssc;
  hm.raw_counts.assign(static_cast<std::size_t>(grid) * grid, 0);

  for (const TriadPoint& p : points) {
    const double x = p.radius * std::cos(p.theta);
    const double y = p.radius * std::sin(p.theta);
    const int ix = bin_index(x, hm.lo, hm.hi, grid);
    const int iy = bin_index(y, hm.lo, hm.hi, grid);
    ++hm.raw_counts[static_cast<std::size_t>(iy) * grid + ix];
  }
  finalize_cells(hm, norm);
  return hm;
}

HeatMap dcr_heatmap(const TimeSeries& ts, int grid, CellNormalization norm) {
  if (ts.values.size() < 2) {
    throw std::domain_error("dcr_heatmap: need at least 2 values, got " +
                            std::to_string(ts.values.size()));
  }
  if (grid < 2) throw std::domain_error("dcr_heatmap: grid must be >= 2");

  HeatMap hm;
  hm.grid_size = grid;
  hm.lo = -1.0;
  hm.hi = 1.0;
  hm.encoder = EncoderKind::Dcr;
  hm.raw_counts.assign(static_cast<std::size_t>(grid) * grid, 0);

  for (std::size_t t = 0; t + 1 < ts.values.size(); ++t) {
    const int ix = bin_index(ts.values[t], hm.lo, hm.hi, grid);
    const int iy = bin_index(ts.values[t + 1], hm.lo, hm.hi, grid);
    ++hm.raw_counts[static_cast<std::size_t>(iy) * grid + ix];
  }
  finalize_cells(hm, norm);
  return hm;
}

void export_pgm(const HeatMap& hm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("export_pgm: cannot open " + path.string());

  const int g = hm.grid_size;
  out << "P5\n" << g << " " << g << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(g));
  for (int r = 0; r < g; ++r) {
    const int iy = g - 1 - r;  // top image row = maximum y
    for (int ix = 0; ix < g; ++ix) {
      row[ix] = static_cast<unsigned char>(std::lround(255.0 * hm.cell(iy, ix)));
    }
    out.write(reinterpret_cast<const char*>(row.data()), g);
  }
  if (!out) throw IoError("export_pgm: write failed for " + path.string());
}

void export_csv(const HeatMap& hm, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("export_csv: cannot open " + path.string());

  const int g = hm.grid_size;
  char buf[32];
  for (int r = 0; r < g; ++r) {
    const int iy = g - 1 - r;
    for (int ix = 0; ix < g; ++ix) {
      std::snprintf(buf, sizeof(buf), "%.6g", hm.cell(iy, ix));
      out << buf;
      if (ix + 1 < g) out << ',';
    }
    out << '\n';
  }
  if (!out) throw IoError("export_csv: write failed for " + path.string());
}

}  // namespace tssc
