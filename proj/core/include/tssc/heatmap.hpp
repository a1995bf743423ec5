#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tssc/triad.hpp"

namespace tssc {

enum class EncoderKind : std::uint8_t { Tssc = 0, Dcr = 1 };

// Denominator used to map raw counts to [0, 1]. MaxCount keeps the
// brightest cell at exactly 1.0.
enum class CellNormalization : std::uint8_t { MaxCount = 0, TotalCount = 1 };

// Coarse-grained density of a 2-D point cloud over the fixed square
// [lo, hi]^2. Cells are stored row-major as cells[iy * grid_size + ix]
// with iy = 0 at the LOW edge of the y axis; image exporters flip rows so
// the top image row is maximum y.
struct HeatMap {
  int grid_size = 0;
  double lo = 0.0;
  double hi = 0.0;
  EncoderKind encoder = EncoderKind::Tssc;
  std::vector<std::uint32_t> raw_counts;
  std::vector<double> cells;

  double cell(int iy, int ix) const { return cells[iy * grid_size + ix]; }
  std::uint32_t count(int iy, int ix) const {
    return raw_counts[iy * grid_size + ix];
  }
};

// Bins the triad cloud at Cartesian positions (R cos theta, R sin theta)
// into a grid x grid heat-map over [-2, 2]^2. Lower-edge-inclusive cells;
// points on the upper bound land in the last cell, so no point is lost.
HeatMap tssc_heatmap(std::span<const TriadPoint> points, int grid,
                     CellNormalization norm = CellNormalization::MaxCount);

// Delay-pair cloud (x_t, x_{t+1}) binned over [-1, 1]^2; the series must
// already be normalized to [-1, 1].
HeatMap dcr_heatmap(const TimeSeries& ts, int grid,
                    CellNormalization norm = CellNormalization::MaxCount);

// Binary PGM (P5), maxval 255, pixel = round(255 * cell); row 0 is the top
// of the image (maximum y).
void export_pgm(const HeatMap& hm, const std::filesystem::path& path);

// Cell values as CSV, 6 significant digits, rows in the same top-down
// orientation as the PGM export.
void export_csv(const HeatMap& hm, const std::filesystem::path& path);

}  // namespace tssc
