#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tssc/chaotic_maps.hpp"

namespace tssc {

// Configuration of one benchmark dataset D_i. The paper-scale values are
// params_per_map = 1024, series_len = 2000, slices = 1 for D0 and 32 for
// D1..D5, ic_width = 0.1 * i.
struct DatasetConfig {
  std::uint32_t params_per_map = 1024;
  std::uint32_t slices = 1;
  std::uint32_t series_len = 2000;
  double ic_width = 0.0;
  std::uint64_t master_seed = 0;
  // Evenly spaced parameter grids by default; random uniform draws when
  // set (reconstructed from master_seed on read).
  bool random_params = false;
};

enum class Quadrant : std::uint8_t { Base = 0, Dp = 1, NsSp = 2, NsDp = 3 };

const char* quadrant_name(Quadrant q);

// One labeled half-series. param_index addresses the map's full sampled
// parameter grid, so parameters are reconstructible without storing them.
struct Record {
  TimeSeries series;
  std::uint8_t label = 0;
  std::uint16_t param_index = 0;
};

// The four segmented quadrants of one slice. base/ns_sp hold the first and
// second halves of the even-grid-index series, dp/ns_dp those of the odd.
struct QuadrantSet {
  std::vector<Record> base;
  std::vector<Record> dp;
  std::vector<Record> ns_sp;
  std::vector<Record> ns_dp;

  const std::vector<Record>& quadrant(Quadrant q) const;
  std::vector<Record>& quadrant(Quadrant q);
};

struct Dataset {
  DatasetConfig config;
  std::vector<QuadrantSet> slices;
};

// Evenly spaced parameter samples over the closed-open ranges: m values
// lo + j(hi-lo)/m for one-parameter maps, the sqrt(m) x sqrt(m) grid for
// two-parameter maps (m must then be a perfect square).
std::vector<std::vector<double>> sample_control_params(const MapSpec& spec,
                                                       std::size_t m);

// Uniform random draws instead of the grid; same shapes and ordering.
std::vector<std::vector<double>> sample_control_params_random(const MapSpec& spec,
                                                              std::size_t m,
                                                              Rng& rng);

// Builds all slices: per slice one IC draw per map, params_per_map series
// per map, each split at the midpoint with both halves normalized
// independently to [-1, 1].
Dataset build_dataset(const DatasetConfig& cfg);

// TSSD container, little-endian throughout. Layout:
//   magic "TSSD", version u16,
//   map_count u16, params_per_map u32, slices u32, series_len u32,
//   master_seed u64, ic_width f64, sampling u8 (0 grid / 1 random);
// then one record per series half until EOF:
//   label u8, quadrant u8, slice u16, param_index u16,
//   ic f64 x state-dimension(label), values f64 x series_len/2.
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

// Canonical configurations for dataset D_i (i in 0..5). Desk scale: 64
// params per map and 2 slices; paper scale: 1024 and 32. The per-dataset
// seed is derived from `seed` and i.
DatasetConfig desk_dataset_config(int i, std::uint64_t seed);
DatasetConfig paper_dataset_config(int i, std::uint64_t seed);

}  // namespace tssc
