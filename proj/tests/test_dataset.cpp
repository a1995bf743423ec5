#include "tssc/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "tssc/errors.hpp"

using namespace tssc;

namespace {

bool records_equal(const Record& a, const Record& b) {
  return a.label == b.label && a.param_index == b.param_index &&
         a.series.map_id == b.series.map_id && a.series.segment == b.series.segment &&
         a.series.params == b.series.params && a.series.ic == b.series.ic &&
         a.series.values == b.series.values;
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.slices.size() != b.slices.size()) return false;
  for (std::size_t s = 0; s < a.slices.size(); ++s) {
    for (Quadrant q : {Quadrant::Base, Quadrant::Dp, Quadrant::NsSp, Quadrant::NsDp}) {
      const auto& qa = a.slices[s].quadrant(q);
      const auto& qb = b.slices[s].quadrant(q);
      if (qa.size() != qb.size()) return false;
      for (std::size_t i = 0; i < qa.size(); ++i) {
        if (!records_equal(qa[i], qb[i])) return false;
      }
    }
  }
  return true;
}

DatasetConfig tiny_config() {
  DatasetConfig cfg;
  cfg.params_per_map = 4;
  cfg.slices = 2;
  cfg.series_len = 40;
  cfg.ic_width = 0.2;
  cfg.master_seed = 99;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("evenly spaced parameter grids") {
  SUBCASE("one-parameter map") {
    const auto params = sample_control_params(map_spec(MapId::Logistic), 4);
    REQUIRE(params.size() == 4);
    CHECK(params[0] == std::vector<double>{3.5});
    CHECK(params[1] == std::vector<double>{3.625});
    CHECK(params[2] == std::vector<double>{3.75});
    CHECK(params[3] == std::vector<double>{3.875});
  }

  SUBCASE("two-parameter map uses an offset-free square grid") {
    const auto params = sample_control_params(map_spec(MapId::Lozi), 4);
    REQUIRE(params.size() == 4);
    const double want[4][2] = {{1.6, 0.4}, {1.6, 0.5}, {1.7, 0.4}, {1.7, 0.5}};
    for (int j = 0; j < 4; ++j) {
      CHECK(params[j][0] == doctest::Approx(want[j][0]).epsilon(1e-12));
      CHECK(params[j][1] == doctest::Approx(want[j][1]).epsilon(1e-12));
    }
  }

  SUBCASE("half-open range: all values distinct, maximum below hi") {
    for (MapId id : {MapId::Logistic, MapId::SkewTent, MapId::ArnoldCat}) {
      const auto& spec = map_spec(id);
      const auto params = sample_control_params(spec, 1024);
      std::set<double> seen;
      for (const auto& p : params) {
        CHECK(p[0] < spec.param_ranges[0].hi);
        CHECK(p[0] >= spec.param_ranges[0].lo);
        seen.insert(p[0]);
      }
      CHECK(seen.size() == 1024);
    }
  }

  SUBCASE("non-square sample count rejected for 2-parameter maps") {
    CHECK_THROWS_AS(sample_control_params(map_spec(MapId::Lozi), 6), ConfigError);
    CHECK_THROWS_AS(sample_control_params(map_spec(MapId::Lozi), 1), ConfigError);
  }
}

TEST_CASE("random parameter sampling stays in range") {
  Rng rng(5);
  const auto& spec = map_spec(MapId::DissipativeStandard);
  const auto params = sample_control_params_random(spec, 64, rng);
  REQUIRE(params.size() == 64);
  for (const auto& p : params) {
    CHECK(p[0] >= 0.1);
    CHECK(p[0] < 1.0);
    CHECK(p[1] >= 1.0);
    CHECK(p[1] < 10.0);
  }
}

TEST_CASE("desk-scale quadrant bookkeeping") {
  DatasetConfig cfg;
  cfg.params_per_map = 64;
  cfg.slices = 1;
  cfg.series_len = 2000;
  cfg.master_seed = 1;
  const Dataset ds = build_dataset(cfg);

  REQUIRE(ds.slices.size() == 1);
  const QuadrantSet& qs = ds.slices[0];
  for (Quadrant q : {Quadrant::Base, Quadrant::Dp, Quadrant::NsSp, Quadrant::NsDp}) {
    CHECK(qs.quadrant(q).size() == 288);  // 9 * 64 / 2
    for (const Record& r : qs.quadrant(q)) {
      CHECK(r.series.values.size() == 1000);
      for (double v : r.series.values) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
      }
    }
  }

  SUBCASE("label balance: 32 series per map per quadrant") {
    for (Quadrant q : {Quadrant::Base, Quadrant::Dp}) {
      std::array<int, kMapCount> counts{};
      for (const Record& r : qs.quadrant(q)) ++counts[r.label];
      for (int c : counts) CHECK(c == 32);
    }
  }

  SUBCASE("BASE and DP parameter indices are disjoint and exhaustive") {
    std::array<std::set<int>, kMapCount> base_idx, dp_idx;
    for (const Record& r : qs.base) base_idx[r.label].insert(r.param_index);
    for (const Record& r : qs.dp) dp_idx[r.label].insert(r.param_index);
    for (int m = 0; m < kMapCount; ++m) {
      std::set<int> all;
      all.insert(base_idx[m].begin(), base_idx[m].end());
      all.insert(dp_idx[m].begin(), dp_idx[m].end());
      CHECK(all.size() == 64);
      for (int idx : base_idx[m]) CHECK(idx % 2 == 0);
      for (int idx : dp_idx[m]) CHECK(idx % 2 == 1);
    }
  }

  SUBCASE("base and ns_sp are halves of one underlying series") {
    for (std::size_t i : {std::size_t{0}, std::size_t{100}, std::size_t{287}}) {
      const Record& first = qs.base[i];
      const Record& second = qs.ns_sp[i];
      CHECK(first.label == second.label);
      CHECK(first.param_index == second.param_index);
      CHECK(first.series.segment == Segment::FirstHalf);
      CHECK(second.series.segment == Segment::SecondHalf);

      // regenerate the full raw series and reproduce both halves
      const MapSpec& spec = all_maps()[first.label];
      const TimeSeries full =
          iterate_map(spec, first.series.params, first.series.ic, 2000);
      TimeSeries lo = full, hi = full;
      lo.values.assign(full.values.begin(), full.values.begin() + 1000);
      hi.values.assign(full.values.begin() + 1000, full.values.end());
      CHECK(normalize_series(lo).values == first.series.values);
      CHECK(normalize_series(hi).values == second.series.values);
    }
  }
}

TEST_CASE("zero ic width makes all slices identical") {
  DatasetConfig cfg = tiny_config();
  cfg.ic_width = 0.0;
  const Dataset ds = build_dataset(cfg);
  REQUIRE(ds.slices.size() == 2);
  for (Quadrant q : {Quadrant::Base, Quadrant::Dp, Quadrant::NsSp, Quadrant::NsDp}) {
    const auto& a = ds.slices[0].quadrant(q);
    const auto& b = ds.slices[1].quadrant(q);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(records_equal(a[i], b[i]));
  }
}

TEST_CASE("same seed rebuilds bit-identically") {
  const Dataset a = build_dataset(tiny_config());
  const Dataset b = build_dataset(tiny_config());
  CHECK(datasets_equal(a, b));

  DatasetConfig other = tiny_config();
  other.master_seed = 100;
  CHECK(!datasets_equal(a, build_dataset(other)));
}

TEST_CASE("config validation") {
  DatasetConfig cfg = tiny_config();
  cfg.params_per_map = 5;
  CHECK_THROWS_AS(build_dataset(cfg), ConfigError);
  cfg = tiny_config();
  cfg.series_len = 41;
  CHECK_THROWS_AS(build_dataset(cfg), ConfigError);
  cfg = tiny_config();
  cfg.slices = 0;
  CHECK_THROWS_AS(build_dataset(cfg), ConfigError);
}

TEST_CASE("TSSD round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "tssc_ds_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "tiny.tssd";

  const Dataset ds = build_dataset(tiny_config());
  write_dataset(ds, path);
  const Dataset back = read_dataset(path);

  CHECK(back.config.params_per_map == ds.config.params_per_map);
  CHECK(back.config.slices == ds.config.slices);
  CHECK(back.config.series_len == ds.config.series_len);
  CHECK(back.config.master_seed == ds.config.master_seed);
  CHECK(back.config.ic_width == ds.config.ic_width);
  CHECK(datasets_equal(ds, back));

  SUBCASE("two writes are byte-identical") {
    const auto path2 = dir / "tiny2.tssd";
    write_dataset(build_dataset(tiny_config()), path2);
    CHECK(slurp(path) == slurp(path2));
  }

  SUBCASE("empty slice list writes a header-only file") {
    Dataset empty;
    empty.config = tiny_config();
    const auto path3 = dir / "empty.tssd";
    write_dataset(empty, path3);
    CHECK(std::filesystem::file_size(path3) == 37);
  }

  SUBCASE("bad magic is a format error") {
    std::string bytes = slurp(path);
    bytes[0] = 'X';
    const auto bad = dir / "bad_magic.tssd";
    std::ofstream(bad, std::ios::binary).write(bytes.data(), bytes.size());
    CHECK_THROWS_AS(read_dataset(bad), FormatError);
  }

  SUBCASE("truncation is a corruption error") {
    std::string bytes = slurp(path);
    bytes.resize(bytes.size() - 3);
    const auto bad = dir / "truncated.tssd";
    std::ofstream(bad, std::ios::binary).write(bytes.data(), bytes.size());
    CHECK_THROWS_AS(read_dataset(bad), CorruptionError);
  }

  SUBCASE("a flipped payload byte yields an unequal dataset") {
    std::string bytes = slurp(path);
    bytes[bytes.size() - 5] ^= 0x40;  // inside the last record's values
    const auto bad = dir / "flipped.tssd";
    std::ofstream(bad, std::ios::binary).write(bytes.data(), bytes.size());
    bool detected = false;
    try {
      detected = !datasets_equal(ds, read_dataset(bad));
    } catch (const std::exception&) {
      detected = true;
    }
    CHECK(detected);
  }
}

TEST_CASE("paper-scale D0 counts: 9216 series, 4608 per quadrant") {
  DatasetConfig cfg;
  cfg.params_per_map = 1024;
  cfg.slices = 1;
  cfg.series_len = 2000;
  cfg.master_seed = 3;
  const Dataset ds = build_dataset(cfg);
  REQUIRE(ds.slices.size() == 1);
  std::size_t full_series = 0;
  for (Quadrant q : {Quadrant::Base, Quadrant::Dp, Quadrant::NsSp, Quadrant::NsDp}) {
    const auto& records = ds.slices[0].quadrant(q);
    CHECK(records.size() == 4608);
    CHECK(records.front().series.values.size() == 1000);
    full_series += records.size();
  }
  CHECK(full_series / 2 == 9216);  // two half-series per full series
}

TEST_CASE("canonical dataset configs") {
  const DatasetConfig d0 = desk_dataset_config(0, 7);
  CHECK(d0.params_per_map == 64);
  CHECK(d0.slices == 1);
  CHECK(d0.ic_width == 0.0);

  const DatasetConfig d3 = desk_dataset_config(3, 7);
  CHECK(d3.slices == 2);
  CHECK(d3.ic_width == doctest::Approx(0.3));
  CHECK(d3.master_seed != d0.master_seed);

  const DatasetConfig p5 = paper_dataset_config(5, 7);
  CHECK(p5.params_per_map == 1024);
  CHECK(p5.slices == 32);
  CHECK(p5.ic_width == doctest::Approx(0.5));

  CHECK_THROWS_AS(desk_dataset_config(6, 7), ConfigError);
}
