#include "tssc/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "tssc/errors.hpp"
#include "tssc/rng.hpp"

using namespace tssc;

namespace {

TriadPoint at(double x, double y) {
  TriadPoint p;
  p.radius = std::sqrt(x * x + y * y);
  p.theta = std::atan2(y, x);
  if (p.radius == 0.0) p.theta = 0.0;
  return p;
}

TimeSeries series(std::vector<double> v) {
  TimeSeries ts;
  ts.values = std::move(v);
  return ts;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("single point normalizes to one full cell") {
  const std::vector<TriadPoint> pts = {at(0.0, 0.0)};
  const HeatMap hm = tssc_heatmap(pts, 8);
  int full = 0;
  for (double c : hm.cells) {
    if (c == 1.0) ++full;
    else CHECK(c == 0.0);
  }
  CHECK(full == 1);
  CHECK(hm.cell(4, 4) == 1.0);  // (0,0) falls in the lower-inclusive cell
}

TEST_CASE("max normalization keeps count ratios") {
  // two points in one cell, one in another
  const std::vector<TriadPoint> pts = {at(0.01, 0.01), at(0.02, 0.02), at(1.5, 1.5)};
  const HeatMap hm = tssc_heatmap(pts, 8);
  int ones = 0, halves = 0;
  for (double c : hm.cells) {
    if (c == 1.0) ++ones;
    if (c == 0.5) ++halves;
  }
  CHECK(ones == 1);
  CHECK(halves == 1);
}

TEST_CASE("upper bound clamps into the last cell") {
  const std::vector<TriadPoint> pts = {at(2.0, 0.0)};
  const HeatMap hm = tssc_heatmap(pts, 8);
  std::uint64_t total = 0;
  for (auto c : hm.raw_counts) total += c;
  CHECK(total == 1);
  CHECK(hm.count(4, 7) == 1);  // y = 0 -> row 4, x = 2.0 -> clamped column 7
}

TEST_CASE("total-count normalization option") {
  const std::vector<TriadPoint> pts = {at(0.01, 0.01), at(0.02, 0.02), at(1.5, 1.5)};
  const HeatMap hm = tssc_heatmap(pts, 8, CellNormalization::TotalCount);
  double sum = 0.0;
  for (double c : hm.cells) sum += c;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tssc precondition failures") {
  CHECK_THROWS_AS(tssc_heatmap({}, 8), std::domain_error);
  const std::vector<TriadPoint> pts = {at(0.0, 0.0)};
  CHECK_THROWS_AS(tssc_heatmap(pts, 1), std::domain_error);
}

TEST_CASE("dcr heatmap of crafted series") {
  SUBCASE("constant series concentrates in the center cell") {
    const HeatMap hm = dcr_heatmap(series({0.0, 0.0, 0.0}), 8);
    CHECK(hm.count(4, 4) == 2);
    CHECK(hm.cell(4, 4) == 1.0);
  }

  SUBCASE("alternating series fills two cells at ratio 2:1") {
    // pairs: (-1,1), (1,-1), (-1,1)
    const HeatMap hm = dcr_heatmap(series({-1.0, 1.0, -1.0, 1.0}), 8);
    CHECK(hm.count(7, 0) == 2);
    CHECK(hm.cell(7, 0) == 1.0);
    CHECK(hm.count(0, 7) == 1);
    CHECK(hm.cell(0, 7) == 0.5);
  }

  SUBCASE("series on the identity line populates only diagonal cells") {
    for (double c : {-0.9, -0.3, 0.2, 0.8}) {
      const HeatMap hm = dcr_heatmap(series({c, c, c, c}), 16);
      for (int iy = 0; iy < 16; ++iy) {
        for (int ix = 0; ix < 16; ++ix) {
          if (hm.count(iy, ix) > 0) CHECK(iy == ix);
        }
      }
    }
  }

  SUBCASE("too-short series is a domain error") {
    CHECK_THROWS_AS(dcr_heatmap(series({0.5}), 8), std::domain_error);
  }
}

TEST_CASE("mass conservation and rebin determinism") {
  Rng rng(31);
  std::vector<TriadPoint> pts;
  for (int i = 0; i < 5000; ++i) {
    pts.push_back(at(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)));
  }
  const HeatMap a = tssc_heatmap(pts, 64);
  const HeatMap b = tssc_heatmap(pts, 64);
  CHECK(a.raw_counts == b.raw_counts);

  std::uint64_t total = 0;
  for (auto c : a.raw_counts) total += c;
  CHECK(total == pts.size());
}

TEST_CASE("duplicating every point leaves cells unchanged") {
  Rng rng(37);
  std::vector<TriadPoint> pts;
  for (int i = 0; i < 800; ++i) {
    pts.push_back(at(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)));
  }
  std::vector<TriadPoint> tripled;
  for (int k = 0; k < 3; ++k) tripled.insert(tripled.end(), pts.begin(), pts.end());

  const HeatMap a = tssc_heatmap(pts, 32);
  const HeatMap b = tssc_heatmap(tripled, 32);
  CHECK(a.cells == b.cells);
}

TEST_CASE("normalized series never leaves the tssc bounds") {
  Rng rng(41);
  TimeSeries ts;
  for (int i = 0; i < 4000; ++i) ts.values.push_back(rng.uniform(-1.0, 1.0));
  const auto pts = triad_sequence(ts);
  const HeatMap hm = tssc_heatmap(pts, 64);
  std::uint64_t total = 0;
  for (auto c : hm.raw_counts) total += c;
  CHECK(total == pts.size());
}

TEST_CASE("pgm export layout") {
  const auto dir = std::filesystem::temp_directory_path() / "tssc_hm_test";
  std::filesystem::create_directories(dir);

  SUBCASE("all-zero map is all black") {
    HeatMap hm;
    hm.grid_size = 16;
    hm.lo = -2.0;
    hm.hi = 2.0;
    hm.raw_counts.assign(256, 0);
    hm.cells.assign(256, 0.0);
    const auto path = dir / "zero.pgm";
    export_pgm(hm, path);
    const std::string bytes = slurp(path);
    const std::string header = "P5\n16 16\n255\n";
    REQUIRE(bytes.size() == header.size() + 256);
    CHECK(bytes.substr(0, header.size()) == header);
    for (std::size_t i = header.size(); i < bytes.size(); ++i) {
      CHECK(bytes[i] == '\0');
    }
  }

  SUBCASE("single saturated cell, top-row-is-max-y orientation") {
    const std::vector<TriadPoint> pts = {at(-1.9, 1.9)};  // top-left of the image
    const HeatMap hm = tssc_heatmap(pts, 64);
    const auto path = dir / "one.pgm";
    export_pgm(hm, path);
    const std::string bytes = slurp(path);
    const std::string header = "P5\n64 64\n255\n";
    REQUIRE(bytes.size() == header.size() + 64 * 64);
    CHECK(bytes.substr(0, header.size()) == header);
    int saturated = 0;
    std::size_t where = 0;
    for (std::size_t i = header.size(); i < bytes.size(); ++i) {
      if (static_cast<unsigned char>(bytes[i]) == 255) {
        ++saturated;
        where = i - header.size();
      } else {
        CHECK(bytes[i] == '\0');
      }
    }
    CHECK(saturated == 1);
    CHECK(where / 64 == 1);  // y=1.9 is one row below the top
    CHECK(where % 64 == 1);  // x=-1.9 is one column in from the left
  }

  SUBCASE("csv export shape") {
    const std::vector<TriadPoint> pts = {at(0.0, 0.0)};
    const HeatMap hm = tssc_heatmap(pts, 8);
    const auto path = dir / "cells.csv";
    export_csv(hm, path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
      CHECK(std::count(line.begin(), line.end(), ',') == 7);
      ++rows;
    }
    CHECK(rows == 8);
  }
}
