#include "tssc/triad.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tssc/errors.hpp"

namespace tssc {

namespace {

constexpr int kCodes[kPatternCount] = {123, 132, 213, 231, 312, 321};
constexpr const char* kNames[kPatternCount] = {"123", "132", "213",
                                               "231", "312", "321"};

TriadPoint make_point(std::size_t t, double x1, double x2, double x3) {
  TriadPoint p;
  p.t = t;
  p.dx = x2 - x1;
  p.dy = x3 - x2;
  p.radius = std::sqrt(p.dx * p.dx + p.dy * p.dy);
  if (p.radius == 0.0) {
    p.theta = 0.0;
  } else {
    p.theta = std::atan2(p.dy, p.dx);
    if (p.theta == std::numbers::pi) p.theta = -std::numbers::pi;
  }
  p.pattern = ordinal_pattern(x1, x2, x3);
  return p;
}

}  // namespace

int pattern_code(OrdinalPattern p) { return kCodes[static_cast<int>(p)]; }

const char* pattern_name(OrdinalPattern p) { return kNames[static_cast<int>(p)]; }

OrdinalPattern ordinal_pattern(double x1, double x2, double x3) {
  if (!std::isfinite(x1) || !std::isfinite(x2) || !std::isfinite(x3)) {
    throw NumericError("ordinal_pattern: non-finite triad value");
  }
  // Stable insertion order of the three (value, index) pairs; ties keep
  // ascending index.
  const double v[3] = {x1, x2, x3};
  int idx[3] = {0, 1, 2};
  if (v[idx[1]] < v[idx[0]]) std::swap(idx[0], idx[1]);
  if (v[idx[2]] < v[idx[1]]) {
    std::swap(idx[1], idx[2]);
    if (v[idx[1]] < v[idx[0]]) std::swap(idx[0], idx[1]);
  }
  const int code = (idx[0] + 1) * 100 + (idx[1] + 1) * 10 + (idx[2] + 1);
  for (int i = 0; i < kPatternCount; ++i) {
    if (kCodes[i] == code) return static_cast<OrdinalPattern>(i);
  }
  throw NumericError("ordinal_pattern: unreachable");
}

std::vector<TriadPoint> triad_sequence(const TimeSeries& ts) {
  const std::size_t n = ts.values.size();
  if (n < 3) {
    throw std::domain_error("triad_sequence: need at least 3 values, got " +
                            std::to_string(n));
  }
  std::vector<TriadPoint> points;
  points.reserve(n - 2);
  for (std::size_t t = 0; t + 2 < n; ++t) {
    points.push_back(make_point(t, ts.values[t], ts.values[t + 1], ts.values[t + 2]));
  }
  return points;
}

BandtPompeDistribution bandt_pompe(const TimeSeries& ts) {
  const std::size_t n = ts.values.size();
  if (n < 3) {
    throw std::domain_error("bandt_pompe: need at least 3 values, got " +
                            std::to_string(n));
  }
  std::array<std::size_t, kPatternCount> counts{};
  for (std::size_t t = 0; t + 2 < n; ++t) {
    const OrdinalPattern p =
        ordinal_pattern(ts.values[t], ts.values[t + 1], ts.values[t + 2]);
    ++counts[static_cast<int>(p)];
  }
  BandtPompeDistribution d;
  d.count = n - 2;
  for (int i = 0; i < kPatternCount; ++i) {
    d.probs[i] = static_cast<double>(counts[i]) / static_cast<double>(d.count);
  }
  return d;
}

double permutation_entropy(const BandtPompeDistribution& d, bool normalized) {
  double h = 0.0;
  for (double p : d.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  if (normalized) h /= std::log(6.0);
  return h;
}

double forbidden_band_fraction(std::span<const TriadPoint> points,
                               double half_width) {
  if (points.empty()) {
    throw std::domain_error("forbidden_band_fraction: empty point sequence");
  }
  if (!(half_width > 0.0 && half_width < std::numbers::pi / 4.0)) {
    throw std::domain_error("forbidden_band_fraction: half_width outside (0, pi/4)");
  }
  const double half_pi = std::numbers::pi / 2.0;
  std::size_t in_band = 0;
  for (const TriadPoint& p : points) {
    if (std::fabs(p.theta - half_pi) < half_width ||
        std::fabs(p.theta + half_pi) < half_width) {
      ++in_band;
    }
  }
  return static_cast<double>(in_band) / static_cast<double>(points.size());
}

}  // namespace tssc
