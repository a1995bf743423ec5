#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tssc/chaotic_maps.hpp"

namespace tssc {

// Ordinal order of a triad: the 1-based indices of its values listed in
// ascending value order. Six orders exist; ties fall back to ascending
// index (stable sort), so e.g. (1, 1, 2) reads as 123.
enum class OrdinalPattern : std::uint8_t {
  P123 = 0,
  P132,
  P213,
  P231,
  P312,
  P321,
};

inline constexpr int kPatternCount = 6;

// Digit form of the pattern, e.g. P231 -> 231.
int pattern_code(OrdinalPattern p);
const char* pattern_name(OrdinalPattern p);

// One triad (x_t, x_{t+1}, x_{t+2}) mapped to the polar plane of its
// consecutive differences.
struct TriadPoint {
  std::size_t t = 0;   // source index of the triad's first element
  double dx = 0.0;     // x_{t+1} - x_t
  double dy = 0.0;     // x_{t+2} - x_{t+1}
  double radius = 0.0; // sqrt(dx^2 + dy^2)
  double theta = 0.0;  // in [-pi, pi); 0 when radius is 0
  OrdinalPattern pattern = OrdinalPattern::P123;
};

struct BandtPompeDistribution {
  std::array<double, kPatternCount> probs{};
  std::size_t count = 0;  // number of triads tallied

  double prob(OrdinalPattern p) const { return probs[static_cast<int>(p)]; }
};

OrdinalPattern ordinal_pattern(double x1, double x2, double x3);

// All N-2 triads of the series in source order. Requires N >= 3.
std::vector<TriadPoint> triad_sequence(const TimeSeries& ts);

// Empirical distribution of ordinal patterns over all triads.
BandtPompeDistribution bandt_pompe(const TimeSeries& ts);

// Shannon entropy -sum p ln p over p > 0; divided by ln 6 if normalized.
double permutation_entropy(const BandtPompeDistribution& d, bool normalized);

// Fraction of points with theta within half_width of +pi/2 or -pi/2.
// half_width must lie in (0, pi/4); the sequence must be nonempty.
double forbidden_band_fraction(std::span<const TriadPoint> points,
                               double half_width);

}  // namespace tssc
