#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tssc/rng.hpp"

namespace tssc {

// The nine discrete chaotic maps used to generate surrogate series.
// The enumerator order defines the class labels 0..8.
enum class MapId : std::uint8_t {
  Logistic = 0,
  LinearCongruential,
  SkewTent,
  Lozi,
  DissipativeStandard,
  Sinai,
  ArnoldCat,
  ChirikovStandard,
  ChaoticWeb,
};

inline constexpr int kMapCount = 9;

enum class Segment : std::uint8_t { Full = 0, FirstHalf = 1, SecondHalf = 2 };

// Closed-open parameter interval [lo, hi).
struct ParamRange {
  const char* name;
  double lo;
  double hi;
};

struct MapSpec;

// One update of the map: reads `state` and `params`, writes `next`.
// state and next may not alias.
using MapStepFn = void (*)(const MapSpec&, const double* state,
                           const double* params, double* next);

struct MapSpec {
  MapId id;
  const char* name;
  MapStepFn recurrence;
  std::vector<ParamRange> param_ranges;
  std::vector<double> base_ic;
  // Which state coordinate is emitted as the scalar series; 0 (the x
  // coordinate) for every map, including the two-dimensional ones.
  int observed_coordinate = 0;
  // Rotation angle of the chaotic web map. The reference table leaves it
  // unassigned; pi/2 gives the standard four-fold symmetric web.
  double web_alpha = 0.0;
  // Orbits whose coordinates exceed this radius restart from the initial
  // condition. Only the Lozi map needs it: part of its declared parameter
  // rectangle (a + b/2 > 2) has no attractor and the orbit escapes to
  // infinity. Bounded Lozi orbits stay under 1.5, so 10 is decisive.
  double escape_radius = 0.0;  // 0: never

  std::size_t dimension() const { return base_ic.size(); }
};

struct TimeSeries {
  std::vector<double> values;
  MapId map_id = MapId::Logistic;
  std::vector<double> params;
  std::vector<double> ic;
  Segment segment = Segment::Full;

  std::size_t size() const { return values.size(); }
};

const std::array<MapSpec, kMapCount>& all_maps();
const MapSpec& map_spec(MapId id);

// Always-nonnegative remainder, in [0, m). Keeps mod-reduced maps inside
// their fundamental domain regardless of the sign of v.
double positive_mod(double v, double m);

// Iterates the map n-1 times from `ic` and returns the n observed values,
// the first being the initial condition itself. Parameters are accepted
// on the closed interval [lo, hi]; the reference parameter sets use the
// upper endpoints. Throws std::domain_error for out-of-range parameters
// and NumericError if an iterate goes non-finite.
TimeSeries iterate_map(const MapSpec& spec, const std::vector<double>& params,
                       const std::vector<double>& ic, std::size_t n);

// Affine min-max rescaling to [-1, 1]; a constant series maps to all
// zeros.
TimeSeries normalize_series(const TimeSeries& ts);

// Returns base_ic with the observed coordinate replaced by a uniform
// sample from [c0, c0 + width). width 0 returns base_ic unchanged.
std::vector<double> perturb_ic(const MapSpec& spec, double width, Rng& rng);

}  // namespace tssc
