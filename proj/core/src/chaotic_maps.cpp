#include "tssc/chaotic_maps.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tssc/errors.hpp"

namespace tssc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void step_logistic(const MapSpec&, const double* s, const double* p, double* n) {
  const double r = p[0];
  n[0] = r * s[0] * (1.0 - s[0]);
}

// x_{t+1} = A x_t + B (mod C); A and B are fixed, C is the control
// parameter. Exact for integral inputs below 2^53.
void step_lcg(const MapSpec&, const double* s, const double* p, double* n) {
  const double a = 7141.0;
  const double b = 54773.0;
  n[0] = positive_mod(a * s[0] + b, p[0]);
}

void step_skew_tent(const MapSpec&, const double* s, const double* p, double* n) {
  const double w = p[0];
  n[0] = s[0] <= w ? s[0] / w : (1.0 - s[0]) / (1.0 - w);
}

void step_lozi(const MapSpec&, const double* s, const double* p, double* n) {
  const double a = p[0];
  const double b = p[1];
  n[0] = 1.0 - a * std::fabs(s[0]) + b * s[1];
  n[1] = s[0];
}

// y is advanced first; x uses the updated y.
void step_dissipative_standard(const MapSpec&, const double* s, const double* p,
                               double* n) {
  const double b = p[0];
  const double k = p[1];
  n[1] = positive_mod(b * s[1] + k * std::sin(s[0]), kTwoPi);
  n[0] = positive_mod(s[0] + n[1], kTwoPi);
}

void step_sinai(const MapSpec&, const double* s, const double* p, double* n) {
  const double delta = p[0];
  n[0] = positive_mod(s[0] + s[1] + delta * std::cos(kTwoPi * s[1]), 1.0);
  n[1] = positive_mod(s[0] + 2.0 * s[1], 1.0);
}

void step_arnold_cat(const MapSpec&, const double* s, const double* p, double* n) {
  const double k = p[0];
  n[0] = positive_mod(s[0] + s[1], 1.0);
  n[1] = positive_mod(s[0] + k * s[1], 1.0);
}

void step_chirikov_standard(const MapSpec&, const double* s, const double* p,
                            double* n) {
  const double k = p[0];
  n[1] = positive_mod(s[1] + k * std::sin(s[0]), kTwoPi);
  n[0] = positive_mod(s[0] + n[1], kTwoPi);
}

void step_chaotic_web(const MapSpec& spec, const double* s, const double* p,
                      double* n) {
  const double k = p[0];
  const double ca = std::cos(spec.web_alpha);
  const double sa = std::sin(spec.web_alpha);
  const double u = s[1] + k * std::sin(s[0]);
  n[0] = s[0] * ca - u * sa;
  n[1] = s[0] * sa + u * ca;
}

std::array<MapSpec, kMapCount> make_registry() {
  const double half_pi = std::numbers::pi / 2.0;
  std::array<MapSpec, kMapCount> maps = {{
      {MapId::Logistic,
       "logistic",
       step_logistic,
       {{"r", 3.5, 4.0}},
       {1e-6}},
      {MapId::LinearCongruential,
       "lcg",
       step_lcg,
       {{"C", 259200.0, 600000.0}},
       {0.0}},
      {MapId::SkewTent,
       "skew_tent",
       step_skew_tent,
       {{"w", 0.11, 0.9}},
       {0.1}},
      {MapId::Lozi,
       "lozi",
       step_lozi,
       {{"a", 1.6, 1.8}, {"b", 0.4, 0.6}},
       {-0.1, 0.1}},
      {MapId::DissipativeStandard,
       "dissipative_standard",
       step_dissipative_standard,
       {{"b", 0.1, 1.0}, {"k", 1.0, 10.0}},
       {0.1, 0.1}},
      {MapId::Sinai,
       "sinai",
       step_sinai,
       {{"delta", 0.1, 1.0}},
       {0.9, 0.5}},
      {MapId::ArnoldCat,
       "arnold_cat",
       step_arnold_cat,
       {{"k", 1.0, 10.0}},
       {0.0, 1.0 / std::numbers::sqrt2}},
      {MapId::ChirikovStandard,
       "chirikov_standard",
       step_chirikov_standard,
       {{"k", 1.0, 5.0}},
       {0.0, 6.0}},
      {MapId::ChaoticWeb,
       "chaotic_web",
       step_chaotic_web,
       {{"k", 1.0, 5.0}},
       {0.0, 3.0}},
  }};
  maps[static_cast<int>(MapId::ChaoticWeb)].web_alpha = half_pi;
  maps[static_cast<int>(MapId::Lozi)].escape_radius = 10.0;
  return maps;
}

}  // namespace

const std::array<MapSpec, kMapCount>& all_maps() {
  static const std::array<MapSpec, kMapCount> registry = make_registry();
  return registry;
}

const MapSpec& map_spec(MapId id) { return all_maps()[static_cast<int>(id)]; }

double positive_mod(double v, double m) {
  double r = std::fmod(v, m);
  if (r < 0.0) r += m;
  if (r >= m) r = 0.0;  // rounding of r + m can land exactly on m
  return r;
}

TimeSeries iterate_map(const MapSpec& spec, const std::vector<double>& params,
                       const std::vector<double>& ic, std::size_t n) {
  if (params.size() != spec.param_ranges.size()) {
    throw std::domain_error(std::string(spec.name) + ": expected " +
                            std::to_string(spec.param_ranges.size()) +
                            " parameter(s), got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamRange& r = spec.param_ranges[i];
    // Sampling grids are half-open, but evaluation admits the closed
    // interval: the reference parameter sets (logistic r = 4.0) sit on
    // the upper endpoint.
    if (!(params[i] >= r.lo && params[i] <= r.hi)) {
      std::ostringstream msg;
      msg << spec.name << ": parameter " << r.name << "=" << params[i]
          << " outside [" << r.lo << ", " << r.hi << "]";
      throw std::domain_error(msg.str());
    }
  }
  if (ic.size() != spec.dimension()) {
    throw std::domain_error(std::string(spec.name) + ": initial condition has " +
                            std::to_string(ic.size()) + " coordinates, expected " +
                            std::to_string(spec.dimension()));
  }
  if (n < 1) throw std::domain_error("iterate_map: n must be >= 1");

  TimeSeries ts;
  ts.map_id = spec.id;
  ts.params = params;
  ts.ic = ic;
  ts.values.resize(n);

  double state[2] = {0.0, 0.0};
  double next[2] = {0.0, 0.0};
  const std::size_t dim = spec.dimension();
  for (std::size_t d = 0; d < dim; ++d) state[d] = ic[d];

  ts.values[0] = state[spec.observed_coordinate];
  for (std::size_t t = 1; t < n; ++t) {
    spec.recurrence(spec, state, params.data(), next);
    bool escaped = false;
    for (std::size_t d = 0; d < dim; ++d) {
      if (!std::isfinite(next[d])) {
        throw NumericError(std::string(spec.name) + ": non-finite iterate at step " +
                           std::to_string(t));
      }
      if (spec.escape_radius > 0.0 && std::fabs(next[d]) > spec.escape_radius) {
        escaped = true;
      }
    }
    if (escaped) {
      for (std::size_t d = 0; d < dim; ++d) state[d] = ic[d];
    } else {
      for (std::size_t d = 0; d < dim; ++d) state[d] = next[d];
    }
    ts.values[t] = state[spec.observed_coordinate];
  }
  return ts;
}

TimeSeries normalize_series(const TimeSeries& ts) {
  if (ts.values.empty()) throw std::domain_error("normalize_series: empty series");

  double lo = ts.values[0];
  double hi = ts.values[0];
  for (double v : ts.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  TimeSeries out = ts;
  if (hi == lo) {
    for (double& v : out.values) v = 0.0;
    return out;
  }
  const double span = hi - lo;
  for (double& v : out.values) v = 2.0 * (v - lo) / span - 1.0;
  return out;
}

std::vector<double> perturb_ic(const MapSpec& spec, double width, Rng& rng) {
  if (width < 0.0) throw std::domain_error("perturb_ic: negative width");
  std::vector<double> ic = spec.base_ic;
  const double c0 = ic[spec.observed_coordinate];
  ic[spec.observed_coordinate] = c0 + width * rng.uniform01();
  return ic;
}

}  // namespace tssc
