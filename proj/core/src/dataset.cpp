#include "tssc/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "tssc/errors.hpp"

namespace tssc {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'S', 'D'};
constexpr std::uint16_t kVersion = 1;

std::size_t isqrt_exact(std::size_t m) {
  const auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m))));
  return r * r == m ? r : 0;
}

// --- little-endian primitives ---------------------------------------------

template <typename T>
void put(std::string& buf, T v) {
  static_assert(std::is_unsigned_v<T>);
  const auto u = static_cast<std::uint64_t>(v);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  }
  buf.append(bytes, sizeof(T));
}

void put_f64(std::string& buf, double v) {
  put<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  std::size_t offset() const { return off_; }
  bool at_end() const { return off_ == size_; }

  template <typename T>
  T get() {
    static_assert(std::is_unsigned_v<T>);
    need(sizeof(T));
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::uint64_t>(data_[off_ + i]) << (8 * i);
    }
    off_ += sizeof(T);
    return static_cast<T>(u);
  }

  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

 private:
  void need(std::size_t n) {
    if (off_ + n > size_) {
      throw CorruptionError("TSSD: truncated file at byte offset " +
                            std::to_string(size_) + " (needed " +
                            std::to_string(off_ + n) + ")");
    }
  }

  const unsigned char* data_;
  std::size_t size_;
  std::size_t off_ = 0;
};

std::vector<std::vector<double>> param_grid(const MapSpec& spec,
                                            const DatasetConfig& cfg) {
  if (cfg.random_params) {
    Rng rng(derive_seed(cfg.master_seed, 0x9a3a, static_cast<std::uint64_t>(spec.id)));
    return sample_control_params_random(spec, cfg.params_per_map, rng);
  }
  return sample_control_params(spec, cfg.params_per_map);
}

void validate_config(const DatasetConfig& cfg) {
  if (cfg.params_per_map < 2 || cfg.params_per_map % 2 != 0) {
    throw ConfigError("dataset: params_per_map must be even and >= 2");
  }
  if (cfg.series_len < 6 || cfg.series_len % 2 != 0) {
    throw ConfigError("dataset: series_len must be even and >= 6");
  }
  if (cfg.slices < 1) throw ConfigError("dataset: slices must be >= 1");
  if (cfg.ic_width < 0.0) throw ConfigError("dataset: negative ic_width");
}

}  // namespace

const char* quadrant_name(Quadrant q) {
  switch (q) {
    case Quadrant::Base: return "base";
    case Quadrant::Dp: return "dp";
    case Quadrant::NsSp: return "ns_sp";
    case Quadrant::NsDp: return "ns_dp";
  }
  return "?";
}

const std::vector<Record>& QuadrantSet::quadrant(Quadrant q) const {
  switch (q) {
    case Quadrant::Base: return base;
    case Quadrant::Dp: return dp;
    case Quadrant::NsSp: return ns_sp;
    case Quadrant::NsDp: return ns_dp;
  }
  throw std::domain_error("bad quadrant");
}

std::vector<Record>& QuadrantSet::quadrant(Quadrant q) {
  return const_cast<std::vector<Record>&>(
      static_cast<const QuadrantSet&>(*this).quadrant(q));
}

std::vector<std::vector<double>> sample_control_params(const MapSpec& spec,
                                                       std::size_t m) {
  if (m < 2) throw ConfigError("sample_control_params: m must be >= 2");
  std::vector<std::vector<double>> out;
  out.reserve(m);
  if (spec.param_ranges.size() == 1) {
    const auto& [name, lo, hi] = spec.param_ranges[0];
    for (std::size_t j = 0; j < m; ++j) {
      out.push_back({lo + static_cast<double>(j) * (hi - lo) / static_cast<double>(m)});
    }
    return out;
  }
  const std::size_t side = isqrt_exact(m);
  if (side == 0) {
    throw ConfigError(std::string(spec.name) + ": " + std::to_string(m) +
                      " samples cannot form a square grid over 2 parameters");
  }
  const auto& [an, alo, ahi] = spec.param_ranges[0];
  const auto& [bn, blo, bhi] = spec.param_ranges[1];
  for (std::size_t ia = 0; ia < side; ++ia) {
    const double a = alo + static_cast<double>(ia) * (ahi - alo) / static_cast<double>(side);
    for (std::size_t ib = 0; ib < side; ++ib) {
      const double b = blo + static_cast<double>(ib) * (bhi - blo) / static_cast<double>(side);
      out.push_back({a, b});
    }
  }
  return out;
}

std::vector<std::vector<double>> sample_control_params_random(const MapSpec& spec,
                                                              std::size_t m,
                                                              Rng& rng) {
  if (m < 2) throw ConfigError("sample_control_params_random: m must be >= 2");
  std::vector<std::vector<double>> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> p;
    p.reserve(spec.param_ranges.size());
    for (const ParamRange& r : spec.param_ranges) {
      p.push_back(rng.uniform(r.lo, r.hi));
    }
    out.push_back(std::move(p));
  }
  return out;
}

Dataset build_dataset(const DatasetConfig& cfg) {
  validate_config(cfg);

  Dataset ds;
  ds.config = cfg;
  ds.slices.resize(cfg.slices);

  const std::uint32_t half = cfg.series_len / 2;

  for (std::uint32_t s = 0; s < cfg.slices; ++s) {
    QuadrantSet& qs = ds.slices[s];
    const std::size_t per_quadrant =
        static_cast<std::size_t>(kMapCount) * cfg.params_per_map / 2;
    qs.base.reserve(per_quadrant);
    qs.dp.reserve(per_quadrant);
    qs.ns_sp.reserve(per_quadrant);
    qs.ns_dp.reserve(per_quadrant);

    for (int m = 0; m < kMapCount; ++m) {
      const MapSpec& spec = all_maps()[m];
      Rng ic_rng(derive_seed(cfg.master_seed, s, static_cast<std::uint64_t>(m)));
      const std::vector<double> ic = perturb_ic(spec, cfg.ic_width, ic_rng);
      const auto params = param_grid(spec, cfg);

      for (std::uint32_t j = 0; j < cfg.params_per_map; ++j) {
        TimeSeries full;
        try {
          full = iterate_map(spec, params[j], ic, cfg.series_len);
        } catch (const std::exception& e) {
          std::ostringstream msg;
          msg << "dataset: map " << spec.name << ", slice " << s
              << ", param index " << j << ": " << e.what();
          throw NumericError(msg.str());
        }

        TimeSeries first = full;
        first.values.assign(full.values.begin(), full.values.begin() + half);
        first.segment = Segment::FirstHalf;
        TimeSeries second = full;
        second.values.assign(full.values.begin() + half, full.values.end());
        second.segment = Segment::SecondHalf;

        Record r_first{normalize_series(first), static_cast<std::uint8_t>(m),
                       static_cast<std::uint16_t>(j)};
        Record r_second{normalize_series(second), static_cast<std::uint8_t>(m),
                        static_cast<std::uint16_t>(j)};

        if (j % 2 == 0) {
          qs.base.push_back(std::move(r_first));
          qs.ns_sp.push_back(std::move(r_second));
        } else {
          qs.dp.push_back(std::move(r_first));
          qs.ns_dp.push_back(std::move(r_second));
        }
      }
    }
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put<std::uint16_t>(buf, kVersion);
  put<std::uint16_t>(buf, kMapCount);
  put<std::uint32_t>(buf, ds.config.params_per_map);
  put<std::uint32_t>(buf, ds.config.slices);
  put<std::uint32_t>(buf, ds.config.series_len);
  put<std::uint64_t>(buf, ds.config.master_seed);
  put_f64(buf, ds.config.ic_width);
  put<std::uint8_t>(buf, ds.config.random_params ? 1 : 0);

  for (std::size_t s = 0; s < ds.slices.size(); ++s) {
    for (Quadrant q : {Quadrant::Base, Quadrant::Dp, Quadrant::NsSp, Quadrant::NsDp}) {
      for (const Record& rec : ds.slices[s].quadrant(q)) {
        put<std::uint8_t>(buf, rec.label);
        put<std::uint8_t>(buf, static_cast<std::uint8_t>(q));
        put<std::uint16_t>(buf, static_cast<std::uint16_t>(s));
        put<std::uint16_t>(buf, rec.param_index);
        for (double v : rec.series.ic) put_f64(buf, v);
        for (double v : rec.series.values) put_f64(buf, v);
      }
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_dataset: cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write_dataset: write failed for " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_dataset: cannot open " + path.string());
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  Reader r(reinterpret_cast<const unsigned char*>(blob.data()), blob.size());

  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get<std::uint8_t>());
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("read_dataset: bad magic in " + path.string());
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion) {
    throw FormatError("read_dataset: unsupported TSSD version " +
                      std::to_string(version));
  }
  const auto map_count = r.get<std::uint16_t>();
  if (map_count != kMapCount) {
    throw FormatError("read_dataset: expected 9 maps, file declares " +
                      std::to_string(map_count));
  }

  Dataset ds;
  ds.config.params_per_map = r.get<std::uint32_t>();
  ds.config.slices = r.get<std::uint32_t>();
  ds.config.series_len = r.get<std::uint32_t>();
  ds.config.master_seed = r.get<std::uint64_t>();
  ds.config.ic_width = r.get_f64();
  ds.config.random_params = r.get<std::uint8_t>() != 0;
  ds.slices.resize(ds.config.slices);

  // Parameter grids regenerate deterministically from the header.
  std::vector<std::vector<std::vector<double>>> grids(kMapCount);
  for (int m = 0; m < kMapCount; ++m) {
    grids[m] = param_grid(all_maps()[m], ds.config);
  }

  const std::uint32_t half = ds.config.series_len / 2;
  while (!r.at_end()) {
    Record rec;
    rec.label = r.get<std::uint8_t>();
    if (rec.label >= kMapCount) {
      throw CorruptionError("read_dataset: label " + std::to_string(rec.label) +
                            " out of range at byte offset " +
                            std::to_string(r.offset() - 1));
    }
    const auto q_raw = r.get<std::uint8_t>();
    if (q_raw > 3) {
      throw CorruptionError("read_dataset: quadrant " + std::to_string(q_raw) +
                            " out of range at byte offset " +
                            std::to_string(r.offset() - 1));
    }
    const auto slice = r.get<std::uint16_t>();
    if (slice >= ds.config.slices) {
      throw CorruptionError("read_dataset: slice " + std::to_string(slice) +
                            " out of range at byte offset " +
                            std::to_string(r.offset() - 2));
    }
    rec.param_index = r.get<std::uint16_t>();
    if (rec.param_index >= ds.config.params_per_map) {
      throw CorruptionError("read_dataset: param index out of range at byte offset " +
                            std::to_string(r.offset() - 2));
    }

    const MapSpec& spec = all_maps()[rec.label];
    rec.series.map_id = spec.id;
    rec.series.params = grids[rec.label][rec.param_index];
    rec.series.ic.resize(spec.dimension());
    for (double& v : rec.series.ic) v = r.get_f64();
    const Quadrant q = static_cast<Quadrant>(q_raw);
    rec.series.segment = (q == Quadrant::Base || q == Quadrant::Dp)
                             ? Segment::FirstHalf
                             : Segment::SecondHalf;
    rec.series.values.resize(half);
    for (double& v : rec.series.values) v = r.get_f64();

    ds.slices[slice].quadrant(q).push_back(std::move(rec));
  }
  return ds;
}

DatasetConfig desk_dataset_config(int i, std::uint64_t seed) {
  if (i < 0 || i > 5) throw ConfigError("dataset index must be in 0..5");
  DatasetConfig cfg;
  cfg.params_per_map = 64;
  cfg.slices = i == 0 ? 1 : 2;
  cfg.series_len = 2000;
  cfg.ic_width = 0.1 * i;
  cfg.master_seed = derive_seed(seed, 0xd5ull, static_cast<std::uint64_t>(i));
  return cfg;
}

DatasetConfig paper_dataset_config(int i, std::uint64_t seed) {
  if (i < 0 || i > 5) throw ConfigError("dataset index must be in 0..5");
  DatasetConfig cfg;
  cfg.params_per_map = 1024;
  cfg.slices = i == 0 ? 1 : 32;
  cfg.series_len = 2000;
  cfg.ic_width = 0.1 * i;
  cfg.master_seed = derive_seed(seed, 0xd5ull, static_cast<std::uint64_t>(i));
  return cfg;
}

}  // namespace tssc
