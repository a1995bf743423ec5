#include "tssc/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tssc/errors.hpp"
#include "tssc/triad.hpp"

namespace tssc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t heatmap_key(const TimeSeries& ts, Classifier clf, int grid) {
  std::uint64_t h = 1469598103934665603ull;
  h = fnv1a(ts.values.data(), ts.values.size() * sizeof(double), h);
  const auto tag = static_cast<std::uint8_t>(clf);
  h = fnv1a(&tag, 1, h);
  const auto g = static_cast<std::uint32_t>(grid);
  h = fnv1a(&g, sizeof(g), h);
  return h;
}

std::filesystem::path cache_file(const std::filesystem::path& dir,
                                 std::uint64_t key) {
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx.hmc",
                static_cast<unsigned long long>(key));
  return dir / name;
}

bool read_cached_cells(const std::filesystem::path& file, int grid,
                       double* cells) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return false;
  const std::size_t n = static_cast<std::size_t>(grid) * grid;
  in.read(reinterpret_cast<char*>(cells),
          static_cast<std::streamsize>(n * sizeof(double)));
  return static_cast<std::size_t>(in.gcount()) == n * sizeof(double);
}

void write_cached_cells(const std::filesystem::path& file, int grid,
                        const double* cells) {
  std::ofstream out(file, std::ios::binary);
  if (!out) return;  // cache is best-effort
  const std::size_t n = static_cast<std::size_t>(grid) * grid;
  out.write(reinterpret_cast<const char*>(cells),
            static_cast<std::streamsize>(n * sizeof(double)));
}

void encode_one(const TimeSeries& ts, Classifier clf, int grid, double* dst,
                const std::filesystem::path& cache_dir) {
  if (clf == Classifier::Ts) {
    std::memcpy(dst, ts.values.data(), ts.values.size() * sizeof(double));
    return;
  }
  if (!cache_dir.empty()) {
    const auto file = cache_file(cache_dir, heatmap_key(ts, clf, grid));
    if (read_cached_cells(file, grid, dst)) return;
    const HeatMap hm = clf == Classifier::Tssc
                           ? tssc_heatmap(triad_sequence(ts), grid)
                           : dcr_heatmap(ts, grid);
    std::memcpy(dst, hm.cells.data(), hm.cells.size() * sizeof(double));
    write_cached_cells(file, grid, dst);
    return;
  }
  const HeatMap hm = clf == Classifier::Tssc
                         ? tssc_heatmap(triad_sequence(ts), grid)
                         : dcr_heatmap(ts, grid);
  std::memcpy(dst, hm.cells.data(), hm.cells.size() * sizeof(double));
}

std::string snapshot(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "params_per_map=" << cfg.params_per_map << " slices=" << cfg.slices
     << " series_len=" << cfg.series_len << " grid=" << cfg.grid
     << " epochs=" << cfg.epochs << " batch_size=" << cfg.batch_size
     << " learning_rate=" << cfg.learning_rate << " seed=" << cfg.master_seed;
  return os.str();
}

TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.learning_rate;
  tc.optimizer = OptimizerKind::Adam;
  tc.seed = seed;
  tc.validation_fraction = 0.0;
  return tc;
}

const struct {
  MapId id;
  std::vector<double> params;
} kFigureParams[] = {
    {MapId::Logistic, {4.0}},
    {MapId::LinearCongruential, {259200.0}},
    {MapId::SkewTent, {0.8}},
    {MapId::Lozi, {1.7, 0.5}},
    {MapId::DissipativeStandard, {0.1, 8.8}},
    {MapId::Sinai, {0.1}},
    {MapId::ArnoldCat, {2.0}},
    {MapId::ChirikovStandard, {1.0}},
    {MapId::ChaoticWeb, {1.0}},
};

}  // namespace

const char* classifier_name(Classifier c) {
  switch (c) {
    case Classifier::Ts: return "ts";
    case Classifier::Dcr: return "dcr";
    case Classifier::Tssc: return "tssc";
  }
  return "?";
}

const char* experiment_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::E1ControlParams: return "e1";
    case ExperimentId::E2InitialConditions: return "e2";
    case ExperimentId::E3Segmentation: return "e3";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::desk(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.params_per_map = 64;
  cfg.slices = 2;
  cfg.epochs = 15;
  cfg.master_seed = seed;
  return cfg;
}

ExperimentConfig ExperimentConfig::paper(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.params_per_map = 1024;
  cfg.slices = 32;
  cfg.epochs = 30;
  cfg.master_seed = seed;
  return cfg;
}

Dataset build_experiment_dataset(const ExperimentConfig& cfg, int i) {
  DatasetConfig dc;
  dc.params_per_map = cfg.params_per_map;
  dc.slices = i == 0 ? 1 : cfg.slices;
  dc.series_len = cfg.series_len;
  dc.ic_width = 0.1 * i;
  dc.master_seed = derive_seed(cfg.master_seed, 0xd5ull, static_cast<std::uint64_t>(i));
  Dataset ds = build_dataset(dc);

  if (cfg.map_labels.size() < static_cast<std::size_t>(kMapCount)) {
    std::array<bool, kMapCount> keep{};
    for (int l : cfg.map_labels) keep.at(l) = true;
    for (QuadrantSet& qs : ds.slices) {
      for (Quadrant q : {Quadrant::Base, Quadrant::Dp, Quadrant::NsSp, Quadrant::NsDp}) {
        std::erase_if(qs.quadrant(q),
                      [&](const Record& r) { return !keep[r.label]; });
      }
    }
  }
  return ds;
}

SampleSet encode_quadrant(const Dataset& ds, Quadrant q, Classifier clf,
                          int grid, const std::filesystem::path& cache_dir) {
  std::vector<const Record*> records;
  for (const QuadrantSet& slice : ds.slices) {
    for (const Record& r : slice.quadrant(q)) records.push_back(&r);
  }
  if (records.empty()) {
    throw std::domain_error("encode_quadrant: empty quadrant");
  }
  if (!cache_dir.empty()) std::filesystem::create_directories(cache_dir);

  const std::size_t n = records.size();
  const std::size_t half = records.front()->series.values.size();
  const std::size_t sample =
      clf == Classifier::Ts ? half : static_cast<std::size_t>(grid) * grid;

  SampleSet set;
  set.x = clf == Classifier::Ts
              ? Tensor({n, 1, half})
              : Tensor({n, 1, static_cast<std::size_t>(grid),
                        static_cast<std::size_t>(grid)});
  set.labels.resize(n);

#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    encode_one(records[i]->series, clf, grid, set.x.ptr() + i * sample, cache_dir);
  }
  for (std::size_t i = 0; i < n; ++i) set.labels[i] = records[i]->label;
  return set;
}

ConvNetModel train_classifier(const ExperimentConfig& cfg, const Dataset& ds,
                              Classifier clf, std::uint64_t train_seed) {
  const SampleSet train_set =
      encode_quadrant(ds, Quadrant::Base, clf, cfg.grid, cfg.cache_dir);
  ConvNetModel model =
      clf == Classifier::Ts
          ? make_series_net(ds.config.series_len / 2, kMapCount, train_seed)
          : make_heatmap_net(cfg.grid, kMapCount, train_seed);
  model.input_tag = static_cast<std::uint8_t>(clf);
  train(model, train_set, train_config(cfg, train_seed));
  return model;
}

ExperimentReport run_e1(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  ExperimentReport report;
  report.experiment = ExperimentId::E1ControlParams;
  report.trial = "main";
  report.config_snapshot = snapshot(cfg);

  for (int i : cfg.dataset_indices) {
    const Dataset ds = build_experiment_dataset(cfg, i);
    for (Classifier clf : cfg.classifiers) {
      const std::uint64_t seed =
          derive_seed(cfg.master_seed, 0xe1, static_cast<std::uint64_t>(clf) * 16 + i);
      ConvNetModel model = train_classifier(cfg, ds, clf, seed);
      const SampleSet test =
          encode_quadrant(ds, Quadrant::Dp, clf, cfg.grid, cfg.cache_dir);
      report.rows.push_back({i, clf, evaluate(model, test).accuracy});
    }
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

std::vector<ExperimentReport> run_e2(const ExperimentConfig& cfg) {
  std::vector<ExperimentReport> reports;
  for (int trial : cfg.e2_trials) {
    const auto t0 = Clock::now();
    const int train_i = trial == 0 ? 0 : 5;
    ExperimentReport report;
    report.experiment = ExperimentId::E2InitialConditions;
    report.trial = trial == 0 ? "a" : "b";
    report.config_snapshot = snapshot(cfg);

    std::vector<ConvNetModel> models;
    {
      const Dataset train_ds = build_experiment_dataset(cfg, train_i);
      for (Classifier clf : cfg.classifiers) {
        const std::uint64_t seed = derive_seed(
            cfg.master_seed, 0xe2,
            static_cast<std::uint64_t>(clf) * 16 + static_cast<std::uint64_t>(train_i));
        models.push_back(train_classifier(cfg, train_ds, clf, seed));
      }
    }

    for (int i = 0; i <= 5; ++i) {
      if (i == train_i) continue;
      const Dataset ds = build_experiment_dataset(cfg, i);
      for (std::size_t c = 0; c < cfg.classifiers.size(); ++c) {
        const SampleSet test = encode_quadrant(ds, Quadrant::Base,
                                               cfg.classifiers[c], cfg.grid,
                                               cfg.cache_dir);
        report.rows.push_back(
            {i, cfg.classifiers[c], evaluate(models[c], test).accuracy});
      }
    }
    report.wall_seconds = seconds_since(t0);
    reports.push_back(std::move(report));
  }
  return reports;
}

std::array<ExperimentReport, 2> run_e3(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  std::array<ExperimentReport, 2> reports;
  reports[0].experiment = reports[1].experiment = ExperimentId::E3Segmentation;
  reports[0].trial = "sp";
  reports[1].trial = "dp";
  reports[0].config_snapshot = reports[1].config_snapshot = snapshot(cfg);

  for (int i : cfg.dataset_indices) {
    const Dataset ds = build_experiment_dataset(cfg, i);
    for (Classifier clf : cfg.classifiers) {
      const std::uint64_t seed =
          derive_seed(cfg.master_seed, 0xe3, static_cast<std::uint64_t>(clf) * 16 + i);
      ConvNetModel model = train_classifier(cfg, ds, clf, seed);
      const SampleSet sp =
          encode_quadrant(ds, Quadrant::NsSp, clf, cfg.grid, cfg.cache_dir);
      reports[0].rows.push_back({i, clf, evaluate(model, sp).accuracy});
      const SampleSet dp =
          encode_quadrant(ds, Quadrant::NsDp, clf, cfg.grid, cfg.cache_dir);
      reports[1].rows.push_back({i, clf, evaluate(model, dp).accuracy});
    }
  }
  reports[0].wall_seconds = reports[1].wall_seconds = seconds_since(t0);
  return reports;
}

std::vector<std::filesystem::path> render_figures(const RenderConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<std::filesystem::path> files;
  for (const auto& fig : kFigureParams) {
    const MapSpec& spec = map_spec(fig.id);
    const TimeSeries series = normalize_series(
        iterate_map(spec, fig.params, spec.base_ic, cfg.steps));

    const auto tssc_path = cfg.out_dir / (std::string(spec.name) + "_tssc.pgm");
    export_pgm(tssc_heatmap(triad_sequence(series), cfg.grid), tssc_path);
    files.push_back(tssc_path);

    const auto dcr_path = cfg.out_dir / (std::string(spec.name) + "_dcr.pgm");
    export_pgm(dcr_heatmap(series, cfg.grid), dcr_path);
    files.push_back(dcr_path);
  }
  return files;
}

void write_report_csv(std::span<const ExperimentReport> reports,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_report_csv: cannot open " + path.string());
  out << "experiment,trial,i,classifier,accuracy\n";
  char line[128];
  for (const ExperimentReport& rep : reports) {
    for (const ReportRow& row : rep.rows) {
      std::snprintf(line, sizeof(line), "%s,%s,%d,%s,%.9g\n",
                    experiment_name(rep.experiment), rep.trial.c_str(), row.i,
                    classifier_name(row.classifier), row.accuracy);
      out << line;
    }
  }
  if (!out) throw IoError("write_report_csv: write failed for " + path.string());
}

}  // namespace tssc
