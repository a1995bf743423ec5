// tssc command-line tool: dataset generation, encoding, training,
// evaluation, the three benchmark experiments, and figure rendering.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tssc/convnet.hpp"
#include "tssc/dataset.hpp"
#include "tssc/errors.hpp"
#include "tssc/experiments.hpp"
#include "tssc/heatmap.hpp"
#include "tssc/triad.hpp"

namespace {

using namespace tssc;

int parse_dataset_index(const std::string& name) {
  if (name.size() == 2 && (name[0] == 'D' || name[0] == 'd') && name[1] >= '0' &&
      name[1] <= '5') {
    return name[1] - '0';
  }
  throw CLI::ValidationError("--dataset", "expected D0..D5, got '" + name + "'");
}

Classifier parse_classifier(const std::string& name) {
  if (name == "ts") return Classifier::Ts;
  if (name == "dcr") return Classifier::Dcr;
  if (name == "tssc") return Classifier::Tssc;
  throw CLI::ValidationError("--classifier", "expected ts|dcr|tssc");
}

Quadrant parse_quadrant(const std::string& name) {
  if (name == "base") return Quadrant::Base;
  if (name == "dp") return Quadrant::Dp;
  if (name == "ns_sp") return Quadrant::NsSp;
  if (name == "ns_dp") return Quadrant::NsDp;
  throw CLI::ValidationError("--quadrant", "expected base|dp|ns_sp|ns_dp");
}

int cmd_generate(const std::string& dataset, std::uint32_t params_per_map,
                 std::uint32_t slices, bool slices_set, std::uint32_t series_len,
                 std::uint64_t seed, bool random_params, const std::string& out) {
  const int i = parse_dataset_index(dataset);
  DatasetConfig cfg = paper_dataset_config(i, seed);
  cfg.params_per_map = params_per_map;
  cfg.series_len = series_len;
  cfg.random_params = random_params;
  if (slices_set) cfg.slices = slices;

  std::printf("generating %s: %u params/map, %u slice(s), length %u, ic width %.2f\n",
              dataset.c_str(), cfg.params_per_map, cfg.slices, cfg.series_len,
              cfg.ic_width);
  const Dataset ds = build_dataset(cfg);
  write_dataset(ds, out);
  std::size_t records = 0;
  for (const auto& s : ds.slices) {
    records += s.base.size() + s.dp.size() + s.ns_sp.size() + s.ns_dp.size();
  }
  std::printf("wrote %zu records to %s\n", records, out.c_str());
  return 0;
}

int cmd_encode(const std::string& method, int grid, const std::string& in,
               const std::string& out, const std::string& format,
               const std::string& quadrant, std::size_t limit) {
  const Dataset ds = read_dataset(in);
  std::filesystem::create_directories(out);

  std::vector<Quadrant> quads;
  if (quadrant == "all") {
    quads = {Quadrant::Base, Quadrant::Dp, Quadrant::NsSp, Quadrant::NsDp};
  } else {
    quads = {parse_quadrant(quadrant)};
  }

  std::size_t written = 0;
  for (std::size_t s = 0; s < ds.slices.size(); ++s) {
    for (Quadrant q : quads) {
      for (const Record& rec : ds.slices[s].quadrant(q)) {
        if (limit > 0 && written >= limit) break;
        const HeatMap hm = method == "tssc"
                               ? tssc_heatmap(triad_sequence(rec.series), grid)
                               : dcr_heatmap(rec.series, grid);
        char name[128];
        std::snprintf(name, sizeof(name), "%s_s%02zu_%s_m%d_p%04d.%s",
                      method.c_str(), s, quadrant_name(q),
                      static_cast<int>(rec.label), rec.param_index,
                      format == "csv" ? "csv" : "pgm");
        const auto path = std::filesystem::path(out) / name;
        if (format == "csv") {
          export_csv(hm, path);
        } else {
          export_pgm(hm, path);
        }
        ++written;
      }
    }
  }
  std::printf("wrote %zu %s images to %s\n", written, method.c_str(), out.c_str());
  return 0;
}

int cmd_train(const std::string& classifier, const std::string& in,
              const std::string& quadrant, int grid, int epochs, int batch,
              double lr, double val_fraction, const std::string& optimizer,
              std::uint64_t seed, const std::string& out,
              const std::string& metrics) {
  const Classifier clf = parse_classifier(classifier);
  const Dataset ds = read_dataset(in);
  const SampleSet data = encode_quadrant(ds, parse_quadrant(quadrant), clf, grid);

  ConvNetModel model = clf == Classifier::Ts
                           ? make_series_net(ds.config.series_len / 2, kMapCount, seed)
                           : make_heatmap_net(grid, kMapCount, seed);
  model.input_tag = static_cast<std::uint8_t>(clf);

  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.learning_rate = lr;
  cfg.validation_fraction = val_fraction;
  cfg.seed = seed;
  cfg.optimizer = optimizer == "sgd_momentum" ? OptimizerKind::SgdMomentum
                                              : OptimizerKind::Adam;

  std::printf("training %s on %s/%s: %zu samples, %d epochs\n", classifier.c_str(),
              in.c_str(), quadrant.c_str(), data.size(), epochs);
  const TrainHistory hist = train(model, data, cfg);
  for (const MetricRow& r : hist.rows) {
    std::printf("epoch %d %s: loss %.4f, accuracy %.4f\n", r.epoch,
                r.split.c_str(), r.loss, r.accuracy);
  }
  save_model(model, out);
  std::printf("saved model to %s\n", out.c_str());
  if (!metrics.empty()) {
    write_metrics_csv(hist, metrics);
    std::printf("wrote metrics to %s\n", metrics.c_str());
  }
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& in,
             const std::string& quadrant, int grid) {
  ConvNetModel model = load_model(model_path);
  const auto clf = static_cast<Classifier>(model.input_tag);
  if (model.kind == ArchKind::HeatmapNet) grid = static_cast<int>(model.input_w);

  const Dataset ds = read_dataset(in);
  const SampleSet data = encode_quadrant(ds, parse_quadrant(quadrant), clf, grid);
  const Evaluation ev = evaluate(model, data);

  std::printf("%s on %s/%s: accuracy %.4f (%zu samples)\n",
              classifier_name(clf), in.c_str(), quadrant.c_str(), ev.accuracy,
              data.size());
  std::printf("confusion (rows: truth, cols: prediction):\n");
  for (int t = 0; t < ev.class_count; ++t) {
    for (int p = 0; p < ev.class_count; ++p) {
      std::printf("%6llu", static_cast<unsigned long long>(ev.at(t, p)));
    }
    std::printf("\n");
  }
  return 0;
}

int cmd_experiment(const std::string& id, const std::string& scale,
                   std::uint64_t seed, const std::string& out_dir, int epochs,
                   bool epochs_set, const std::string& cache_dir) {
  ExperimentConfig cfg = scale == "paper" ? ExperimentConfig::paper(seed)
                                          : ExperimentConfig::desk(seed);
  if (epochs_set) cfg.epochs = epochs;
  cfg.cache_dir = cache_dir;
  std::filesystem::create_directories(out_dir);

  std::vector<ExperimentReport> reports;
  if (id == "e1") {
    reports.push_back(run_e1(cfg));
  } else if (id == "e2") {
    for (auto& r : run_e2(cfg)) reports.push_back(std::move(r));
  } else if (id == "e3") {
    for (auto& r : run_e3(cfg)) reports.push_back(std::move(r));
  } else {
    throw CLI::ValidationError("--id", "expected e1|e2|e3");
  }

  const auto csv = std::filesystem::path(out_dir) / (id + "_report.csv");
  write_report_csv(reports, csv);
  for (const ExperimentReport& rep : reports) {
    std::printf("%s trial %s (%.0fs):\n", experiment_name(rep.experiment),
                rep.trial.c_str(), rep.wall_seconds);
    for (const ReportRow& row : rep.rows) {
      std::printf("  i=%d %-5s accuracy %.4f\n", row.i,
                  classifier_name(row.classifier), row.accuracy);
    }
  }
  std::printf("wrote %s\n", csv.string().c_str());
  return 0;
}

int cmd_render_figures(const std::string& out_dir, int grid, std::size_t steps) {
  RenderConfig cfg;
  cfg.out_dir = out_dir;
  cfg.grid = grid;
  cfg.steps = steps;
  const auto files = render_figures(cfg);
  for (const auto& f : files) std::printf("%s\n", f.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triad state space construction benchmark tool"};
  app.require_subcommand(1);

  // generate
  std::string g_dataset = "D0", g_out;
  std::uint32_t g_params = 1024, g_slices = 0, g_len = 2000;
  std::uint64_t g_seed = 0;
  bool g_random = false;
  auto* gen = app.add_subcommand("generate", "Build a benchmark dataset (TSSD)");
  gen->add_option("--dataset", g_dataset, "Dataset D0..D5")->required();
  gen->add_option("--params-per-map", g_params, "Control parameters per map");
  auto* slices_opt = gen->add_option("--slices", g_slices, "Slices (default: 1 for D0, 32 otherwise)");
  gen->add_option("--series-len", g_len, "Full series length");
  gen->add_option("--seed", g_seed, "Master seed");
  gen->add_flag("--random-params", g_random, "Sample parameters randomly instead of the even grid");
  gen->add_option("--out", g_out, "Output TSSD file")->required();

  // encode
  std::string e_method = "tssc", e_in, e_out, e_format = "pgm", e_quadrant = "all";
  int e_grid = 64;
  std::size_t e_limit = 0;
  auto* enc = app.add_subcommand("encode", "Export heat-map images for a dataset");
  enc->add_option("--method", e_method, "tssc|dcr")->check(CLI::IsMember({"tssc", "dcr"}));
  enc->add_option("--grid", e_grid, "Grid size");
  enc->add_option("--in", e_in, "Input TSSD file")->required();
  enc->add_option("--out", e_out, "Output directory")->required();
  enc->add_option("--format", e_format, "pgm|csv")->check(CLI::IsMember({"pgm", "csv"}));
  enc->add_option("--quadrant", e_quadrant, "base|dp|ns_sp|ns_dp|all");
  enc->add_option("--limit", e_limit, "Stop after this many images (0: no limit)");

  // train
  std::string t_classifier, t_in, t_quadrant = "base", t_optimizer = "adam";
  std::string t_out = "model.tssm", t_metrics;
  int t_grid = 64, t_epochs = 30, t_batch = 64;
  double t_lr = 1e-3, t_val = 0.0;
  std::uint64_t t_seed = 0;
  auto* tr = app.add_subcommand("train", "Train a classifier on a dataset quadrant");
  tr->add_option("--classifier", t_classifier, "ts|dcr|tssc")->required();
  tr->add_option("--in", t_in, "Input TSSD file")->required();
  tr->add_option("--train-quadrant", t_quadrant, "base|dp|ns_sp|ns_dp");
  tr->add_option("--grid", t_grid, "Heat-map grid size");
  tr->add_option("--epochs", t_epochs, "Training epochs");
  tr->add_option("--batch", t_batch, "Batch size");
  tr->add_option("--lr", t_lr, "Learning rate");
  tr->add_option("--val-fraction", t_val, "Validation fraction");
  tr->add_option("--optimizer", t_optimizer, "adam|sgd_momentum")
      ->check(CLI::IsMember({"adam", "sgd_momentum"}));
  tr->add_option("--seed", t_seed, "Init/shuffle seed");
  tr->add_option("--out", t_out, "Output TSSM checkpoint");
  tr->add_option("--metrics", t_metrics, "Optional metrics CSV path");

  // eval
  std::string v_model, v_in, v_quadrant = "dp";
  int v_grid = 64;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset quadrant");
  ev->add_option("--model", v_model, "TSSM checkpoint")->required();
  ev->add_option("--in", v_in, "Input TSSD file")->required();
  ev->add_option("--test-quadrant", v_quadrant, "base|dp|ns_sp|ns_dp");
  ev->add_option("--grid", v_grid, "Heat-map grid size (heat-map models use their stored size)");

  // experiment
  std::string x_id, x_scale = "desk", x_out = "reports", x_cache;
  std::uint64_t x_seed = 0;
  int x_epochs = 0;
  auto* ex = app.add_subcommand("experiment", "Run benchmark experiment e1, e2 or e3");
  ex->add_option("--id", x_id, "e1|e2|e3")->required()
      ->check(CLI::IsMember({"e1", "e2", "e3"}));
  ex->add_option("--scale", x_scale, "desk|paper")->check(CLI::IsMember({"desk", "paper"}));
  ex->add_option("--seed", x_seed, "Master seed");
  ex->add_option("--out", x_out, "Report output directory");
  auto* epochs_opt = ex->add_option("--epochs", x_epochs, "Override training epochs");
  ex->add_option("--cache-dir", x_cache, "Heat-map cache directory (empty: no cache)");

  // render-figures
  std::string r_out = "figures";
  int r_grid = 64;
  std::size_t r_steps = 4000;
  auto* rf = app.add_subcommand("render-figures",
                                "Render TSSC and DCR heat-maps of all nine maps");
  rf->add_option("--out", r_out, "Output directory");
  rf->add_option("--grid", r_grid, "Grid size");
  rf->add_option("--steps", r_steps, "Series length");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_generate(g_dataset, g_params, g_slices, !slices_opt->empty(),
                          g_len, g_seed, g_random, g_out);
    }
    if (enc->parsed()) {
      return cmd_encode(e_method, e_grid, e_in, e_out, e_format, e_quadrant,
                        e_limit);
    }
    if (tr->parsed()) {
      return cmd_train(t_classifier, t_in, t_quadrant, t_grid, t_epochs, t_batch,
                       t_lr, t_val, t_optimizer, t_seed, t_out, t_metrics);
    }
    if (ev->parsed()) return cmd_eval(v_model, v_in, v_quadrant, v_grid);
    if (ex->parsed()) {
      return cmd_experiment(x_id, x_scale, x_seed, x_out, x_epochs,
                            !epochs_opt->empty(), x_cache);
    }
    if (rf->parsed()) return cmd_render_figures(r_out, r_grid, r_steps);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
