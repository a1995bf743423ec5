#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tssc/convnet.hpp"
#include "tssc/dataset.hpp"
#include "tssc/heatmap.hpp"

namespace tssc {

// The three classifiers benchmarked against each other: raw series,
// delay-pair heat-maps, triad heat-maps.
enum class Classifier : std::uint8_t { Ts = 0, Dcr = 1, Tssc = 2 };

const char* classifier_name(Classifier c);

enum class ExperimentId : std::uint8_t {
  E1ControlParams = 1,
  E2InitialConditions = 2,
  E3Segmentation = 3,
};

const char* experiment_name(ExperimentId id);

struct ExperimentConfig {
  std::uint32_t params_per_map = 64;
  std::uint32_t slices = 2;  // D1..D5; D0 always has a single slice
  std::uint32_t series_len = 2000;
  int grid = 64;
  int epochs = 15;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t master_seed = 0;
  std::vector<int> dataset_indices = {0, 1, 2, 3, 4, 5};
  std::vector<Classifier> classifiers = {Classifier::Ts, Classifier::Dcr,
                                         Classifier::Tssc};
  std::vector<int> e2_trials = {0, 1};  // 0: train on BASE_0, 1: on BASE_5
  // Restrict the task to a subset of the nine map labels (degenerate
  // configurations for smoke tests); class count stays 9.
  std::vector<int> map_labels = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  // When set, per-series heat-maps are cached here keyed by
  // (series hash, encoder, grid).
  std::filesystem::path cache_dir;

  static ExperimentConfig desk(std::uint64_t seed);
  static ExperimentConfig paper(std::uint64_t seed);
};

struct ReportRow {
  int i;
  Classifier classifier;
  double accuracy;
};

struct ExperimentReport {
  ExperimentId experiment;
  std::string trial;
  std::vector<ReportRow> rows;
  std::string config_snapshot;
  double wall_seconds = 0.0;
};

// Experiment 1, control parameters: per dataset index i, train on BASE_i
// and test on DP_i.
ExperimentReport run_e1(const ExperimentConfig& cfg);

// Experiment 2, initial conditions: trial "a" trains on BASE_0 and tests
// on BASE_1..5; trial "b" trains on BASE_5 and tests on BASE_0..4.
std::vector<ExperimentReport> run_e2(const ExperimentConfig& cfg);

// Experiment 3, segmentation: per i, train on BASE_i and test on NS^SP_i
// (trial "sp") and NS^DP_i (trial "dp").
std::array<ExperimentReport, 2> run_e3(const ExperimentConfig& cfg);

struct RenderConfig {
  std::filesystem::path out_dir;
  int grid = 64;
  std::size_t steps = 4000;
};

// One TSSC and one DCR heat-map PGM per map, at the reference parameter
// values; returns the 18 file paths.
std::vector<std::filesystem::path> render_figures(const RenderConfig& cfg);

// CSV with header experiment,trial,i,classifier,accuracy.
void write_report_csv(std::span<const ExperimentReport> reports,
                      const std::filesystem::path& path);

// Pools the given quadrant of all slices into one batch-ready set,
// encoded for the classifier (raw values, DCR heat-map, or TSSC
// heat-map).
SampleSet encode_quadrant(const Dataset& ds, Quadrant q, Classifier clf,
                          int grid, const std::filesystem::path& cache_dir = {});

// Builds dataset D_i at the config's scale (deterministic in master_seed).
Dataset build_experiment_dataset(const ExperimentConfig& cfg, int i);

// Trains one classifier on the pooled BASE quadrant of `ds`.
ConvNetModel train_classifier(const ExperimentConfig& cfg, const Dataset& ds,
                              Classifier clf, std::uint64_t train_seed);

}  // namespace tssc
