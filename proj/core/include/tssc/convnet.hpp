#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tssc/layers.hpp"
#include "tssc/tensor.hpp"

namespace tssc {

enum class ArchKind : std::uint8_t { SeriesNet = 0, HeatmapNet = 1 };
enum class OptimizerKind : std::uint8_t { SgdMomentum = 0, Adam = 1 };

struct ConvNetModel {
  ArchKind kind = ArchKind::HeatmapNet;
  // Opaque provenance byte carried through checkpoints (the experiment
  // layer records which encoder fed the net).
  std::uint8_t input_tag = 0;
  int class_count = 9;
  std::size_t input_c = 1, input_h = 1, input_w = 1;
  std::vector<std::unique_ptr<Layer>> layers;

  // Runs all layers; checks activations stay finite, naming the failing
  // layer otherwise. Input is [N, C, H, W] or [N, C, L] per `kind`.
  Tensor forward(const Tensor& x, bool train);
  // Propagates d loss / d logits back through all layers, filling
  // parameter gradients.
  Tensor backward(const Tensor& dlogits);

  std::vector<ParamRef> params();
  std::vector<Tensor*> state_tensors();
  std::vector<std::size_t> sample_shape() const;
};

// Heat-map classifier: 8@5x5 - BN - ReLU - pool, 16@5x5 - BN - ReLU -
// pool, 32@3x3 - BN - ReLU - pool, Dense 128, Dense classes. grid must be
// a multiple of 8.
ConvNetModel make_heatmap_net(int grid, int classes, std::uint64_t seed);

// Raw-series classifier: 128@5 - BN - ReLU - pool x4, 128@5 - BN - ReLU,
// global average pool, Dense classes. len must be a multiple of 4.
ConvNetModel make_series_net(std::size_t len, int classes, std::uint64_t seed);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 0;
  double validation_fraction = 0.0;
};

// A batch-ready labeled set: x is [N, ...sample shape].
struct SampleSet {
  Tensor x;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
};

struct MetricRow {
  int epoch;
  std::string split;  // "train" or "val"
  double loss;
  double accuracy;
};

struct TrainHistory {
  std::vector<MetricRow> rows;
};

// Deterministic given cfg.seed: fixed shuffle order and fixed parameter
// initialization (the model builders take the seed). Throws TrainingError
// with epoch/batch context if the loss goes non-finite.
TrainHistory train(ConvNetModel& model, const SampleSet& data,
                   const TrainConfig& cfg);

struct Evaluation {
  double accuracy = 0.0;
  int class_count = 0;
  std::vector<std::uint64_t> confusion;  // row: true label, col: prediction

  std::uint64_t at(int truth, int pred) const {
    return confusion[truth * class_count + pred];
  }
};

// Eval-mode forward over the whole set; argmax ties resolve to the lowest
// class index.
Evaluation evaluate(ConvNetModel& model, const SampleSet& data);

// TSSM checkpoint: magic, version, architecture descriptor, then all
// parameter and running-statistic tensors as binary64 little-endian.
void save_model(const ConvNetModel& model, const std::filesystem::path& path);
ConvNetModel load_model(const std::filesystem::path& path);

// CSV with header epoch,split,loss,accuracy.
void write_metrics_csv(const TrainHistory& history,
                       const std::filesystem::path& path);

}  // namespace tssc
