#include "tssc/convnet.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "doctest.h"
#include "tssc/errors.hpp"
#include "tssc/rng.hpp"

using namespace tssc;

namespace {

// Two heat-map-like classes with distinct constant patterns.
SampleSet toy_two_class(int n_per_class, int grid, Rng& rng) {
  SampleSet set;
  const std::size_t g = static_cast<std::size_t>(grid);
  set.x = Tensor({static_cast<std::size_t>(2 * n_per_class), 1, g, g});
  for (int i = 0; i < 2 * n_per_class; ++i) {
    const int label = i % 2;
    double* img = set.x.ptr() + static_cast<std::size_t>(i) * g * g;
    for (std::size_t y = 0; y < g; ++y) {
      for (std::size_t x = 0; x < g; ++x) {
        const bool lit = label == 0 ? x < g / 2 : x >= g / 2;
        img[y * g + x] = lit ? 1.0 : 0.05 * rng.uniform01();
      }
    }
    set.labels.push_back(static_cast<std::uint8_t>(label));
  }
  return set;
}

std::vector<double> flat_params(ConvNetModel& m) {
  std::vector<double> out;
  for (const ParamRef& p : m.params()) {
    out.insert(out.end(), p.value->data.begin(), p.value->data.end());
  }
  return out;
}

}  // namespace

TEST_CASE("shape algebra of the default nets") {
  ConvNetModel hm = make_heatmap_net(64, 9, 0);
  Tensor img({2, 1, 64, 64});
  const Tensor logits = hm.forward(img, false);
  CHECK(logits.shape == std::vector<std::size_t>{2, 9});

  ConvNetModel ts = make_series_net(1000, 9, 0);
  Tensor series({3, 1, 1000});
  const Tensor logits2 = ts.forward(series, false);
  CHECK(logits2.shape == std::vector<std::size_t>{3, 9});
}

TEST_CASE("net constructor validation") {
  CHECK_THROWS_AS(make_heatmap_net(60, 9, 0), ConfigError);
  CHECK_THROWS_AS(make_series_net(1001, 9, 0), ConfigError);
}

TEST_CASE("toy two-class problem trains to 100%") {
  Rng rng(3);
  const SampleSet data = toy_two_class(16, 16, rng);
  ConvNetModel model = make_heatmap_net(16, 2, 5);

  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  cfg.seed = 5;
  const TrainHistory hist = train(model, data, cfg);

  REQUIRE(hist.rows.size() == 5);
  CHECK(hist.rows.back().accuracy == 1.0);

  const Evaluation ev = evaluate(model, data);
  CHECK(ev.accuracy == 1.0);
  CHECK(ev.at(0, 0) == 16);
  CHECK(ev.at(1, 1) == 16);
  CHECK(ev.at(0, 1) == 0);
  CHECK(ev.at(1, 0) == 0);
}

TEST_CASE("training is deterministic in the seed") {
  Rng rng(4);
  const SampleSet data = toy_two_class(8, 16, rng);

  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 11;

  ConvNetModel a = make_heatmap_net(16, 2, 7);
  ConvNetModel b = make_heatmap_net(16, 2, 7);
  train(a, data, cfg);
  train(b, data, cfg);
  CHECK(flat_params(a) == flat_params(b));

  ConvNetModel c = make_heatmap_net(16, 2, 8);  // different init seed
  train(c, data, cfg);
  CHECK(flat_params(a) != flat_params(c));
}

#ifdef _OPENMP
TEST_CASE("results do not depend on the thread count") {
  Rng rng(22);
  const SampleSet data = toy_two_class(8, 16, rng);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.seed = 13;

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  ConvNetModel a = make_heatmap_net(16, 2, 13);
  train(a, data, cfg);
  const Evaluation ea = evaluate(a, data);

  omp_set_num_threads(2);
  ConvNetModel b = make_heatmap_net(16, 2, 13);
  train(b, data, cfg);
  const Evaluation eb = evaluate(b, data);
  omp_set_num_threads(saved);

  CHECK(flat_params(a) == flat_params(b));
  CHECK(ea.confusion == eb.confusion);
}
#endif

TEST_CASE("zero epochs leaves the model unchanged") {
  Rng rng(5);
  const SampleSet data = toy_two_class(4, 16, rng);
  ConvNetModel model = make_heatmap_net(16, 2, 9);
  const auto before = flat_params(model);

  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainHistory hist = train(model, data, cfg);
  CHECK(hist.rows.empty());
  CHECK(flat_params(model) == before);
}

TEST_CASE("validation split reports both rows") {
  Rng rng(6);
  const SampleSet data = toy_two_class(16, 16, rng);
  ConvNetModel model = make_heatmap_net(16, 2, 10);

  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.validation_fraction = 0.25;
  const TrainHistory hist = train(model, data, cfg);
  REQUIRE(hist.rows.size() == 4);
  CHECK(hist.rows[0].split == "train");
  CHECK(hist.rows[1].split == "val");
}

TEST_CASE("divergent training reports epoch and batch") {
  Rng rng(7);
  const SampleSet data = toy_two_class(8, 16, rng);

  // Batch norm keeps the default nets finite at any learning rate, so the
  // divergence path needs a plain dense stack.
  Rng wrng(21);
  ConvNetModel model;
  model.kind = ArchKind::HeatmapNet;
  model.class_count = 2;
  model.layers.push_back(std::make_unique<Flatten>());
  model.layers.push_back(std::make_unique<Dense>(256, 16, wrng));
  model.layers.push_back(std::make_unique<ReLU>());
  model.layers.push_back(std::make_unique<Dense>(16, 2, wrng));

  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e154;
  cfg.optimizer = OptimizerKind::SgdMomentum;
  try {
    train(model, data, cfg);
    FAIL("training did not diverge");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    CHECK(std::string(e.what()).find("batch") != std::string::npos);
  }
}

TEST_CASE("label out of range is rejected") {
  Rng rng(8);
  SampleSet data = toy_two_class(4, 16, rng);
  data.labels[0] = 9;
  ConvNetModel model = make_heatmap_net(16, 2, 12);
  TrainConfig cfg;
  CHECK_THROWS_AS(train(model, data, cfg), std::domain_error);
}

TEST_CASE("train config validation") {
  Rng rng(9);
  const SampleSet data = toy_two_class(4, 16, rng);
  ConvNetModel model = make_heatmap_net(16, 2, 12);
  TrainConfig cfg;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(model, data, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(model, data, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.validation_fraction = 1.0;
  CHECK_THROWS_AS(train(model, data, cfg), ConfigError);
  CHECK_THROWS_AS(train(model, SampleSet{}, TrainConfig{}), TrainingError);
}

TEST_CASE("constant predictor on a balanced set scores 1/9") {
  ConvNetModel model = make_heatmap_net(16, 9, 13);
  for (const ParamRef& p : model.params()) p.value->fill(0.0);

  SampleSet data;
  data.x = Tensor({18, 1, 16, 16});
  Rng rng(14);
  for (double& v : data.x.data) v = rng.uniform01();
  for (int i = 0; i < 18; ++i) data.labels.push_back(static_cast<std::uint8_t>(i % 9));

  const Evaluation ev = evaluate(model, data);
  CHECK(ev.accuracy == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  // all logits equal: ties resolve to class 0
  std::uint64_t col0 = 0;
  for (int t = 0; t < 9; ++t) col0 += ev.at(t, 0);
  CHECK(col0 == 18);
}

TEST_CASE("accuracy is invariant under positive logit scaling") {
  Rng rng(15);
  const SampleSet data = toy_two_class(8, 16, rng);
  ConvNetModel model = make_heatmap_net(16, 2, 16);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  train(model, data, cfg);
  const double base = evaluate(model, data).accuracy;

  // scale the final layer: logits scale by 3, argmax unchanged
  auto params = model.params();
  for (auto it = params.end() - 2; it != params.end(); ++it) {
    for (double& v : it->value->data) v *= 3.0;
  }
  CHECK(evaluate(model, data).accuracy == base);
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "tssc_model_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "toy.tssm";

  Rng rng(17);
  const SampleSet data = toy_two_class(8, 16, rng);
  ConvNetModel model = make_heatmap_net(16, 2, 18);
  model.input_tag = 2;
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  train(model, data, cfg);

  save_model(model, path);
  ConvNetModel back = load_model(path);
  CHECK(back.kind == model.kind);
  CHECK(back.input_tag == 2);
  CHECK(back.class_count == model.class_count);
  CHECK(flat_params(back) == flat_params(model));

  const Evaluation e1 = evaluate(model, data);
  const Evaluation e2 = evaluate(back, data);
  CHECK(e1.accuracy == e2.accuracy);
  CHECK(e1.confusion == e2.confusion);

  SUBCASE("bad magic") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    bytes[2] = 'X';
    const auto bad = dir / "bad.tssm";
    std::ofstream(bad, std::ios::binary).write(bytes.data(), bytes.size());
    CHECK_THROWS_AS(load_model(bad), FormatError);
  }

  SUBCASE("truncated payload") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    bytes.resize(bytes.size() / 2);
    const auto bad = dir / "short.tssm";
    std::ofstream(bad, std::ios::binary).write(bytes.data(), bytes.size());
    CHECK_THROWS_AS(load_model(bad), CorruptionError);
  }
}

TEST_CASE("metrics CSV layout") {
  TrainHistory hist;
  hist.rows.push_back({0, "train", 2.1972, 0.111});
  hist.rows.push_back({0, "val", 2.0, 0.25});

  const auto dir = std::filesystem::temp_directory_path() / "tssc_model_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "metrics.csv";
  write_metrics_csv(hist, path);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,split,loss,accuracy");
  std::getline(in, line);
  CHECK(line == "0,train,2.1972,0.111");
  std::getline(in, line);
  CHECK(line == "0,val,2,0.25");
}

TEST_CASE("small composed net passes a gradient check") {
  // conv - bn - relu - pool - flatten - dense, 8x8 input, 2 channels
  Rng wrng(19);
  ConvNetModel m;
  m.kind = ArchKind::HeatmapNet;
  m.class_count = 4;
  m.input_c = 1;
  m.input_h = m.input_w = 8;
  m.layers.push_back(std::make_unique<Conv2d>(1, 2, 3, 1, 1, wrng));
  m.layers.push_back(std::make_unique<BatchNorm>(2));
  m.layers.push_back(std::make_unique<ReLU>());
  m.layers.push_back(std::make_unique<MaxPool2d>());
  m.layers.push_back(std::make_unique<Flatten>());
  m.layers.push_back(std::make_unique<Dense>(2 * 4 * 4, 4, wrng));

  Rng rng(20);
  Tensor x({2, 1, 8, 8});
  for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
  const std::vector<std::uint8_t> labels = {1, 3};

  const Tensor logits = m.forward(x, true);
  const auto sl = softmax_cross_entropy(logits, labels);
  m.backward(softmax_cross_entropy_backward(sl.probs, labels));

  auto params = m.params();
  std::vector<Tensor> grads;
  for (const ParamRef& p : params) grads.push_back(*p.grad);

  const double h = 1e-4;
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].value->size(); ++i) {
      double& slot = params[p].value->data[i];
      const double saved = slot;
      slot = saved + h;
      const double up = softmax_cross_entropy(m.forward(x, true), labels).loss;
      slot = saved - h;
      const double dn = softmax_cross_entropy(m.forward(x, true), labels).loss;
      slot = saved;
      const double fd = (up - dn) / (2.0 * h);
      const double a = grads[p][i];
      worst = std::max(worst,
                       std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), 1e-6}));
    }
  }
  CHECK(worst < 1e-4);
}
