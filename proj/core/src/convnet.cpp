#include "tssc/convnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "tssc/errors.hpp"
#include "tssc/rng.hpp"

namespace tssc {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'S', 'M'};
constexpr std::uint16_t kVersion = 1;

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

template <typename T>
T get(const std::string& buf, std::size_t& off) {
  static_assert(std::is_unsigned_v<T>);
  if (off + sizeof(T) > buf.size()) {
    throw CorruptionError("TSSM: truncated file at byte offset " +
                          std::to_string(buf.size()));
  }
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[off + i]))
         << (8 * i);
  }
  off += sizeof(T);
  return static_cast<T>(u);
}

// Gathers rows `indices` of data.x into one batch tensor.
Tensor gather_batch(const SampleSet& data, std::span<const std::size_t> indices) {
  const std::size_t sample = data.x.size() / data.labels.size();
  std::vector<std::size_t> shape = data.x.shape;
  shape[0] = indices.size();
  Tensor out(shape);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::memcpy(out.ptr() + i * sample, data.x.ptr() + indices[i] * sample,
                sample * sizeof(double));
  }
  return out;
}

std::vector<std::uint8_t> gather_labels(const SampleSet& data,
                                        std::span<const std::size_t> indices) {
  std::vector<std::uint8_t> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = data.labels[indices[i]];
  return out;
}

void fisher_yates(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.index(i)]);
  }
}

class Optimizer {
 public:
  Optimizer(std::vector<ParamRef> params, const TrainConfig& cfg)
      : params_(std::move(params)), cfg_(cfg) {
    slot_a_.reserve(params_.size());
    slot_b_.reserve(params_.size());
    for (const ParamRef& p : params_) {
      slot_a_.emplace_back(p.value->shape);
      slot_b_.emplace_back(p.value->shape);
    }
  }

  void step() {
    ++t_;
    if (cfg_.optimizer == OptimizerKind::Adam) {
      adam_step();
    } else {
      momentum_step();
    }
  }

 private:
  void adam_step() {
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double corr1 = 1.0 - std::pow(b1, t_);
    const double corr2 = 1.0 - std::pow(b2, t_);
    for (std::size_t p = 0; p < params_.size(); ++p) {
      Tensor& v = *params_[p].value;
      const Tensor& g = *params_[p].grad;
      Tensor& m1 = slot_a_[p];
      Tensor& m2 = slot_b_[p];
      for (std::size_t i = 0; i < v.size(); ++i) {
        m1[i] = b1 * m1[i] + (1.0 - b1) * g[i];
        m2[i] = b2 * m2[i] + (1.0 - b2) * g[i] * g[i];
        v[i] -= cfg_.learning_rate * (m1[i] / corr1) /
                (std::sqrt(m2[i] / corr2) + eps);
      }
    }
  }

  void momentum_step() {
    const double mu = 0.9;
    for (std::size_t p = 0; p < params_.size(); ++p) {
      Tensor& v = *params_[p].value;
      const Tensor& g = *params_[p].grad;
      Tensor& vel = slot_a_[p];
      for (std::size_t i = 0; i < v.size(); ++i) {
        vel[i] = mu * vel[i] - cfg_.learning_rate * g[i];
        v[i] += vel[i];
      }
    }
  }

  std::vector<ParamRef> params_;
  TrainConfig cfg_;
  std::vector<Tensor> slot_a_;  // Adam m / momentum velocity
  std::vector<Tensor> slot_b_;  // Adam v
  long t_ = 0;
};

std::size_t argmax_row(const double* row, int k) {
  std::size_t best = 0;
  for (int j = 1; j < k; ++j) {
    if (row[j] > row[best]) best = j;  // strict: ties keep the lowest index
  }
  return best;
}

}  // namespace

Tensor ConvNetModel::forward(const Tensor& x, bool train) {
  Tensor cur = x;
  for (const auto& layer : layers) {
    cur = layer->forward(cur, train);
    require_finite(cur, layer->name());
  }
  return cur;
}

Tensor ConvNetModel::backward(const Tensor& dlogits) {
  Tensor cur = dlogits;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    cur = (*it)->backward(cur);
  }
  return cur;
}

std::vector<ParamRef> ConvNetModel::params() {
  std::vector<ParamRef> out;
  for (const auto& layer : layers) layer->collect_params(out);
  return out;
}

std::vector<Tensor*> ConvNetModel::state_tensors() {
  std::vector<Tensor*> out;
  for (const auto& layer : layers) layer->collect_state(out);
  return out;
}

std::vector<std::size_t> ConvNetModel::sample_shape() const {
  if (kind == ArchKind::SeriesNet) return {input_c, input_w};
  return {input_c, input_h, input_w};
}

ConvNetModel make_heatmap_net(int grid, int classes, std::uint64_t seed) {
  if (grid < 8 || grid % 8 != 0) {
    throw ConfigError("heatmap net: grid must be a positive multiple of 8");
  }
  ConvNetModel m;
  m.kind = ArchKind::HeatmapNet;
  m.class_count = classes;
  m.input_c = 1;
  m.input_h = m.input_w = static_cast<std::size_t>(grid);

  // Per-layer init streams keep weights independent of construction order.
  int li = 0;
  auto layer_rng = [&] { return Rng(derive_seed(seed, 0xc0, li++)); };

  Rng r0 = layer_rng();
  m.layers.push_back(std::make_unique<Conv2d>(1, 8, 5, 1, 2, r0));
  m.layers.push_back(std::make_unique<BatchNorm>(8));
  m.layers.push_back(std::make_unique<ReLU>());
  m.layers.push_back(std::make_unique<MaxPool2d>());
  Rng r1 = layer_rng();
  m.layers.push_back(std::make_unique<Conv2d>(8, 16, 5, 1, 2, r1));
  m.layers.push_back(std::make_unique<BatchNorm>(16));
  m.layers.push_back(std::make_unique<ReLU>());
  m.layers.push_back(std::make_unique<MaxPool2d>());
  Rng r2 = layer_rng();
  m.layers.push_back(std::make_unique<Conv2d>(16, 32, 3, 1, 1, r2));
  m.layers.push_back(std::make_unique<BatchNorm>(32));
  m.layers.push_back(std::make_unique<ReLU>());
  m.layers.push_back(std::make_unique<MaxPool2d>());
  m.layers.push_back(std::make_unique<Flatten>());
  const int flat = 32 * (grid / 8) * (grid / 8);
  Rng r3 = layer_rng();
  m.layers.push_back(std::make_unique<Dense>(flat, 128, r3));
  m.layers.push_back(std::make_unique<ReLU>());
  Rng r4 = layer_rng();
  m.layers.push_back(std::make_unique<Dense>(128, classes, r4));
  return m;
}

ConvNetModel make_series_net(std::size_t len, int classes, std::uint64_t seed) {
  if (len < 4 || len % 4 != 0) {
    throw ConfigError("series net: length must be a positive multiple of 4");
  }
  ConvNetModel m;
  m.kind = ArchKind::SeriesNet;
  m.class_count = classes;
  m.input_c = 1;
  m.input_h = 1;
  m.input_w = len;

  int li = 0;
  auto layer_rng = [&] { return Rng(derive_seed(seed, 0xc1, li++)); };

  Rng r0 = layer_rng();
  m.layers.push_back(std::make_unique<Conv1d>(1, 128, 5, 2, r0));
  m.layers.push_back(std::make_unique<BatchNorm>(128));
  m.layers.push_back(std::make_unique<ReLU>());
  m.layers.push_back(std::make_unique<MaxPool1d>(4));
  Rng r1 = layer_rng();
  m.layers.push_back(std::make_unique<Conv1d>(128, 128, 5, 2, r1));
  m.layers.push_back(std::make_unique<BatchNorm>(128));
  m.layers.push_back(std::make_unique<ReLU>());
  m.layers.push_back(std::make_unique<GlobalAvgPool1d>());
  Rng r2 = layer_rng();
  m.layers.push_back(std::make_unique<Dense>(128, classes, r2));
  return m;
}

TrainHistory train(ConvNetModel& model, const SampleSet& data,
                   const TrainConfig& cfg) {
  if (data.size() == 0) throw TrainingError("train: empty sample set");
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0)) {
    throw ConfigError("train: validation_fraction must be in [0, 1)");
  }
  for (std::uint8_t l : data.labels) {
    if (static_cast<int>(l) >= model.class_count) {
      throw std::domain_error("train: label " + std::to_string(l) +
                              " out of range [0, " +
                              std::to_string(model.class_count) + ")");
    }
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  // Validation split comes off the end of one fixed shuffle so it is
  // stable across epochs.
  std::vector<std::size_t> val_idx;
  if (cfg.validation_fraction > 0.0) {
    Rng split_rng(derive_seed(cfg.seed, 0x51));
    fisher_yates(order, split_rng);
    const auto n_val = static_cast<std::size_t>(
        std::floor(cfg.validation_fraction * static_cast<double>(order.size())));
    val_idx.assign(order.end() - n_val, order.end());
    order.resize(order.size() - n_val);
  }

  Optimizer opt(model.params(), cfg);
  TrainHistory history;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, 0xe, epoch));
    fisher_yates(order, shuffle_rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t seen = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Tensor xb = gather_batch(data, idx);
      const std::vector<std::uint8_t> yb = gather_labels(data, idx);

      SoftmaxLoss sl;
      try {
        const Tensor logits = model.forward(xb, true);
        sl = softmax_cross_entropy(logits, yb);
      } catch (const NumericError& e) {
        throw TrainingError("train: diverged at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(start / cfg.batch_size) +
                            ": " + e.what());
      }
      if (!std::isfinite(sl.loss)) {
        throw TrainingError("train: non-finite loss at epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(start / cfg.batch_size));
      }
      loss_sum += sl.loss * static_cast<double>(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (argmax_row(sl.probs.ptr() + i * model.class_count,
                       model.class_count) == yb[i]) {
          ++correct;
        }
      }
      seen += idx.size();

      model.backward(softmax_cross_entropy_backward(sl.probs, yb));
      opt.step();
    }

    history.rows.push_back({epoch, "train", loss_sum / static_cast<double>(seen),
                            static_cast<double>(correct) / static_cast<double>(seen)});

    if (!val_idx.empty()) {
      SampleSet val{gather_batch(data, val_idx), gather_labels(data, val_idx)};
      const Tensor logits = model.forward(val.x, false);
      const SoftmaxLoss sl = softmax_cross_entropy(logits, val.labels);
      std::size_t v_correct = 0;
      for (std::size_t i = 0; i < val.size(); ++i) {
        if (argmax_row(sl.probs.ptr() + i * model.class_count,
                       model.class_count) == val.labels[i]) {
          ++v_correct;
        }
      }
      history.rows.push_back({epoch, "val", sl.loss,
                              static_cast<double>(v_correct) /
                                  static_cast<double>(val.size())});
    }
  }
  return history;
}

Evaluation evaluate(ConvNetModel& model, const SampleSet& data) {
  Evaluation ev;
  ev.class_count = model.class_count;
  ev.confusion.assign(static_cast<std::size_t>(model.class_count) * model.class_count,
                      0);
  if (data.size() == 0) return ev;

  constexpr std::size_t kChunk = 128;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);

  std::uint64_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += kChunk) {
    const std::size_t stop = std::min(idx.size(), start + kChunk);
    const std::span<const std::size_t> span(idx.data() + start, stop - start);
    const Tensor logits = model.forward(gather_batch(data, span), false);
    for (std::size_t i = 0; i < span.size(); ++i) {
      const std::size_t pred =
          argmax_row(logits.ptr() + i * model.class_count, model.class_count);
      const std::uint8_t truth = data.labels[span[i]];
      ++ev.confusion[truth * model.class_count + pred];
      if (pred == truth) ++correct;
    }
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return ev;
}

void save_model(const ConvNetModel& model, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put<std::uint16_t>(buf, kVersion);
  put<std::uint8_t>(buf, static_cast<std::uint8_t>(model.kind));
  put<std::uint8_t>(buf, model.input_tag);
  put<std::uint16_t>(buf, static_cast<std::uint16_t>(model.class_count));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(model.input_c));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(model.input_h));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(model.input_w));

  auto& mutable_model = const_cast<ConvNetModel&>(model);
  std::vector<ParamRef> params = mutable_model.params();
  std::vector<Tensor*> state = mutable_model.state_tensors();
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(params.size()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(state.size()));

  auto dump = [&buf](const Tensor& t) {
    put<std::uint64_t>(buf, t.size());
    for (double v : t.data) put<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(v));
  };
  for (const ParamRef& p : params) dump(*p.value);
  for (const Tensor* t : state) dump(*t);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_model: cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("save_model: write failed for " + path.string());
}

ConvNetModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_model: cannot open " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  std::size_t off = 0;

  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw FormatError("load_model: bad magic in " + path.string());
  }
  off = 4;
  const auto version = get<std::uint16_t>(buf, off);
  if (version != kVersion) {
    throw FormatError("load_model: unsupported TSSM version " +
                      std::to_string(version));
  }
  const auto kind = static_cast<ArchKind>(get<std::uint8_t>(buf, off));
  const auto tag = get<std::uint8_t>(buf, off);
  const int classes = get<std::uint16_t>(buf, off);
  const auto input_c = get<std::uint32_t>(buf, off);
  const auto input_h = get<std::uint32_t>(buf, off);
  const auto input_w = get<std::uint32_t>(buf, off);

  ConvNetModel model =
      kind == ArchKind::SeriesNet
          ? make_series_net(input_w, classes, 0)
          : make_heatmap_net(static_cast<int>(input_w), classes, 0);
  model.input_tag = tag;
  if (model.input_c != input_c || model.input_h != input_h) {
    throw FormatError("load_model: inconsistent architecture descriptor");
  }

  const auto n_params = get<std::uint32_t>(buf, off);
  const auto n_state = get<std::uint32_t>(buf, off);
  std::vector<ParamRef> params = model.params();
  std::vector<Tensor*> state = model.state_tensors();
  if (n_params != params.size() || n_state != state.size()) {
    throw FormatError("load_model: tensor count mismatch");
  }

  auto slurp = [&buf, &off](Tensor& t) {
    const auto n = get<std::uint64_t>(buf, off);
    if (n != t.size()) {
      throw CorruptionError("load_model: tensor of " + std::to_string(n) +
                            " values where " + std::to_string(t.size()) +
                            " expected, at byte offset " + std::to_string(off));
    }
    for (double& v : t.data) {
      v = std::bit_cast<double>(get<std::uint64_t>(buf, off));
    }
  };
  for (ParamRef& p : params) slurp(*p.value);
  for (Tensor* t : state) slurp(*t);
  if (off != buf.size()) {
    throw CorruptionError("load_model: " + std::to_string(buf.size() - off) +
                          " trailing bytes");
  }
  return model;
}

void write_metrics_csv(const TrainHistory& history,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_metrics_csv: cannot open " + path.string());
  out << "epoch,split,loss,accuracy\n";
  char line[128];
  for (const MetricRow& r : history.rows) {
    std::snprintf(line, sizeof(line), "%d,%s,%.9g,%.9g\n", r.epoch,
                  r.split.c_str(), r.loss, r.accuracy);
    out << line;
  }
  if (!out) throw IoError("write_metrics_csv: write failed for " + path.string());
}

}  // namespace tssc
