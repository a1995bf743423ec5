#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tssc/rng.hpp"
#include "tssc/tensor.hpp"

namespace tssc {

// --- functional ops ---------------------------------------------------------
// Inputs are [N, C, H, W] (or [C, H, W], treated as a batch of one, with a
// matching-rank result). Kernels are [C_out, C_in, k, k]; cross-correlation
// with zero padding; output spatial dim = floor((H + 2 pad - k) / stride) + 1.

Tensor conv2d_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                      int stride, int pad);
void conv2d_backward(const Tensor& x, const Tensor& kernel, const Tensor& dy,
                     int stride, int pad, Tensor& dx, Tensor& dkernel,
                     Tensor& dbias);

// 1-D counterparts on [N, C, L] with kernels [C_out, C_in, k], stride 1.
Tensor conv1d_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                      int pad);
void conv1d_backward(const Tensor& x, const Tensor& kernel, const Tensor& dy,
                     int pad, Tensor& dx, Tensor& dkernel, Tensor& dbias);

// Mean cross-entropy over the batch, with max-subtracted softmax.
struct SoftmaxLoss {
  double loss = 0.0;
  Tensor probs;  // [N, K], rows sum to 1
};
SoftmaxLoss softmax_cross_entropy(const Tensor& logits,
                                  std::span<const std::uint8_t> labels);
// d loss / d logits = (probs - onehot) / N.
Tensor softmax_cross_entropy_backward(const Tensor& probs,
                                      std::span<const std::uint8_t> labels);

// --- layers -----------------------------------------------------------------

struct ParamRef {
  Tensor* value;
  Tensor* grad;
  std::string name;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual const char* name() const = 0;
  // `train` controls batch-statistics usage and cache retention; backward
  // is only valid after a forward with train = true.
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  virtual Tensor backward(const Tensor& dy) = 0;
  virtual void collect_params(std::vector<ParamRef>& out) {}
  // Non-trained tensors that belong in a checkpoint (running statistics).
  virtual void collect_state(std::vector<Tensor*>& out) {}
};

class Conv2d : public Layer {
 public:
  Conv2d(int in_c, int out_c, int k, int stride, int pad, Rng& rng);
  const char* name() const override { return "conv2d"; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;

  int in_channels, out_channels, kernel, stride, pad;
  Tensor w, b, dw, db;

 private:
  Tensor x_cache_;
};

class Conv1d : public Layer {
 public:
  Conv1d(int in_c, int out_c, int k, int pad, Rng& rng);
  const char* name() const override { return "conv1d"; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;

  int in_channels, out_channels, kernel, pad;
  Tensor w, b, dw, db;

 private:
  Tensor x_cache_;
};

// Per-channel normalization over batch and spatial dims of [N, C, ...].
// Train mode uses batch statistics (eps 1e-5) and updates running
// statistics with momentum 0.9; eval mode uses the running statistics.
class BatchNorm : public Layer {
 public:
  explicit BatchNorm(int channels);
  const char* name() const override { return "batchnorm"; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;
  void collect_state(std::vector<Tensor*>& out) override;

  int channels;
  double eps = 1e-5;
  double momentum = 0.9;
  Tensor gamma, beta, dgamma, dbeta;
  Tensor run_mean, run_var;

 private:
  Tensor xhat_cache_;
  std::vector<double> inv_std_cache_;
  std::vector<std::size_t> in_shape_;
};

class ReLU : public Layer {
 public:
  const char* name() const override { return "relu"; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  Tensor x_cache_;
};

// 2x2 window, stride 2; odd trailing rows/columns are dropped. Gradient
// flows to the first maximal element of each window.
class MaxPool2d : public Layer {
 public:
  const char* name() const override { return "maxpool2d"; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  std::vector<std::size_t> in_shape_;
  std::vector<std::uint32_t> argmax_;
};

// Window w, stride w over [N, C, L].
class MaxPool1d : public Layer {
 public:
  explicit MaxPool1d(int window) : window_(window) {}
  const char* name() const override { return "maxpool1d"; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  int window_;
  std::vector<std::size_t> in_shape_;
  std::vector<std::uint32_t> argmax_;
};

// [N, C, L] -> [N, C].
class GlobalAvgPool1d : public Layer {
 public:
  const char* name() const override { return "global_avg_pool1d"; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  std::vector<std::size_t> in_shape_;
};

class Flatten : public Layer {
 public:
  const char* name() const override { return "flatten"; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  std::vector<std::size_t> in_shape_;
};

class Dense : public Layer {
 public:
  Dense(int in_f, int out_f, Rng& rng);
  const char* name() const override { return "dense"; }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<ParamRef>& out) override;

  int in_features, out_features;
  Tensor w, b, dw, db;  // w is [out, in]

 private:
  Tensor x_cache_;
};

// He-uniform fill: U(-limit, limit) with limit = sqrt(6 / fan_in).
void he_uniform_fill(Tensor& t, std::size_t fan_in, Rng& rng);

}  // namespace tssc
