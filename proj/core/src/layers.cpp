#include "tssc/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "tssc/errors.hpp"

namespace tssc {

namespace {

using i64 = std::int64_t;

// All parallel loops below give each output element to exactly one thread
// and keep every reduction in a fixed sequential order, so results are
// bit-identical for any thread count.

struct ConvDims {
  i64 n, c_in, h, w;        // input
  i64 c_out, k;             // kernel
  i64 h_out, w_out;         // output
  bool batched;             // rank-4 input
};

ConvDims conv2d_dims(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                     int stride, int pad) {
  if (kernel.rank() != 4 || kernel.dim(2) != kernel.dim(3)) {
    throw ShapeError("conv2d: kernel must be [C_out, C_in, k, k], got " +
                     shape_str(kernel.shape));
  }
  if (x.rank() != 3 && x.rank() != 4) {
    throw ShapeError("conv2d: input must be [C, H, W] or [N, C, H, W], got " +
                     shape_str(x.shape));
  }
  ConvDims d;
  d.batched = x.rank() == 4;
  d.n = d.batched ? static_cast<i64>(x.dim(0)) : 1;
  d.c_in = static_cast<i64>(x.dim(d.batched ? 1 : 0));
  d.h = static_cast<i64>(x.dim(d.batched ? 2 : 1));
  d.w = static_cast<i64>(x.dim(d.batched ? 3 : 2));
  d.c_out = static_cast<i64>(kernel.dim(0));
  d.k = static_cast<i64>(kernel.dim(2));
  if (static_cast<i64>(kernel.dim(1)) != d.c_in) {
    throw ShapeError("conv2d: input " + shape_str(x.shape) + " vs kernel " +
                     shape_str(kernel.shape));
  }
  if (bias.size() != static_cast<std::size_t>(d.c_out)) {
    throw ShapeError("conv2d: bias size " + std::to_string(bias.size()) +
                     " vs C_out " + std::to_string(d.c_out));
  }
  d.h_out = (d.h + 2 * pad - d.k) / stride + 1;
  d.w_out = (d.w + 2 * pad - d.k) / stride + 1;
  if (d.h_out < 1 || d.w_out < 1) {
    throw ShapeError("conv2d: kernel does not fit input " + shape_str(x.shape));
  }
  return d;
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                      int stride, int pad) {
  const ConvDims d = conv2d_dims(x, kernel, bias, stride, pad);

  Tensor y(d.batched
               ? std::vector<std::size_t>{static_cast<std::size_t>(d.n),
                                          static_cast<std::size_t>(d.c_out),
                                          static_cast<std::size_t>(d.h_out),
                                          static_cast<std::size_t>(d.w_out)}
               : std::vector<std::size_t>{static_cast<std::size_t>(d.c_out),
                                          static_cast<std::size_t>(d.h_out),
                                          static_cast<std::size_t>(d.w_out)});

  const double* xp = x.ptr();
  const double* wp = kernel.ptr();
  const double* bp = bias.ptr();
  double* yp = y.ptr();

#pragma omp parallel for schedule(static)
  for (i64 nc = 0; nc < d.n * d.c_out; ++nc) {
    const i64 n = nc / d.c_out;
    const i64 co = nc % d.c_out;
    for (i64 oy = 0; oy < d.h_out; ++oy) {
      for (i64 ox = 0; ox < d.w_out; ++ox) {
        double acc = bp[co];
        for (i64 ci = 0; ci < d.c_in; ++ci) {
          const double* xplane = xp + ((n * d.c_in + ci) * d.h) * d.w;
          const double* wplane = wp + ((co * d.c_in + ci) * d.k) * d.k;
          for (i64 ky = 0; ky < d.k; ++ky) {
            const i64 iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= d.h) continue;
            const double* xrow = xplane + iy * d.w;
            const double* wrow = wplane + ky * d.k;
            for (i64 kx = 0; kx < d.k; ++kx) {
              const i64 ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= d.w) continue;
              acc += xrow[ix] * wrow[kx];
            }
          }
        }
        yp[((nc)*d.h_out + oy) * d.w_out + ox] = acc;
      }
    }
  }
  return y;
}

void conv2d_backward(const Tensor& x, const Tensor& kernel, const Tensor& dy,
                     int stride, int pad, Tensor& dx, Tensor& dkernel,
                     Tensor& dbias) {
  Tensor bias_probe(std::vector<std::size_t>{kernel.dim(0)});
  const ConvDims dd = conv2d_dims(x, kernel, bias_probe, stride, pad);

  if (static_cast<i64>(dy.size()) != dd.n * dd.c_out * dd.h_out * dd.w_out) {
    throw ShapeError("conv2d backward: dy " + shape_str(dy.shape) +
                     " does not match forward output");
  }

  dx = Tensor(x.shape);
  dkernel = Tensor(kernel.shape);
  dbias = Tensor(std::vector<std::size_t>{kernel.dim(0)});

  const double* xp = x.ptr();
  const double* wp = kernel.ptr();
  const double* gp = dy.ptr();

  // dx: gather over output positions that touched each input element.
  double* dxp = dx.ptr();
#pragma omp parallel for schedule(static)
  for (i64 nc = 0; nc < dd.n * dd.c_in; ++nc) {
    const i64 n = nc / dd.c_in;
    const i64 ci = nc % dd.c_in;
    for (i64 iy = 0; iy < dd.h; ++iy) {
      for (i64 ix = 0; ix < dd.w; ++ix) {
        double acc = 0.0;
        for (i64 co = 0; co < dd.c_out; ++co) {
          const double* gplane = gp + ((n * dd.c_out + co) * dd.h_out) * dd.w_out;
          const double* wplane = wp + ((co * dd.c_in + ci) * dd.k) * dd.k;
          for (i64 ky = 0; ky < dd.k; ++ky) {
            const i64 oy_num = iy + pad - ky;
            if (oy_num < 0 || oy_num % stride != 0) continue;
            const i64 oy = oy_num / stride;
            if (oy >= dd.h_out) continue;
            for (i64 kx = 0; kx < dd.k; ++kx) {
              const i64 ox_num = ix + pad - kx;
              if (ox_num < 0 || ox_num % stride != 0) continue;
              const i64 ox = ox_num / stride;
              if (ox >= dd.w_out) continue;
              acc += gplane[oy * dd.w_out + ox] * wplane[ky * dd.k + kx];
            }
          }
        }
        dxp[(nc * dd.h + iy) * dd.w + ix] = acc;
      }
    }
  }

  // dkernel and dbias: each element owns its reduction over (n, oy, ox).
  double* dwp = dkernel.ptr();
  double* dbp = dbias.ptr();
#pragma omp parallel for schedule(static)
  for (i64 co = 0; co < dd.c_out; ++co) {
    for (i64 ci = 0; ci < dd.c_in; ++ci) {
      for (i64 ky = 0; ky < dd.k; ++ky) {
        for (i64 kx = 0; kx < dd.k; ++kx) {
          double acc = 0.0;
          for (i64 n = 0; n < dd.n; ++n) {
            const double* gplane = gp + ((n * dd.c_out + co) * dd.h_out) * dd.w_out;
            const double* xplane = xp + ((n * dd.c_in + ci) * dd.h) * dd.w;
            for (i64 oy = 0; oy < dd.h_out; ++oy) {
              const i64 iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= dd.h) continue;
              for (i64 ox = 0; ox < dd.w_out; ++ox) {
                const i64 ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= dd.w) continue;
                acc += gplane[oy * dd.w_out + ox] * xplane[iy * dd.w + ix];
              }
            }
          }
          dwp[((co * dd.c_in + ci) * dd.k + ky) * dd.k + kx] = acc;
        }
      }
    }
    double acc = 0.0;
    for (i64 n = 0; n < dd.n; ++n) {
      const double* gplane = gp + ((n * dd.c_out + co) * dd.h_out) * dd.w_out;
      for (i64 i = 0; i < dd.h_out * dd.w_out; ++i) acc += gplane[i];
    }
    dbp[co] = acc;
  }
}

Tensor conv1d_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                      int pad) {
  if (x.rank() != 3) {
    throw ShapeError("conv1d: input must be [N, C, L], got " + shape_str(x.shape));
  }
  if (kernel.rank() != 3 || kernel.dim(1) != x.dim(1)) {
    throw ShapeError("conv1d: input " + shape_str(x.shape) + " vs kernel " +
                     shape_str(kernel.shape));
  }
  const i64 n_b = static_cast<i64>(x.dim(0));
  const i64 c_in = static_cast<i64>(x.dim(1));
  const i64 len = static_cast<i64>(x.dim(2));
  const i64 c_out = static_cast<i64>(kernel.dim(0));
  const i64 k = static_cast<i64>(kernel.dim(2));
  const i64 l_out = len + 2 * pad - k + 1;
  if (l_out < 1) throw ShapeError("conv1d: kernel does not fit input");
  if (bias.size() != static_cast<std::size_t>(c_out)) {
    throw ShapeError("conv1d: bias size mismatch");
  }

  Tensor y(std::vector<std::size_t>{static_cast<std::size_t>(n_b),
                                    static_cast<std::size_t>(c_out),
                                    static_cast<std::size_t>(l_out)});
  const double* xp = x.ptr();
  const double* wp = kernel.ptr();
  const double* bp = bias.ptr();
  double* yp = y.ptr();

#pragma omp parallel for schedule(static)
  for (i64 nc = 0; nc < n_b * c_out; ++nc) {
    const i64 n = nc / c_out;
    const i64 co = nc % c_out;
    double* yrow = yp + nc * l_out;
    for (i64 t = 0; t < l_out; ++t) yrow[t] = bp[co];
    for (i64 ci = 0; ci < c_in; ++ci) {
      const double* xrow = xp + (n * c_in + ci) * len;
      const double* wrow = wp + (co * c_in + ci) * k;
      for (i64 kk = 0; kk < k; ++kk) {
        const double wv = wrow[kk];
        const i64 t_lo = std::max<i64>(0, pad - kk);
        const i64 t_hi = std::min<i64>(l_out, len + pad - kk);
        const double* xoff = xrow - pad + kk;
        for (i64 t = t_lo; t < t_hi; ++t) yrow[t] += wv * xoff[t];
      }
    }
  }
  return y;
}

void conv1d_backward(const Tensor& x, const Tensor& kernel, const Tensor& dy,
                     int pad, Tensor& dx, Tensor& dkernel, Tensor& dbias) {
  const i64 n_b = static_cast<i64>(x.dim(0));
  const i64 c_in = static_cast<i64>(x.dim(1));
  const i64 len = static_cast<i64>(x.dim(2));
  const i64 c_out = static_cast<i64>(kernel.dim(0));
  const i64 k = static_cast<i64>(kernel.dim(2));
  const i64 l_out = len + 2 * pad - k + 1;
  if (static_cast<i64>(dy.size()) != n_b * c_out * l_out) {
    throw ShapeError("conv1d backward: dy does not match forward output");
  }

  dx = Tensor(x.shape);
  dkernel = Tensor(kernel.shape);
  dbias = Tensor(std::vector<std::size_t>{static_cast<std::size_t>(c_out)});

  const double* xp = x.ptr();
  const double* wp = kernel.ptr();
  const double* gp = dy.ptr();
  double* dxp = dx.ptr();
  double* dwp = dkernel.ptr();
  double* dbp = dbias.ptr();

#pragma omp parallel for schedule(static)
  for (i64 nc = 0; nc < n_b * c_in; ++nc) {
    const i64 n = nc / c_in;
    const i64 ci = nc % c_in;
    double* dxrow = dxp + nc * len;
    for (i64 t = 0; t < len; ++t) {
      double acc = 0.0;
      for (i64 co = 0; co < c_out; ++co) {
        const double* grow = gp + (n * c_out + co) * l_out;
        const double* wrow = wp + (co * c_in + ci) * k;
        for (i64 kk = 0; kk < k; ++kk) {
          const i64 o = t + pad - kk;
          if (o < 0 || o >= l_out) continue;
          acc += grow[o] * wrow[kk];
        }
      }
      dxrow[t] = acc;
    }
  }

#pragma omp parallel for schedule(static)
  for (i64 co = 0; co < c_out; ++co) {
    for (i64 ci = 0; ci < c_in; ++ci) {
      double* dwrow = dwp + (co * c_in + ci) * k;
      for (i64 kk = 0; kk < k; ++kk) {
        double acc = 0.0;
        for (i64 n = 0; n < n_b; ++n) {
          const double* grow = gp + (n * c_out + co) * l_out;
          const double* xrow = xp + (n * c_in + ci) * len;
          const i64 t_lo = std::max<i64>(0, pad - kk);
          const i64 t_hi = std::min<i64>(l_out, len + pad - kk);
          const double* xoff = xrow - pad + kk;
          for (i64 t = t_lo; t < t_hi; ++t) acc += grow[t] * xoff[t];
        }
        dwrow[kk] = acc;
      }
    }
    double acc = 0.0;
    for (i64 n = 0; n < n_b; ++n) {
      const double* grow = gp + (n * c_out + co) * l_out;
      for (i64 t = 0; t < l_out; ++t) acc += grow[t];
    }
    dbp[co] = acc;
  }
}

SoftmaxLoss softmax_cross_entropy(const Tensor& logits,
                                  std::span<const std::uint8_t> labels) {
  if (logits.rank() != 2) {
    throw ShapeError("softmax_cross_entropy: logits must be [N, K], got " +
                     shape_str(logits.shape));
  }
  const std::size_t n = logits.dim(0);
  const std::size_t k = logits.dim(1);
  if (labels.size() != n) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(n) + " rows");
  }

  SoftmaxLoss out;
  out.probs = Tensor(logits.shape);
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= k) {
      throw std::domain_error("softmax_cross_entropy: label " +
                              std::to_string(labels[i]) + " out of range");
    }
    const double* z = logits.ptr() + i * k;
    double* p = out.probs.ptr() + i * k;
    double zmax = z[0];
    for (std::size_t j = 1; j < k; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      p[j] = std::exp(z[j] - zmax);
      sum += p[j];
    }
    for (std::size_t j = 0; j < k; ++j) p[j] /= sum;
    // log-sum-exp form keeps the loss finite for extreme logits
    loss_sum += zmax + std::log(sum) - z[labels[i]];
  }
  out.loss = loss_sum / static_cast<double>(n);
  return out;
}

Tensor softmax_cross_entropy_backward(const Tensor& probs,
                                      std::span<const std::uint8_t> labels) {
  const std::size_t n = probs.dim(0);
  const std::size_t k = probs.dim(1);
  Tensor d(probs.shape);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = probs.ptr() + i * k;
    double* g = d.ptr() + i * k;
    for (std::size_t j = 0; j < k; ++j) g[j] = p[j] * inv_n;
    g[labels[i]] -= inv_n;
  }
  return d;
}

// --- Conv2d -----------------------------------------------------------------

Conv2d::Conv2d(int in_c, int out_c, int k, int stride_, int pad_, Rng& rng)
    : in_channels(in_c),
      out_channels(out_c),
      kernel(k),
      stride(stride_),
      pad(pad_),
      w(std::vector<std::size_t>{static_cast<std::size_t>(out_c),
                                 static_cast<std::size_t>(in_c),
                                 static_cast<std::size_t>(k),
                                 static_cast<std::size_t>(k)}),
      b(std::vector<std::size_t>{static_cast<std::size_t>(out_c)}),
      dw(w.shape),
      db(b.shape) {
  he_uniform_fill(w, static_cast<std::size_t>(in_c) * k * k, rng);
}

Tensor Conv2d::forward(const Tensor& x, bool train) {
  if (train) x_cache_ = x;
  return conv2d_forward(x, w, b, stride, pad);
}

Tensor Conv2d::backward(const Tensor& dy) {
  if (x_cache_.empty()) throw std::logic_error("conv2d: backward before forward");
  Tensor dx;
  conv2d_backward(x_cache_, w, dy, stride, pad, dx, dw, db);
  return dx;
}

void Conv2d::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&w, &dw, "conv2d.w"});
  out.push_back({&b, &db, "conv2d.b"});
}

// --- Conv1d -----------------------------------------------------------------

Conv1d::Conv1d(int in_c, int out_c, int k, int pad_, Rng& rng)
    : in_channels(in_c),
      out_channels(out_c),
      kernel(k),
      pad(pad_),
      w(std::vector<std::size_t>{static_cast<std::size_t>(out_c),
                                 static_cast<std::size_t>(in_c),
                                 static_cast<std::size_t>(k)}),
      b(std::vector<std::size_t>{static_cast<std::size_t>(out_c)}),
      dw(w.shape),
      db(b.shape) {
  he_uniform_fill(w, static_cast<std::size_t>(in_c) * k, rng);
}

Tensor Conv1d::forward(const Tensor& x, bool train) {
  if (train) x_cache_ = x;
  return conv1d_forward(x, w, b, pad);
}

Tensor Conv1d::backward(const Tensor& dy) {
  if (x_cache_.empty()) throw std::logic_error("conv1d: backward before forward");
  Tensor dx;
  conv1d_backward(x_cache_, w, dy, pad, dx, dw, db);
  return dx;
}

void Conv1d::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&w, &dw, "conv1d.w"});
  out.push_back({&b, &db, "conv1d.b"});
}

// --- BatchNorm ---------------------------------------------------------------

BatchNorm::BatchNorm(int channels_)
    : channels(channels_),
      gamma(std::vector<std::size_t>{static_cast<std::size_t>(channels_)}),
      beta(gamma.shape),
      dgamma(gamma.shape),
      dbeta(gamma.shape),
      run_mean(gamma.shape),
      run_var(gamma.shape) {
  gamma.fill(1.0);
  run_var.fill(1.0);
}

Tensor BatchNorm::forward(const Tensor& x, bool train) {
  if (x.rank() < 2 || static_cast<int>(x.dim(1)) != channels) {
    throw ShapeError("batchnorm: expected channel dim " + std::to_string(channels) +
                     ", got input " + shape_str(x.shape));
  }
  const i64 n = static_cast<i64>(x.dim(0));
  const i64 c = channels;
  i64 spatial = 1;
  for (std::size_t i = 2; i < x.rank(); ++i) spatial *= static_cast<i64>(x.dim(i));
  const i64 m = n * spatial;

  Tensor y(x.shape);
  const double* xp = x.ptr();
  double* yp = y.ptr();

  if (!train) {
    for (i64 ch = 0; ch < c; ++ch) {
      const double inv = 1.0 / std::sqrt(run_var[ch] + eps);
      const double g = gamma[ch] * inv;
      const double shift = beta[ch] - g * run_mean[ch];
      for (i64 i = 0; i < n; ++i) {
        const double* xrow = xp + (i * c + ch) * spatial;
        double* yrow = yp + (i * c + ch) * spatial;
        for (i64 s = 0; s < spatial; ++s) yrow[s] = g * xrow[s] + shift;
      }
    }
    return y;
  }

  xhat_cache_ = Tensor(x.shape);
  inv_std_cache_.assign(c, 0.0);
  in_shape_ = x.shape;
  double* hp = xhat_cache_.ptr();

#pragma omp parallel for schedule(static)
  for (i64 ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (i64 i = 0; i < n; ++i) {
      const double* xrow = xp + (i * c + ch) * spatial;
      for (i64 s = 0; s < spatial; ++s) sum += xrow[s];
    }
    const double mean = sum / static_cast<double>(m);
    double sq = 0.0;
    for (i64 i = 0; i < n; ++i) {
      const double* xrow = xp + (i * c + ch) * spatial;
      for (i64 s = 0; s < spatial; ++s) {
        const double d = xrow[s] - mean;
        sq += d * d;
      }
    }
    const double var = sq / static_cast<double>(m);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std_cache_[ch] = inv;

    for (i64 i = 0; i < n; ++i) {
      const double* xrow = xp + (i * c + ch) * spatial;
      double* hrow = hp + (i * c + ch) * spatial;
      double* yrow = yp + (i * c + ch) * spatial;
      for (i64 s = 0; s < spatial; ++s) {
        const double xh = (xrow[s] - mean) * inv;
        hrow[s] = xh;
        yrow[s] = gamma[ch] * xh + beta[ch];
      }
    }
    run_mean[ch] = momentum * run_mean[ch] + (1.0 - momentum) * mean;
    run_var[ch] = momentum * run_var[ch] + (1.0 - momentum) * var;
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& dy) {
  if (xhat_cache_.empty()) throw std::logic_error("batchnorm: backward before forward");
  const i64 n = static_cast<i64>(in_shape_[0]);
  const i64 c = channels;
  i64 spatial = 1;
  for (std::size_t i = 2; i < in_shape_.size(); ++i) spatial *= static_cast<i64>(in_shape_[i]);
  const double m = static_cast<double>(n * spatial);

  Tensor dx(dy.shape);
  const double* gp = dy.ptr();
  const double* hp = xhat_cache_.ptr();
  double* dxp = dx.ptr();

#pragma omp parallel for schedule(static)
  for (i64 ch = 0; ch < c; ++ch) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (i64 i = 0; i < n; ++i) {
      const double* grow = gp + (i * c + ch) * spatial;
      const double* hrow = hp + (i * c + ch) * spatial;
      for (i64 s = 0; s < spatial; ++s) {
        sum_dy += grow[s];
        sum_dy_xhat += grow[s] * hrow[s];
      }
    }
    dbeta[ch] = sum_dy;
    dgamma[ch] = sum_dy_xhat;

    const double g_inv = gamma[ch] * inv_std_cache_[ch];
    const double mean_dy = sum_dy / m;
    const double mean_dy_xhat = sum_dy_xhat / m;
    for (i64 i = 0; i < n; ++i) {
      const double* grow = gp + (i * c + ch) * spatial;
      const double* hrow = hp + (i * c + ch) * spatial;
      double* dxrow = dxp + (i * c + ch) * spatial;
      for (i64 s = 0; s < spatial; ++s) {
        dxrow[s] = g_inv * (grow[s] - mean_dy - hrow[s] * mean_dy_xhat);
      }
    }
  }
  return dx;
}

void BatchNorm::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&gamma, &dgamma, "batchnorm.gamma"});
  out.push_back({&beta, &dbeta, "batchnorm.beta"});
}

void BatchNorm::collect_state(std::vector<Tensor*>& out) {
  out.push_back(&run_mean);
  out.push_back(&run_var);
}

// --- ReLU ---------------------------------------------------------------------

Tensor ReLU::forward(const Tensor& x, bool train) {
  if (train) x_cache_ = x;
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Tensor ReLU::backward(const Tensor& dy) {
  if (x_cache_.empty()) throw std::logic_error("relu: backward before forward");
  Tensor dx(dy.shape);
  for (std::size_t i = 0; i < dy.size(); ++i) {
    dx[i] = x_cache_[i] > 0.0 ? dy[i] : 0.0;
  }
  return dx;
}

// --- pooling -------------------------------------------------------------------

Tensor MaxPool2d::forward(const Tensor& x, bool train) {
  if (x.rank() != 4) {
    throw ShapeError("maxpool2d: input must be [N, C, H, W], got " +
                     shape_str(x.shape));
  }
  const i64 n = static_cast<i64>(x.dim(0));
  const i64 c = static_cast<i64>(x.dim(1));
  const i64 h = static_cast<i64>(x.dim(2));
  const i64 w = static_cast<i64>(x.dim(3));
  const i64 ho = h / 2;
  const i64 wo = w / 2;

  Tensor y(std::vector<std::size_t>{static_cast<std::size_t>(n),
                                    static_cast<std::size_t>(c),
                                    static_cast<std::size_t>(ho),
                                    static_cast<std::size_t>(wo)});
  if (train) {
    in_shape_ = x.shape;
    argmax_.assign(y.size(), 0);
  }
  const double* xp = x.ptr();
  double* yp = y.ptr();

#pragma omp parallel for schedule(static)
  for (i64 nc = 0; nc < n * c; ++nc) {
    const double* xplane = xp + nc * h * w;
    double* yplane = yp + nc * ho * wo;
    for (i64 oy = 0; oy < ho; ++oy) {
      for (i64 ox = 0; ox < wo; ++ox) {
        i64 best = (2 * oy) * w + 2 * ox;
        double bv = xplane[best];
        const i64 cands[3] = {(2 * oy) * w + 2 * ox + 1, (2 * oy + 1) * w + 2 * ox,
                              (2 * oy + 1) * w + 2 * ox + 1};
        for (i64 cand : cands) {
          if (xplane[cand] > bv) {
            bv = xplane[cand];
            best = cand;
          }
        }
        yplane[oy * wo + ox] = bv;
        if (train) {
          argmax_[nc * ho * wo + oy * wo + ox] =
              static_cast<std::uint32_t>(nc * h * w + best);
        }
      }
    }
  }
  return y;
}

Tensor MaxPool2d::backward(const Tensor& dy) {
  if (in_shape_.empty()) throw std::logic_error("maxpool2d: backward before forward");
  Tensor dx(in_shape_);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[argmax_[i]] += dy[i];
  return dx;
}

Tensor MaxPool1d::forward(const Tensor& x, bool train) {
  if (x.rank() != 3) {
    throw ShapeError("maxpool1d: input must be [N, C, L], got " + shape_str(x.shape));
  }
  const i64 n = static_cast<i64>(x.dim(0));
  const i64 c = static_cast<i64>(x.dim(1));
  const i64 len = static_cast<i64>(x.dim(2));
  const i64 wdw = window_;
  const i64 lo = len / wdw;

  Tensor y(std::vector<std::size_t>{static_cast<std::size_t>(n),
                                    static_cast<std::size_t>(c),
                                    static_cast<std::size_t>(lo)});
  if (train) {
    in_shape_ = x.shape;
    argmax_.assign(y.size(), 0);
  }
  const double* xp = x.ptr();
  double* yp = y.ptr();

#pragma omp parallel for schedule(static)
  for (i64 nc = 0; nc < n * c; ++nc) {
    const double* xrow = xp + nc * len;
    double* yrow = yp + nc * lo;
    for (i64 o = 0; o < lo; ++o) {
      i64 best = o * wdw;
      double bv = xrow[best];
      for (i64 j = 1; j < wdw; ++j) {
        if (xrow[o * wdw + j] > bv) {
          bv = xrow[o * wdw + j];
          best = o * wdw + j;
        }
      }
      yrow[o] = bv;
      if (train) {
        argmax_[nc * lo + o] = static_cast<std::uint32_t>(nc * len + best);
      }
    }
  }
  return y;
}

Tensor MaxPool1d::backward(const Tensor& dy) {
  if (in_shape_.empty()) throw std::logic_error("maxpool1d: backward before forward");
  Tensor dx(in_shape_);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[argmax_[i]] += dy[i];
  return dx;
}

Tensor GlobalAvgPool1d::forward(const Tensor& x, bool train) {
  if (x.rank() != 3) {
    throw ShapeError("global_avg_pool1d: input must be [N, C, L], got " +
                     shape_str(x.shape));
  }
  if (train) in_shape_ = x.shape;
  const std::size_t n = x.dim(0);
  const std::size_t c = x.dim(1);
  const std::size_t len = x.dim(2);
  Tensor y(std::vector<std::size_t>{n, c});
  for (std::size_t nc = 0; nc < n * c; ++nc) {
    double acc = 0.0;
    const double* xrow = x.ptr() + nc * len;
    for (std::size_t s = 0; s < len; ++s) acc += xrow[s];
    y[nc] = acc / static_cast<double>(len);
  }
  return y;
}

Tensor GlobalAvgPool1d::backward(const Tensor& dy) {
  if (in_shape_.empty()) {
    throw std::logic_error("global_avg_pool1d: backward before forward");
  }
  Tensor dx(in_shape_);
  const std::size_t len = in_shape_[2];
  const double inv = 1.0 / static_cast<double>(len);
  for (std::size_t nc = 0; nc < dy.size(); ++nc) {
    double* dxrow = dx.ptr() + nc * len;
    const double g = dy[nc] * inv;
    for (std::size_t s = 0; s < len; ++s) dxrow[s] = g;
  }
  return dx;
}

Tensor Flatten::forward(const Tensor& x, bool train) {
  if (train) in_shape_ = x.shape;
  const std::size_t n = x.dim(0);
  return x.reshaped({n, x.size() / n});
}

Tensor Flatten::backward(const Tensor& dy) {
  if (in_shape_.empty()) throw std::logic_error("flatten: backward before forward");
  return dy.reshaped(in_shape_);
}

// --- Dense ----------------------------------------------------------------------

Dense::Dense(int in_f, int out_f, Rng& rng)
    : in_features(in_f),
      out_features(out_f),
      w(std::vector<std::size_t>{static_cast<std::size_t>(out_f),
                                 static_cast<std::size_t>(in_f)}),
      b(std::vector<std::size_t>{static_cast<std::size_t>(out_f)}),
      dw(w.shape),
      db(b.shape) {
  he_uniform_fill(w, static_cast<std::size_t>(in_f), rng);
}

Tensor Dense::forward(const Tensor& x, bool train) {
  if (x.rank() != 2 || static_cast<int>(x.dim(1)) != in_features) {
    throw ShapeError("dense: expected [N, " + std::to_string(in_features) +
                     "], got " + shape_str(x.shape));
  }
  if (train) x_cache_ = x;
  const i64 n = static_cast<i64>(x.dim(0));
  Tensor y(std::vector<std::size_t>{static_cast<std::size_t>(n),
                                    static_cast<std::size_t>(out_features)});
  const double* xp = x.ptr();
  double* yp = y.ptr();

#pragma omp parallel for schedule(static)
  for (i64 i = 0; i < n; ++i) {
    const double* xrow = xp + i * in_features;
    double* yrow = yp + i * out_features;
    for (i64 o = 0; o < out_features; ++o) {
      const double* wrow = w.ptr() + o * in_features;
      double acc = b[o];
      for (i64 f = 0; f < in_features; ++f) acc += xrow[f] * wrow[f];
      yrow[o] = acc;
    }
  }
  return y;
}

Tensor Dense::backward(const Tensor& dy) {
  if (x_cache_.empty()) throw std::logic_error("dense: backward before forward");
  const i64 n = static_cast<i64>(dy.dim(0));
  Tensor dx(x_cache_.shape);
  const double* gp = dy.ptr();
  const double* xp = x_cache_.ptr();
  double* dxp = dx.ptr();

#pragma omp parallel for schedule(static)
  for (i64 i = 0; i < n; ++i) {
    const double* grow = gp + i * out_features;
    double* dxrow = dxp + i * in_features;
    for (i64 f = 0; f < in_features; ++f) dxrow[f] = 0.0;
    for (i64 o = 0; o < out_features; ++o) {
      const double g = grow[o];
      const double* wrow = w.ptr() + o * in_features;
      for (i64 f = 0; f < in_features; ++f) dxrow[f] += g * wrow[f];
    }
  }

#pragma omp parallel for schedule(static)
  for (i64 o = 0; o < out_features; ++o) {
    double* dwrow = dw.ptr() + o * in_features;
    for (i64 f = 0; f < in_features; ++f) dwrow[f] = 0.0;
    double bacc = 0.0;
    for (i64 i = 0; i < n; ++i) {
      const double g = gp[i * out_features + o];
      const double* xrow = xp + i * in_features;
      for (i64 f = 0; f < in_features; ++f) dwrow[f] += g * xrow[f];
      bacc += g;
    }
    db[o] = bacc;
  }
  return dx;
}

void Dense::collect_params(std::vector<ParamRef>& out) {
  out.push_back({&w, &dw, "dense.w"});
  out.push_back({&b, &db, "dense.b"});
}

void he_uniform_fill(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double& v : t.data) v = rng.uniform(-limit, limit);
}

}  // namespace tssc
