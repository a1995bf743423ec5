#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tssc {

// Dense row-major tensor of doubles. Shape conventions used by the
// network code: images [N, C, H, W], series [N, C, L], features [N, F].
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  static std::size_t numel(const std::vector<std::size_t>& shape);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape[i]; }
  bool empty() const { return data.empty(); }

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  void fill(double v);
  Tensor reshaped(std::vector<std::size_t> s) const;  // same numel
};

bool same_shape(const Tensor& a, const Tensor& b);
std::string shape_str(const std::vector<std::size_t>& shape);

// Throws ShapeError unless the two shapes match.
void require_shape(const Tensor& t, const std::vector<std::size_t>& shape,
                   const char* what);

// Throws NumericError naming `where` if any element is non-finite.
void require_finite(const Tensor& t, const char* where);

}  // namespace tssc
