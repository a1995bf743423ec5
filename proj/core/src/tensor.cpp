#include "tssc/tensor.hpp"

#include <cmath>
#include <sstream>

#include "tssc/errors.hpp"

namespace tssc {

Tensor::Tensor(std::vector<std::size_t> s)
    : shape(std::move(s)), data(numel(shape), 0.0) {}

std::size_t Tensor::numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

Tensor Tensor::reshaped(std::vector<std::size_t> s) const {
  if (numel(s) != size()) {
    throw ShapeError("reshape from " + shape_str(shape) + " to " + shape_str(s));
  }
  Tensor out;
  out.shape = std::move(s);
  out.data = data;
  return out;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void require_shape(const Tensor& t, const std::vector<std::size_t>& shape,
                   const char* what) {
  if (t.shape != shape) {
    throw ShapeError(std::string(what) + ": expected " + shape_str(shape) +
                     ", got " + shape_str(t.shape));
  }
}

void require_finite(const Tensor& t, const char* where) {
  for (double v : t.data) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(where) + ": non-finite activation");
    }
  }
}

}  // namespace tssc
