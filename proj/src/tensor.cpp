#include "rcd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rcd/error.hpp"

namespace rcd {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ')';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  for (auto e : shape_) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " +
                                 shape_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto e : shape_) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " +
                                 shape_string(shape_));
  }
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
  }
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank mismatch for shape " + shape_string(shape_));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= shape_[axis]) throw ShapeError("index out of range");
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double& Tensor::at(std::initializer_list<std::size_t> index) {
  return data_[offset(index)];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(index)];
}

std::span<double> Tensor::plane(std::size_t c) {
  const std::size_t n = shape_[1] * shape_[2];
  return std::span<double>(data_).subspan(c * n, n);
}

std::span<const double> Tensor::plane(std::size_t c) const {
  const std::size_t n = shape_[1] * shape_[2];
  return std::span<const double>(data_).subspan(c * n, n);
}

Tensor& Tensor::operator+=(const Tensor& other) {
  require_same_shape(*this, other, "add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  require_same_shape(*this, other, "subtract");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

void Tensor::axpy(double s, const Tensor& other) {
  require_same_shape(*this, other, "axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(double s, Tensor a) { return a *= s; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

double inner(const Tensor& x, const Tensor& y) {
  require_same_shape(x, y, "inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double frob_norm_sq(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v * v;
  return acc;
}

double max_abs(const Tensor& x) {
  double m = 0.0;
  for (double v : x.values()) m = std::max(m, std::abs(v));
  return m;
}

void require_plane(const Tensor& t, const char* what) {
  if (t.rank() != 2 || t.empty()) {
    throw ShapeError(std::string(what) + ": expected a non-empty H×W plane, got " +
                     shape_string(t.shape()));
  }
}

void require_stack(const Tensor& t, const char* what) {
  if (t.rank() != 3 || t.empty()) {
    throw ShapeError(std::string(what) + ": expected a C×H×W stack, got " +
                     shape_string(t.shape()));
  }
}

void require_image(const Tensor& t, const char* what) {
  require_stack(t, what);
  if (t.dim(0) != 3) {
    throw ShapeError(std::string(what) + ": expected 3 channels, got " +
                     shape_string(t.shape()));
  }
}

Image make_image(std::size_t height, std::size_t width, double fill) {
  return Tensor({3, height, width}, fill);
}

RainMapStack make_maps(std::size_t count, std::size_t height,
                       std::size_t width) {
  return Tensor({count, height, width});
}

Tensor clamp(Tensor t, double lo, double hi) {
  for (auto& v : t.values()) v = std::clamp(v, lo, hi);
  return t;
}

}  // namespace rcd
