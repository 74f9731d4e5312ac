#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rcd {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

// Dense row-major array of doubles, last index fastest.
//
// Domain objects are tensors with fixed rank conventions:
//   Plane         {H, W}
//   Image         {3, H, W}      channel slowest
//   RainMapStack  {N, H, W}
//   conv filters  {k, k, in, out}
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  // Contiguous H×W slice of a rank-3 tensor.
  std::span<double> plane(std::size_t c);
  std::span<const double> plane(std::size_t c) const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double s);

  // this += s * other
  void axpy(double s, const Tensor& other);
  void fill(double v);

  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(double s, Tensor a);

std::size_t shape_size(const Shape& shape);
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

double inner(const Tensor& x, const Tensor& y);
double frob_norm_sq(const Tensor& x);
double max_abs(const Tensor& x);

using Plane = Tensor;
using Image = Tensor;
using RainMapStack = Tensor;

// Shape helpers; all throw ShapeError on violation.
void require_plane(const Tensor& t, const char* what);
void require_stack(const Tensor& t, const char* what);
void require_image(const Tensor& t, const char* what);

Image make_image(std::size_t height, std::size_t width, double fill = 0.0);
RainMapStack make_maps(std::size_t count, std::size_t height,
                       std::size_t width);

inline std::size_t channels(const Tensor& stack) { return stack.dim(0); }
inline std::size_t height(const Tensor& stack) { return stack.dim(1); }
inline std::size_t width(const Tensor& stack) { return stack.dim(2); }

Tensor clamp(Tensor t, double lo, double hi);

}  // namespace rcd
