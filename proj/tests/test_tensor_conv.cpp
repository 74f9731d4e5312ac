#include <doctest.h>

#include <Eigen/Dense>

#include "rcd/conv.hpp"
#include "rcd/error.hpp"
#include "rcd/tensor.hpp"
#include "support.hpp"

using namespace rcd;
using rcd::test::random_tensor;

namespace {

// Zero-padded cross-correlation written as plainly as possible.
Plane direct_correlation(const Plane& x, const Plane& kernel) {
  const long h = x.dim(0), w = x.dim(1), k = kernel.dim(0), p = k / 2;
  Plane out({x.dim(0), x.dim(1)});
  for (long i = 0; i < h; ++i) {
    for (long j = 0; j < w; ++j) {
      double sum = 0.0;
      for (long u = 0; u < k; ++u) {
        for (long v = 0; v < k; ++v) {
          const long r = i + u - p, c = j + v - p;
          if (r < 0 || r >= h || c < 0 || c >= w) continue;
          sum += kernel.at({std::size_t(u), std::size_t(v)}) *
                 x.at({std::size_t(r), std::size_t(c)});
        }
      }
      out.at({std::size_t(i), std::size_t(j)}) = sum;
    }
  }
  return out;
}

// The correlation as an (H*W) x (H*W) matrix acting on row-major planes.
Eigen::MatrixXd correlation_matrix(std::size_t h, std::size_t w, const Plane& kernel) {
  const long k = kernel.dim(0), p = k / 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(h * w, h * w);
  for (long i = 0; i < long(h); ++i) {
    for (long j = 0; j < long(w); ++j) {
      for (long u = 0; u < k; ++u) {
        for (long v = 0; v < k; ++v) {
          const long r = i + u - p, c = j + v - p;
          if (r < 0 || r >= long(h) || c < 0 || c >= long(w)) continue;
          a(i * w + j, r * w + c) += kernel.at({std::size_t(u), std::size_t(v)});
        }
      }
    }
  }
  return a;
}

Eigen::VectorXd as_vector(const Tensor& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.data().data(), t.size());
}

}  // namespace

TEST_CASE("tensor construction and indexing") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  t.at({1, 2}) = 5.0;
  CHECK(t[5] == 5.0);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>(3)), ShapeError);
  CHECK_THROWS_AS(t.at({2, 0}), ShapeError);
  CHECK_THROWS_AS(t.at({0}), ShapeError);
}

TEST_CASE("tensor arithmetic matches elementwise loops") {
  std::mt19937_64 rng(1);
  const Tensor a = random_tensor({5}, rng), b = random_tensor({5}, rng);
  const Tensor sum = a + b, diff = a - b, scaled = 2.5 * a;
  double dot = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(sum[i] == a[i] + b[i]);
    CHECK(diff[i] == a[i] - b[i]);
    CHECK(scaled[i] == 2.5 * a[i]);
    dot += a[i] * b[i];
    sq += a[i] * a[i];
  }
  CHECK(inner(a, b) == doctest::Approx(dot).epsilon(1e-15));
  CHECK(frob_norm_sq(a) == doctest::Approx(sq).epsilon(1e-15));
  Tensor c = a;
  c.axpy(-1.0, a);
  CHECK(max_abs(c) == 0.0);
  CHECK_THROWS_AS(a + Tensor({4}), ShapeError);
}

TEST_CASE("clamp and finiteness") {
  Tensor t({3}, std::vector<double>{-1.0, 0.5, 2.0});
  const Tensor c = clamp(t, 0.0, 1.0);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.5);
  CHECK(c[2] == 1.0);
  CHECK(t.all_finite());
  t[1] = std::nan("");
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("conv2d_same on a ramp with an all-ones kernel") {
  Plane x({3, 3});
  for (std::size_t i = 0; i < 9; ++i) x[i] = double(i + 1);
  const Plane ones({3, 3}, 1.0);
  const Plane y = conv2d_same(x, ones);
  CHECK(y == direct_correlation(x, ones));
  CHECK(y.at({1, 1}) == 45.0);
  CHECK(y.at({0, 0}) == 12.0);
  CHECK(y.at({2, 2}) == 28.0);
}

TEST_CASE("conv2d_same agrees with direct summation on small shapes") {
  std::mt19937_64 rng(2);
  for (std::size_t h = 1; h <= 6; ++h) {
    for (std::size_t w = 1; w <= 6; ++w) {
      for (std::size_t k : {1u, 3u, 5u}) {
        const Plane x = random_tensor({h, w}, rng);
        const Plane kern = random_tensor({k, k}, rng);
        CHECK(rcd::test::max_abs_diff(conv2d_same(x, kern), direct_correlation(x, kern)) <
              1e-14);
      }
    }
  }
}

TEST_CASE("conv2d_transpose_same applies the transposed matrix") {
  std::mt19937_64 rng(3);
  for (std::size_t k : {1u, 3u, 5u}) {
    const Plane y = random_tensor({4, 4}, rng);
    const Plane kern = random_tensor({k, k}, rng);
    const Eigen::VectorXd expect = correlation_matrix(4, 4, kern).transpose() * as_vector(y);
    const Plane got = conv2d_transpose_same(y, kern);
    CHECK((as_vector(got) - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
  // Non-square planes too.
  const Plane y = random_tensor({3, 7}, rng);
  const Plane kern = random_tensor({5, 5}, rng);
  const Eigen::VectorXd expect = correlation_matrix(3, 7, kern).transpose() * as_vector(y);
  CHECK((as_vector(conv2d_transpose_same(y, kern)) - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("even or malformed kernels are rejected") {
  const Plane x({4, 4});
  CHECK_THROWS_AS(conv2d_same(x, Plane({2, 2})), ConfigError);
  CHECK_THROWS_AS(conv2d_transpose_same(x, Plane({4, 4})), ConfigError);
  CHECK_THROWS_AS(conv2d_same(x, Plane({3, 5})), ShapeError);
  CHECK_THROWS_AS(conv_forward(Tensor({2, 4, 4}), Tensor({3, 3, 1, 1})), ShapeError);
  CHECK_THROWS_AS(conv_forward(Tensor({1, 4, 4}), Tensor({2, 2, 1, 1})), ConfigError);
}

TEST_CASE("multi-channel convolution sums per-channel correlations") {
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor({3, 5, 6}, rng);
  const Tensor f = random_tensor({3, 3, 3, 2}, rng);
  const Tensor y = conv_forward(x, f);
  REQUIRE(y.shape() == Shape{2, 5, 6});
  for (std::size_t o = 0; o < 2; ++o) {
    Plane expect({5, 6});
    for (std::size_t i = 0; i < 3; ++i) {
      Plane xi({5, 6}, std::vector<double>(x.plane(i).begin(), x.plane(i).end()));
      expect += direct_correlation(xi, filter_slice(f, i, o));
    }
    for (std::size_t t = 0; t < 30; ++t) CHECK(y.plane(o)[t] == doctest::Approx(expect[t]).epsilon(1e-13));
  }
}

TEST_CASE("conv_adjoint is the adjoint of conv_forward") {
  std::mt19937_64 rng(5);
  for (std::size_t k : {1u, 3u, 5u}) {
    const Tensor x = random_tensor({4, 7, 5}, rng);
    const Tensor y = random_tensor({3, 7, 5}, rng);
    const Tensor f = random_tensor({k, k, 4, 3}, rng);
    const double lhs = inner(conv_forward(x, f), y);
    const double rhs = inner(x, conv_adjoint(y, f));
    CHECK(rcd::test::rel_err(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("conv_filter_grad matches finite differences of a linear form") {
  std::mt19937_64 rng(6);
  const Tensor x = random_tensor({2, 6, 6}, rng);
  const Tensor g = random_tensor({3, 6, 6}, rng);
  Tensor f = random_tensor({3, 3, 2, 3}, rng);
  const Tensor grad = conv_filter_grad(x, g, 3);
  REQUIRE(grad.shape() == f.shape());
  for (std::size_t t = 0; t < f.size(); ++t) {
    const double keep = f[t];
    f[t] = keep + 1.0;
    const double up = inner(conv_forward(x, f), g);
    f[t] = keep - 1.0;
    const double down = inner(conv_forward(x, f), g);
    f[t] = keep;
    CHECK(rcd::test::rel_err(grad[t], 0.5 * (up - down), 1e-9) < 1e-10);
  }
}

TEST_CASE("conv_filter_grad also differentiates the adjoint in its filter") {
  std::mt19937_64 rng(7);
  const Tensor y = random_tensor({3, 5, 5}, rng);
  const Tensor g = random_tensor({2, 5, 5}, rng);
  Tensor f = random_tensor({5, 5, 2, 3}, rng);
  const Tensor grad = conv_filter_grad(g, y, 5);
  for (std::size_t t = 0; t < f.size(); t += 7) {
    const double keep = f[t];
    f[t] = keep + 1.0;
    const double up = inner(conv_adjoint(y, f), g);
    f[t] = keep - 1.0;
    const double down = inner(conv_adjoint(y, f), g);
    f[t] = keep;
    CHECK(rcd::test::rel_err(grad[t], 0.5 * (up - down), 1e-9) < 1e-10);
  }
}
