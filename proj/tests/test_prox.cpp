#include <doctest.h>

#include <cmath>
#include <limits>

#include "rcd/error.hpp"
#include "rcd/prox.hpp"
#include "support.hpp"

using namespace rcd;
using rcd::test::random_tensor;
using rcd::test::rel_err;

namespace {

// Grid minimizer of 0.5 (z - v)^2 + penalty(z) over [lo, hi].
template <class Penalty>
double grid_argmin(double v, double lo, double hi, Penalty penalty) {
  double best = lo, best_val = std::numeric_limits<double>::infinity();
  const long steps = std::lround((hi - lo) / 1e-4);
  for (long s = 0; s <= steps; ++s) {
    const double z = lo + s * 1e-4;
    const double val = 0.5 * (z - v) * (z - v) + penalty(z);
    if (val < best_val) {
      best_val = val;
      best = z;
    }
  }
  return best;
}

// Independent 3x3 "same" multi-channel correlation with zero padding.
Tensor loop_conv(const Tensor& x, const Tensor& f) {
  const long h = height(x), w = width(x);
  const std::size_t cin = f.dim(2), cout = f.dim(3);
  Tensor y({cout, std::size_t(h), std::size_t(w)});
  for (std::size_t o = 0; o < cout; ++o)
    for (long i = 0; i < h; ++i)
      for (long j = 0; j < w; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < cin; ++c)
          for (long u = 0; u < 3; ++u)
            for (long v = 0; v < 3; ++v) {
              const long r = i + u - 1, q = j + v - 1;
              if (r < 0 || r >= h || q < 0 || q >= w) continue;
              s += f.at({std::size_t(u), std::size_t(v), c, o}) *
                   x.at({c, std::size_t(r), std::size_t(q)});
            }
        y.at({o, std::size_t(i), std::size_t(j)}) = s;
      }
  return y;
}

Tensor loop_prox(const ProxParams& p, const Tensor& x) {
  Tensor z = loop_conv(x, p.expand);
  for (const auto& b : p.blocks) {
    Tensor a = loop_conv(z, b.conv1);
    for (std::size_t c = 0; c < channels(a); ++c)
      for (auto& v : a.plane(c)) v = std::max(0.0, v + b.bias1[c]);
    Tensor r = loop_conv(a, b.conv2);
    for (std::size_t c = 0; c < channels(r); ++c)
      for (auto& v : r.plane(c)) v += b.bias2[c];
    z += r;
  }
  return loop_conv(z, p.compress);
}

ProxParams random_params(std::size_t ch, std::size_t hidden, std::size_t blocks,
                         std::mt19937_64& rng) {
  ProxParams p = zero_prox_params(ch, hidden, blocks);
  for (Tensor* t : p.tensors()) *t = random_tensor(t->shape(), rng, -0.5, 0.5);
  return p;
}

}  // namespace

TEST_CASE("soft_threshold examples and grid-search oracle") {
  const Tensor x({4}, std::vector<double>{0.3, -0.3, 0.05, -2.0});
  const Tensor y = soft_threshold(x, 0.1);
  CHECK(y[0] == doctest::Approx(0.2));
  CHECK(y[1] == doctest::Approx(-0.2));
  CHECK(y[2] == 0.0);
  CHECK(y[3] == doctest::Approx(-1.9));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dv(-2.0, 2.0), dt(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double v = dv(rng), tau = dt(rng);
    const double got = soft_threshold(Tensor({1}, std::vector<double>{v}), tau)[0];
    const double expect = grid_argmin(v, -std::abs(v) - 1, std::abs(v) + 1,
                                      [&](double z) { return tau * std::abs(z); });
    CHECK(std::abs(got - expect) <= 1e-4);
  }
  CHECK_THROWS_AS(soft_threshold(x, -0.1), ConfigError);
}

TEST_CASE("box_project examples and grid-search oracle") {
  const Tensor x({3}, std::vector<double>{-0.5, 0.4, 1.7});
  const Tensor y = box_project(x, 0.0, 1.0);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.4);
  CHECK(y[2] == 1.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dv(-1.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double v = dv(rng);
    const double got = box_project(Tensor({1}, std::vector<double>{v}), 0.0, 1.0)[0];
    CHECK(std::abs(got - grid_argmin(v, 0.0, 1.0, [](double) { return 0.0; })) <= 1e-4);
  }
  CHECK_THROWS_AS(box_project(x, 1.0, 0.0), ConfigError);
}

TEST_CASE("analytic proxes are nonexpansive, soft_threshold(x, 0) = x, box is idempotent") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor a = random_tensor({20}, rng, -2, 2), b = random_tensor({20}, rng, -2, 2);
    const double d = std::sqrt(frob_norm_sq(a - b));
    CHECK(std::sqrt(frob_norm_sq(soft_threshold(a, 0.3) - soft_threshold(b, 0.3))) <= d + 1e-15);
    CHECK(std::sqrt(frob_norm_sq(box_project(a, 0, 1) - box_project(b, 0, 1))) <= d + 1e-15);
    CHECK(soft_threshold(a, 0.0) == a);
    CHECK(box_project(box_project(a, 0, 1), 0, 1) == box_project(a, 0, 1));
  }
}

TEST_CASE("penalty values") {
  const Tensor x({3}, std::vector<double>{-0.5, 0.25, 1.0});
  CHECK(penalty_value(Penalty::kL1, x) == 1.75);
  CHECK(penalty_value(Penalty::kNone, x) == 0.0);
  CHECK(std::isinf(penalty_value(Penalty::kBox, x)));
  CHECK(penalty_value(Penalty::kBox, box_project(x, 0, 1)) == 0.0);
}

TEST_CASE("apply_prox dispatches on the variant") {
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor({2, 4, 4}, rng, -2, 2);
  CHECK(apply_prox(SoftThreshold{0.2}, x) == soft_threshold(x, 0.2));
  CHECK(apply_prox(BoxProject{0.0, 1.0}, x) == box_project(x, 0.0, 1.0));
  CHECK(apply_prox(IdentityProx{}, x) == x);
  const ProxParams p = random_params(2, 3, 1, rng);
  CHECK(apply_prox(ResidualProx{p}, x) == residual_prox_forward(p, x));
  CHECK(describe(SoftThreshold{0.2}).find("soft") != std::string::npos);
}

TEST_CASE("residual prox forward matches a direct-summation reimplementation") {
  std::mt19937_64 rng(5);
  const ProxParams p = random_params(2, 4, 2, rng);
  const Tensor x = random_tensor({2, 4, 4}, rng);
  const Tensor y = residual_prox_forward(p, x);
  REQUIRE(y.shape() == x.shape());
  CHECK(rcd::test::max_abs_diff(y, loop_prox(p, x)) < 1e-13);
}

TEST_CASE("identity prox parameters realize the identity map") {
  std::mt19937_64 rng(6);
  const Tensor x = random_tensor({3, 5, 6}, rng);
  CHECK(residual_prox_forward(identity_prox_params(3, 5, 2, 0.0, 7), x) == x);
  const ProxParams noisy = identity_prox_params(3, 5, 2, 0.02, 7);
  CHECK(rcd::test::max_abs_diff(residual_prox_forward(noisy, x), x) < 0.5);
  CHECK(noisy.tensors().size() == noisy.tensor_names().size());
  CHECK(noisy.tensor_names()[1] == "block0.conv1");
}

TEST_CASE("prox parameter validation") {
  ProxParams p = zero_prox_params(3, 4, 1);
  CHECK_NOTHROW(p.validate());
  p.blocks[0].bias1 = Tensor({3});
  CHECK_THROWS_AS(p.validate(), ShapeError);
  CHECK_THROWS_AS(residual_prox_forward(zero_prox_params(3, 4, 1), Tensor({2, 4, 4})),
                  ShapeError);
}

TEST_CASE("residual prox backward matches central finite differences") {
  std::mt19937_64 rng(8);
  const ProxParams p = random_params(2, 3, 2, rng);
  Tensor x = random_tensor({2, 5, 5}, rng);
  const Tensor g = random_tensor({2, 5, 5}, rng);
  const ProxGradient grad = residual_prox_backward(p, x, g);
  const double h = 1e-6;

  auto objective = [&](const ProxParams& q, const Tensor& in) {
    return inner(residual_prox_forward(q, in), g);
  };
  // Activation patterns must not change between the two evaluations.
  auto pattern = [](const ProxParams& q, const Tensor& in) {
    std::vector<bool> bits;
    for (const auto& pre : residual_prox_tape(q, in).pre_activations)
      for (double v : pre.values()) bits.push_back(v > 0.0);
    return bits;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = objective(p, x);
    const auto pu = pattern(p, x);
    x[i] = keep - h;
    const double down = objective(p, x);
    const auto pd = pattern(p, x);
    x[i] = keep;
    if (pu != pd) continue;
    CHECK(rel_err(grad.input[i], (up - down) / (2 * h), 1e-6) < 1e-6);
  }
  ProxParams q = p;
  auto qs = q.tensors();
  auto gs = grad.params.tensors();
  for (std::size_t t = 0; t < qs.size(); ++t) {
    for (std::size_t i = 0; i < qs[t]->size(); ++i) {
      double& w = (*qs[t])[i];
      const double keep = w;
      w = keep + h;
      const double up = objective(q, x);
      const auto pu = pattern(q, x);
      w = keep - h;
      const double down = objective(q, x);
      const auto pd = pattern(q, x);
      w = keep;
      if (pu != pd) continue;
      CHECK(rel_err((*gs[t])[i], (up - down) / (2 * h), 1e-6) < 1e-6);
    }
  }
}
