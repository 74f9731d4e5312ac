#pragma once

#include <Eigen/Dense>
#include <algorithm>

#include "rcd/model.hpp"
#include "rcd/tensor.hpp"

namespace rcd::test {

// Rain layer by explicit loops over kernels, channels, pixels and taps.
inline Image loop_rain(const KernelBank& bank, const RainMapStack& maps) {
  const long k = bank.kernel_size(), p = k / 2;
  const long h = height(maps), w = width(maps);
  Image r = make_image(h, w);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t n = 0; n < bank.count(); ++n) {
      for (long i = 0; i < h; ++i) {
        for (long j = 0; j < w; ++j) {
          for (long u = 0; u < k; ++u) {
            for (long v = 0; v < k; ++v) {
              const long y = i + u - p, x = j + v - p;
              if (y < 0 || y >= h || x < 0 || x >= w) continue;
              r.at({c, std::size_t(i), std::size_t(j)}) +=
                  bank.filter().at({std::size_t(u), std::size_t(v), n, c}) *
                  maps.at({n, std::size_t(y), std::size_t(x)});
            }
          }
        }
      }
    }
  }
  return r;
}

// Synthesis operator as a (3HW) x (NHW) matrix.
inline Eigen::MatrixXd synthesis_matrix(const KernelBank& bank, std::size_t h,
                                        std::size_t w) {
  const std::size_t n_maps = bank.count(), hw = h * w;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * hw, n_maps * hw);
  const long k = bank.kernel_size(), p = k / 2;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < n_maps; ++n)
      for (long i = 0; i < long(h); ++i)
        for (long j = 0; j < long(w); ++j)
          for (long u = 0; u < k; ++u)
            for (long v = 0; v < k; ++v) {
              const long y = i + u - p, x = j + v - p;
              if (y < 0 || y >= long(h) || x < 0 || x >= long(w)) continue;
              a(c * hw + i * w + j, n * hw + y * w + x) +=
                  bank.filter().at({std::size_t(u), std::size_t(v), n, c});
            }
  return a;
}

inline Eigen::VectorXd as_vector(const Tensor& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.data().data(), t.size());
}

inline Tensor as_tensor(const Eigen::VectorXd& v, const Shape& shape) {
  return Tensor(shape, std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace rcd::test
