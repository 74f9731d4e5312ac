#pragma once

#include <cmath>

#include "rcd/tensor.hpp"

namespace rcd::test {

inline double scalar_psnr(const Plane& a, const Plane& b) {
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
  mse /= static_cast<double>(a.size());
  return 10.0 * std::log10(1.0 / mse);
}

// Mean SSIM over every 11x11 window, each evaluated from its own 2-D weights.
inline double window_ssim(const Plane& a, const Plane& b) {
  const int half = 5;
  double weights[11][11], total = 0.0;
  for (int u = 0; u < 11; ++u)
    for (int v = 0; v < 11; ++v) {
      const double du = u - half, dv = v - half;
      weights[u][v] = std::exp(-(du * du + dv * dv) / (2 * 1.5 * 1.5));
      total += weights[u][v];
    }
  const double c1 = 1e-4, c2 = 9e-4;
  const std::size_t h = a.dim(0), w = a.dim(1);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + 11 <= h; ++i)
    for (std::size_t j = 0; j + 11 <= w; ++j) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int u = 0; u < 11; ++u)
        for (int v = 0; v < 11; ++v) {
          const double wt = weights[u][v] / total;
          const double x = a.at({i + u, j + v}), y = b.at({i + u, j + v});
          mx += wt * x;
          my += wt * y;
          sxx += wt * x * x;
          syy += wt * y * y;
          sxy += wt * x * y;
        }
      const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
      sum += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return sum / static_cast<double>(count);
}

}  // namespace rcd::test
