#include "rcd/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "rcd/error.hpp"

namespace rcd {

Plane rgb_to_y(const Image& img) {
  require_image(img, "rgb_to_y");
  Plane y({height(img), width(img)});
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i];
  }
  return y;
}

double psnr(const Plane& ref, const Plane& est, double peak) {
  require_same_shape(ref, est, "psnr");
  double sse = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = ref[i] - est[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(ref.size());
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> taps{};
  const int half = static_cast<int>(kSsimWindow / 2);
  double sum = 0.0;
  for (int i = 0; i < static_cast<int>(kSsimWindow); ++i) {
    const double x = i - half;
    taps[i] = std::exp(-x * x / (2.0 * kSsimSigma * kSsimSigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Separable "valid" Gaussian filtering: output is (h-10)×(w-10).
std::vector<double> filter_valid(const std::vector<double>& x, std::size_t h,
                                 std::size_t w,
                                 const std::array<double, kSsimWindow>& taps) {
  const std::size_t oh = h - kSsimWindow + 1;
  const std::size_t ow = w - kSsimWindow + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < kSsimWindow; ++t) acc += taps[t] * x[i * w + j + t];
      rows[i * ow + j] = acc;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t i = 0; i < oh; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < kSsimWindow; ++t) acc += taps[t] * rows[(i + t) * ow + j];
      out[i * ow + j] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Plane& ref, const Plane& est, double peak) {
  require_same_shape(ref, est, "ssim");
  require_plane(ref, "ssim");
  const std::size_t h = ref.dim(0), w = ref.dim(1);
  if (h < kSsimWindow || w < kSsimWindow) {
    throw ShapeError("ssim: image smaller than the 11×11 window");
  }
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const auto taps = gaussian_taps();

  const std::vector<double>& x = ref.values();
  const std::vector<double>& y = est.values();
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, h, w, taps);
  const auto mu_y = filter_valid(y, h, w, taps);
  const auto e_xx = filter_valid(xx, h, w, taps);
  const auto e_yy = filter_valid(yy, h, w, taps);
  const auto e_xy = filter_valid(xy, h, w, taps);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

double psnr_y(const Image& ref, const Image& est) {
  return cap_psnr(psnr(rgb_to_y(clamp(ref, 0.0, 1.0)),
                       rgb_to_y(clamp(est, 0.0, 1.0))));
}

double ssim_y(const Image& ref, const Image& est) {
  return ssim(rgb_to_y(clamp(ref, 0.0, 1.0)), rgb_to_y(clamp(est, 0.0, 1.0)));
}

}  // namespace rcd
