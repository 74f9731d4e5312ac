#include "rcd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rcd/error.hpp"

namespace rcd {

namespace {

// Latents live on dyadic grids so that the synthesis sums, O = B + R and
// O - B are all exact in double precision regardless of summation order.
constexpr double kKernelGrid = 1.0 / 4096.0;     // 2^-12
constexpr double kMagnitudeGrid = 1.0 / 4096.0;  // 2^-12
constexpr double kBackgroundGrid = 1.0 / 16777216.0;  // 2^-24

double snap(double v, double grid) { return std::round(v / grid) * grid; }

}  // namespace

Tensor make_streak_kernel(const StreakParams& p, std::size_t k) {
  if (k % 2 == 0) throw ConfigError("streak kernel size must be odd");
  if (p.length > static_cast<double>(k)) {
    throw ConfigError("streak length exceeds kernel size");
  }
  if (!(p.width >= 1.0)) throw ConfigError("streak width must be at least 1");
  if (!(p.length > 0.0)) throw ConfigError("streak length must be positive");
  if (!(p.intensity >= 0.0)) throw ConfigError("streak intensity must be nonnegative");

  const double theta = p.angle_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  const auto half = static_cast<double>(k / 2);
  Tensor kernel({k, k, 3});
  double norm_sq = 0.0;
  for (std::size_t u = 0; u < k; ++u) {
    for (std::size_t v = 0; v < k; ++v) {
      const double x = static_cast<double>(v) - half;
      const double y = half - static_cast<double>(u);
      const double along = std::abs(x * ct + y * st);
      const double across = std::abs(-x * st + y * ct);
      const double cover =
          std::clamp(p.width / 2.0 + 0.5 - across, 0.0, 1.0) *
          std::clamp(p.length / 2.0 + 0.5 - along, 0.0, 1.0);
      for (std::size_t c = 0; c < 3; ++c) kernel[(u * k + v) * 3 + c] = cover;
      norm_sq += 3.0 * cover * cover;
    }
  }
  if (norm_sq > 0.0) kernel *= p.intensity / std::sqrt(norm_sq);
  return kernel;
}

RainMapStack sample_sparse_maps(std::size_t height, std::size_t width,
                                std::size_t count, double density, Rng& rng) {
  if (!(density > 0.0)) throw ConfigError("rain density must be positive");
  const double p = std::min(1.0, density / 1000.0);
  std::bernoulli_distribution active(p);
  std::uniform_real_distribution<double> magnitude(0.5, 1.0);
  RainMapStack maps = make_maps(count, height, width);
  for (auto& v : maps.values()) {
    if (active(rng)) v = snap(magnitude(rng), kMagnitudeGrid);
  }
  return maps;
}

KernelBank make_streak_bank(std::size_t count, std::size_t kernel_size,
                            const StreakDistribution& dist, Rng& rng) {
  KernelBank bank = KernelBank::zeros(kernel_size, count);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const double max_len = static_cast<double>(kernel_size);
  for (std::size_t n = 0; n < count; ++n) {
    StreakParams p;
    p.angle_deg = draw(dist.angle_min, dist.angle_max);
    p.length = draw(std::min(dist.length_min, max_len), max_len);
    p.width = draw(dist.width_min, dist.width_max);
    p.intensity = draw(dist.intensity_min, dist.intensity_max);
    Tensor slice = make_streak_kernel(p, kernel_size);
    for (auto& v : slice.values()) v = snap(v, kKernelGrid);
    bank.set_slice(n, slice);
  }
  return bank;
}

Image make_background(std::size_t height, std::size_t width, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image img = make_image(height, width);
  const double h = static_cast<double>(height);
  const double w = static_cast<double>(width);

  // Per-channel linear gradient.
  for (std::size_t c = 0; c < 3; ++c) {
    const double base = 0.25 + 0.3 * unit(rng);
    const double gy = 0.3 * (unit(rng) - 0.5);
    const double gx = 0.3 * (unit(rng) - 0.5);
    auto pl = img.plane(c);
    for (std::size_t i = 0; i < height; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        pl[i * width + j] = base + gy * (i / h - 0.5) + gx * (j / w - 0.5);
      }
    }
  }
  // Soft Gaussian blobs.
  for (int b = 0; b < 3; ++b) {
    const double cy = h * unit(rng), cx = w * unit(rng);
    const double r = std::max(2.0, 0.25 * std::min(h, w) * (0.5 + unit(rng)));
    double amp[3];
    for (double& a : amp) a = 0.3 * (unit(rng) - 0.5);
    for (std::size_t i = 0; i < height; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        const double d2 = (i - cy) * (i - cy) + (j - cx) * (j - cx);
        const double g = std::exp(-d2 / (2.0 * r * r));
        for (std::size_t c = 0; c < 3; ++c) img.plane(c)[i * width + j] += amp[c] * g;
      }
    }
  }
  // Flat rectangles with hard edges.
  for (int q = 0; q < 2; ++q) {
    const auto y0 = static_cast<std::size_t>(h * unit(rng) * 0.8);
    const auto x0 = static_cast<std::size_t>(w * unit(rng) * 0.8);
    const auto y1 = std::min(height, y0 + 2 + static_cast<std::size_t>(h * 0.4 * unit(rng)));
    const auto x1 = std::min(width, x0 + 2 + static_cast<std::size_t>(w * 0.4 * unit(rng)));
    double shift[3];
    for (double& s : shift) s = 0.2 * (unit(rng) - 0.5);
    for (std::size_t i = y0; i < y1; ++i) {
      for (std::size_t j = x0; j < x1; ++j) {
        for (std::size_t c = 0; c < 3; ++c) img.plane(c)[i * width + j] += shift[c];
      }
    }
  }
  return clamp(std::move(img), 0.05, 0.85);
}

SynthPair synth_pair(const Image& background, const SynthParams& params,
                     Rng& rng) {
  require_image(background, "synth_pair");
  SynthPair pair;
  pair.background = background;
  for (auto& v : pair.background.values()) v = snap(v, kBackgroundGrid);
  pair.kernels = params.kernels;
  if (params.density < 0.0) throw ConfigError("rain density must be nonnegative");
  pair.maps = params.density == 0.0
                  ? make_maps(params.kernels.count(), height(background), width(background))
                  : sample_sparse_maps(height(background), width(background),
                                       params.kernels.count(), params.density, rng);
  pair.rain = synthesize_rain(params.kernels, pair.maps);
  pair.observed = compose(pair.background, pair.rain);
  if (params.clip) pair.observed = clamp(std::move(pair.observed), 0.0, 1.5);
  return pair;
}

}  // namespace rcd
