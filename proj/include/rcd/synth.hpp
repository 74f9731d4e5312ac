#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "rcd/model.hpp"
#include "rcd/tensor.hpp"

namespace rcd {

using Rng = std::mt19937_64;

struct StreakParams {
  double angle_deg = 90.0;  // 90 is vertical
  double length = 9.0;      // pixels, <= k
  double width = 1.0;       // pixels, >= 1
  double intensity = 1.0;   // Frobenius norm of the rendered k×k×3 slice
  double density = 2.0;     // expected activations per 1000 pixels
};

// Anti-aliased segment through the kernel center, identical in all three
// channels, scaled to Frobenius norm = intensity. Returns {k, k, 3}.
Tensor make_streak_kernel(const StreakParams& p, std::size_t k);

// Bernoulli(density / 1000) activations with magnitudes uniform in
// [0.5, 1.0] (snapped to a 2^-12 grid). Returns {count, height, width}.
RainMapStack sample_sparse_maps(std::size_t height, std::size_t width,
                                std::size_t count, double density, Rng& rng);

// Ranges the bank generator draws streak shapes from.
struct StreakDistribution {
  double angle_min = 70.0;
  double angle_max = 110.0;
  double length_min = 5.0;
  double width_min = 1.0;
  double width_max = 1.5;
  double intensity_min = 1.5;
  double intensity_max = 2.5;
};

// Kernel entries are snapped to a 2^-12 grid.
KernelBank make_streak_bank(std::size_t count, std::size_t kernel_size,
                            const StreakDistribution& dist, Rng& rng);

// Smooth procedural background in [0.05, 0.85]: a color gradient, soft
// blobs, and a couple of flat rectangles for edges.
Image make_background(std::size_t height, std::size_t width, Rng& rng);

struct SynthParams {
  KernelBank kernels;
  double density = 2.0;  // 0 gives rain-free pairs
  bool clip = false;  // clip O to [0, 1.5]
};

struct SynthPair {
  Image observed;
  Image background;
  Image rain;
  RainMapStack maps;
  KernelBank kernels;
};

// The background is snapped to a 2^-24 grid; together with the latent grids
// this makes O == B + R and O - B == R hold bitwise.
SynthPair synth_pair(const Image& background, const SynthParams& params,
                     Rng& rng);

}  // namespace rcd
