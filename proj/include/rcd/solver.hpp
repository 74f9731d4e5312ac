#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rcd/model.hpp"
#include "rcd/prox.hpp"
#include "rcd/tensor.hpp"

namespace rcd {

// Step sizes and proximal operators of one unrolled stage.
struct StageParams {
  double eta1 = 0.0;
  double eta2 = 0.8;
  ProxKind prox_m = IdentityProx{};
  ProxKind prox_b = IdentityProx{};
};

struct SolverConfig {
  std::size_t stages = 17;
  double eta1 = 0.0;
  double eta2 = 0.8;
  ProxKind prox_m = SoftThreshold{1e-3};
  ProxKind prox_b = BoxProject{0.0, 1.0};
  // {k0, k0, 3, 3} filter producing B(0) from O.
  Tensor init_kernel;
  bool record_trace = false;
  // Objective evaluated for the trace.
  Regularizers trace_regularizers;

  void validate() const;
};

struct StageState {
  RainMapStack maps;
  Image background;
};

// Intermediates of one stage, named after their role in the updates:
//   rain_hat      O - B(s-1)
//   rain_tilde    sum_n C_n (x) M_n(s-1)
//   residual      eta1 * C (x)^T (rain_tilde - rain_hat)
//   rain          sum_n C_n (x) M_n(s)
//   background_hat O - rain
struct StageRecord {
  Image rain_hat;
  Image rain_tilde;
  RainMapStack residual;
  RainMapStack maps;
  Image rain;
  Image background_hat;
  Image background;
  double objective_after_m = 0.0;
  double objective = 0.0;
  std::optional<double> psnr_db;
};

struct StageTrace {
  std::vector<StageRecord> stages;
};

struct RunResult {
  Image background;
  Image rain;
  RainMapStack maps;
  StageTrace trace;
};

// Channel-preserving 3×3 box blur, the default B(0) initializer.
Tensor box_blur_init_kernel();
// Channel-preserving delta kernel: B(0) = O.
Tensor identity_init_kernel();

// conv(O, init_kernel) over an edge-replicated border, so a constant image
// passes through a normalized blur unchanged.
Image initial_background(const Image& observed, const Tensor& init_kernel);
// Gradient of <initial_background(O, w), upstream> with respect to w.
Tensor initial_background_kernel_grad(const Image& observed, const Image& upstream,
                                      std::size_t kernel_size);

// M(0) = 0, B(0) = initial_background(O, init_kernel).
StageState init_state(const Image& observed, const KernelBank& bank,
                      const Tensor& init_kernel);

struct MStep {
  Image rain_hat;
  Image rain_tilde;
  RainMapStack residual;
  RainMapStack maps;
};

MStep m_step_detailed(const StageState& state, const Image& observed,
                      const KernelBank& bank, double eta1,
                      const ProxKind& prox_m);
RainMapStack m_step(const StageState& state, const Image& observed,
                    const KernelBank& bank, double eta1,
                    const ProxKind& prox_m);

struct BStep {
  Image background;
  Image rain;
  Image background_hat;
};

// `state` carries M(s) and B(s-1).
BStep b_step(const StageState& state, const Image& observed,
             const KernelBank& bank, double eta2, const ProxKind& prox_b);

// Runs the S-stage alternation. A non-empty `per_stage` overrides the shared
// step sizes and proxes and must have exactly cfg.stages entries.
// `ground_truth`, when given, adds per-stage PSNR to the trace.
RunResult run(const Image& observed, const KernelBank& bank,
              const SolverConfig& cfg,
              std::span<const StageParams> per_stage = {},
              const Image* ground_truth = nullptr);

// 1/L with L = 2 * lambda_max(M -> C (x)^T (C (x) M)) from 30 power
// iterations with a fixed seed.
double estimate_eta1_bound(const KernelBank& bank, std::size_t height,
                           std::size_t width);

inline constexpr double kDefaultEta2 = 0.8;
inline constexpr double kDefaultThreshold = 1e-3;
inline constexpr double kDefaultEta1Fraction = 0.9;

// Optimization-mode defaults: eta1 = 0.9 * bound, eta2 = 0.8,
// soft threshold 1e-3 on M, box [0, 1] on B. The trace objective uses the
// l1 weight 2 * tau / eta1 paired with that threshold.
SolverConfig analytic_config(const KernelBank& bank, std::size_t height,
                             std::size_t width, std::size_t stages = 17,
                             double threshold = kDefaultThreshold);

// The l1 weight of the squared-norm objective that an M-update with
// threshold tau and step eta1 is a majorize-minimize step for.
inline double l1_weight_for_threshold(double tau, double eta1) {
  return 2.0 * tau / eta1;
}

}  // namespace rcd
