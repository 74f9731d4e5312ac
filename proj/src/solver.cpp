#include "rcd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rcd/conv.hpp"
#include "rcd/error.hpp"
#include "rcd/metrics.hpp"

namespace rcd {

void SolverConfig::validate() const {
  if (!(eta1 > 0.0)) throw ConfigError("eta1 must be positive");
  if (!(eta2 > 0.0 && eta2 <= 1.0)) throw ConfigError("eta2 must lie in (0, 1]");
  if (!init_kernel.empty()) {
    require_filter(init_kernel, "init kernel");
    if (filter_in(init_kernel) != 3 || filter_out(init_kernel) != 3) {
      throw ShapeError("init kernel must map 3 channels to 3 channels");
    }
  }
  trace_regularizers.validate();
}

Tensor box_blur_init_kernel() {
  Tensor k({3, 3, 3, 3});
  for (std::size_t t = 0; t < 9; ++t) {
    for (std::size_t c = 0; c < 3; ++c) k[(t * 3 + c) * 3 + c] = 1.0 / 9.0;
  }
  return k;
}

Tensor identity_init_kernel() {
  Tensor k({3, 3, 3, 3});
  for (std::size_t c = 0; c < 3; ++c) k[(4 * 3 + c) * 3 + c] = 1.0;
  return k;
}

namespace {

Tensor replicate_pad(const Tensor& x, std::size_t pad) {
  const std::size_t h = height(x), w = width(x);
  Tensor out({channels(x), h + 2 * pad, w + 2 * pad});
  const std::size_t wp = w + 2 * pad;
  for (std::size_t c = 0; c < channels(x); ++c) {
    auto src = x.plane(c);
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < h + 2 * pad; ++i) {
      const std::size_t si = std::min(h - 1, i < pad ? 0 : i - pad);
      for (std::size_t j = 0; j < wp; ++j) {
        const std::size_t sj = std::min(w - 1, j < pad ? 0 : j - pad);
        dst[i * wp + j] = src[si * w + sj];
      }
    }
  }
  return out;
}

Tensor crop(const Tensor& x, std::size_t pad) {
  const std::size_t hp = height(x), wp = width(x);
  const std::size_t h = hp - 2 * pad, w = wp - 2 * pad;
  Tensor out({channels(x), h, w});
  for (std::size_t c = 0; c < channels(x); ++c) {
    auto src = x.plane(c);
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < h; ++i) {
      std::copy_n(src.begin() + (i + pad) * wp + pad, w, dst.begin() + i * w);
    }
  }
  return out;
}

Tensor zero_pad(const Tensor& x, std::size_t pad) {
  const std::size_t h = height(x), w = width(x), wp = w + 2 * pad;
  Tensor out({channels(x), h + 2 * pad, wp});
  for (std::size_t c = 0; c < channels(x); ++c) {
    auto src = x.plane(c);
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < h; ++i) {
      std::copy_n(src.begin() + i * w, w, dst.begin() + (i + pad) * wp + pad);
    }
  }
  return out;
}

}  // namespace

Image initial_background(const Image& observed, const Tensor& init_kernel) {
  require_image(observed, "initial_background");
  require_filter(init_kernel, "initial_background");
  const std::size_t pad = filter_size(init_kernel) / 2;
  return crop(conv_forward(replicate_pad(observed, pad), init_kernel), pad);
}

Tensor initial_background_kernel_grad(const Image& observed, const Image& upstream,
                                      std::size_t kernel_size) {
  require_same_shape(observed, upstream, "initial_background_kernel_grad");
  const std::size_t pad = kernel_size / 2;
  return conv_filter_grad(replicate_pad(observed, pad), zero_pad(upstream, pad),
                          kernel_size);
}

StageState init_state(const Image& observed, const KernelBank& bank,
                      const Tensor& init_kernel) {
  require_image(observed, "init_state");
  require_filter(init_kernel, "init_state");
  return {make_maps(bank.count(), height(observed), width(observed)),
          initial_background(observed, init_kernel)};
}

MStep m_step_detailed(const StageState& state, const Image& observed,
                      const KernelBank& bank, double eta1,
                      const ProxKind& prox_m) {
  require_consistent(observed, state.maps, bank, "m_step");
  require_same_shape(observed, state.background, "m_step");
  if (!(eta1 > 0.0)) throw ConfigError("m_step: eta1 must be positive");
  MStep out;
  out.rain_hat = observed - state.background;
  out.rain_tilde = synthesize_rain(bank, state.maps);
  out.residual = analyze_rain(bank, out.rain_tilde - out.rain_hat);
  out.residual *= eta1;
  out.maps = apply_prox(prox_m, state.maps - out.residual);
  return out;
}

RainMapStack m_step(const StageState& state, const Image& observed,
                    const KernelBank& bank, double eta1,
                    const ProxKind& prox_m) {
  return m_step_detailed(state, observed, bank, eta1, prox_m).maps;
}

BStep b_step(const StageState& state, const Image& observed,
             const KernelBank& bank, double eta2, const ProxKind& prox_b) {
  require_consistent(observed, state.maps, bank, "b_step");
  require_same_shape(observed, state.background, "b_step");
  if (!(eta2 > 0.0 && eta2 <= 1.0)) {
    throw ConfigError("b_step: eta2 must lie in (0, 1]");
  }
  BStep out;
  out.rain = synthesize_rain(bank, state.maps);
  out.background_hat = observed - out.rain;
  Image mixed = (1.0 - eta2) * state.background;
  mixed.axpy(eta2, out.background_hat);
  out.background = apply_prox(prox_b, mixed);
  return out;
}

namespace {

void require_finite(const Tensor& t, std::size_t stage, const char* net) {
  if (!t.all_finite()) {
    throw NumericalError("non-finite values after stage " +
                         std::to_string(stage) + " (" + net + ")");
  }
}

}  // namespace

RunResult run(const Image& observed, const KernelBank& bank,
              const SolverConfig& cfg, std::span<const StageParams> per_stage,
              const Image* ground_truth) {
  if (per_stage.empty()) {
    cfg.validate();
  } else if (per_stage.size() != cfg.stages) {
    throw ConfigError("per-stage parameter list has " +
                      std::to_string(per_stage.size()) + " entries for " +
                      std::to_string(cfg.stages) + " stages");
  }
  require_image(observed, "run");
  if (ground_truth) require_same_shape(observed, *ground_truth, "run");

  const Tensor& init = cfg.init_kernel.empty() ? box_blur_init_kernel()
                                               : cfg.init_kernel;
  StageState state = init_state(observed, bank, init);
  require_finite(state.background, 0, "initialization");

  RunResult result;
  Image rain;
  for (std::size_t s = 1; s <= cfg.stages; ++s) {
    const double eta1 = per_stage.empty() ? cfg.eta1 : per_stage[s - 1].eta1;
    const double eta2 = per_stage.empty() ? cfg.eta2 : per_stage[s - 1].eta2;
    const ProxKind& prox_m = per_stage.empty() ? cfg.prox_m : per_stage[s - 1].prox_m;
    const ProxKind& prox_b = per_stage.empty() ? cfg.prox_b : per_stage[s - 1].prox_b;

    MStep m = m_step_detailed(state, observed, bank, eta1, prox_m);
    require_finite(m.maps, s, "M-net");
    state.maps = m.maps;
    double objective_after_m = 0.0;
    if (cfg.record_trace) {
      objective_after_m = objective(observed, state.background, state.maps,
                                    bank, cfg.trace_regularizers);
    }

    BStep b = b_step(state, observed, bank, eta2, prox_b);
    require_finite(b.background, s, "B-net");
    state.background = b.background;
    rain = b.rain;

    if (cfg.record_trace) {
      StageRecord rec;
      rec.rain_hat = std::move(m.rain_hat);
      rec.rain_tilde = std::move(m.rain_tilde);
      rec.residual = std::move(m.residual);
      rec.maps = state.maps;
      rec.rain = b.rain;
      rec.background_hat = std::move(b.background_hat);
      rec.background = state.background;
      rec.objective_after_m = objective_after_m;
      rec.objective = objective(observed, state.background, state.maps, bank,
                                cfg.trace_regularizers);
      if (ground_truth) rec.psnr_db = psnr_y(*ground_truth, state.background);
      result.trace.stages.push_back(std::move(rec));
    }
  }

  if (cfg.stages == 0) rain = observed - state.background;
  result.background = std::move(state.background);
  result.maps = std::move(state.maps);
  result.rain = std::move(rain);
  return result;
}

double estimate_eta1_bound(const KernelBank& bank, std::size_t height,
                           std::size_t width) {
  constexpr int kIterations = 30;
  constexpr std::uint64_t kSeed = 0x5eed;
  std::mt19937_64 rng(kSeed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RainMapStack v = make_maps(bank.count(), height, width);
  for (auto& x : v.values()) x = normal(rng);
  double lambda = 0.0;
  for (int it = 0; it < kIterations; ++it) {
    const double norm = std::sqrt(frob_norm_sq(v));
    if (norm == 0.0) break;
    v *= 1.0 / norm;
    RainMapStack w = analyze_rain(bank, synthesize_rain(bank, v));
    lambda = inner(v, w);  // Rayleigh quotient, v has unit norm
    v = std::move(w);
  }
  const double lipschitz = 2.0 * lambda;
  if (!(lipschitz > 0.0)) {
    throw ConfigError("estimate_eta1_bound: kernel bank is zero");
  }
  return 1.0 / lipschitz;
}

SolverConfig analytic_config(const KernelBank& bank, std::size_t height,
                             std::size_t width, std::size_t stages,
                             double threshold) {
  SolverConfig cfg;
  cfg.stages = stages;
  cfg.eta1 = kDefaultEta1Fraction * estimate_eta1_bound(bank, height, width);
  cfg.eta2 = kDefaultEta2;
  cfg.prox_m = SoftThreshold{threshold};
  cfg.prox_b = BoxProject{0.0, 1.0};
  cfg.init_kernel = box_blur_init_kernel();
  cfg.trace_regularizers.alpha = l1_weight_for_threshold(threshold, cfg.eta1);
  cfg.trace_regularizers.beta = 1.0;
  cfg.trace_regularizers.g1 = Penalty::kL1;
  cfg.trace_regularizers.g2 = Penalty::kBox;
  return cfg;
}

}  // namespace rcd
