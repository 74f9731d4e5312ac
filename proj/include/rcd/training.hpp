#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rcd/model.hpp"
#include "rcd/prox.hpp"
#include "rcd/solver.hpp"
#include "rcd/tensor.hpp"

namespace rcd {

// Network architecture of the trainable unrolled model.
struct ModelConfig {
  std::size_t stages = 17;
  std::size_t kernels = 32;
  std::size_t kernel_size = 9;
  std::size_t blocks = 4;   // residual blocks per prox network
  std::size_t hidden = 32;  // hidden channels per prox network
  double block_init_std = 0.02;

  void validate() const;
};

// Stage weights of the training loss:
//   sum_{s=0..S} lambda[s] ||B(s) - B||^2 + sum_{s=1..S} gamma[s-1] ||O - B - R(s)||^2
struct LossWeights {
  std::vector<double> lambda;  // S + 1 entries
  std::vector<double> gamma;   // S entries

  std::size_t stages() const { return gamma.size(); }
  void validate() const;
};

// lambda_S = gamma_S = 1 and 0.1 everywhere else.
LossWeights default_loss_weights(std::size_t stages);

struct TrainConfig {
  LossWeights weights;
  double learning_rate = 1e-3;
  double lr_decay_factor = 5.0;
  std::size_t lr_decay_every = 25;
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  std::size_t patch_size = 64;
  std::uint64_t seed = 0;

  void validate() const;
  double learning_rate_at(std::size_t epoch) const;
};

// Everything the unrolled network learns. Step sizes are stored raw:
// eta1 = softplus(eta1_raw), eta2 = sigmoid(eta2_raw).
struct LearnableSet {
  KernelBank kernels;
  Tensor init_kernel;  // {3, 3, 3, 3}
  std::vector<ProxParams> prox_m;
  std::vector<ProxParams> prox_b;
  Tensor eta1_raw;  // {S}; empty when S == 0
  Tensor eta2_raw;

  std::size_t stages() const { return prox_m.size(); }
  double eta1(std::size_t stage) const;
  double eta2(std::size_t stage) const;

  std::vector<std::pair<std::string, Tensor*>> named_tensors();
  std::vector<std::pair<std::string, const Tensor*>> named_tensors() const;
  std::size_t parameter_count() const;

  // Inference configuration equivalent to this parameter set.
  std::vector<StageParams> stage_params() const;
  SolverConfig solver_config() const;

  void validate() const;
};

// Same structure, all zeros. Used as a gradient accumulator.
LearnableSet zeros_like(const LearnableSet& p);

double softplus(double x);
double inverse_softplus(double y);
double sigmoid(double x);
double logit(double p);

// Kernels: seeded Gaussian, slice-normalized. Proxes: identity wiring plus
// small random blocks. eta1 starts at 0.9 * estimate_eta1_bound on a
// patch_size grid, eta2 at 0.8, B(0) at the box blur.
LearnableSet init_learnable(const ModelConfig& cfg, std::size_t patch_size,
                            std::uint64_t seed);

struct StageTape {
  RainMapStack maps_prev;
  Image background_prev;
  Image diff;          // sum C (x) M(s-1) + B(s-1) - O
  RainMapStack grad;   // C (x)^T diff
  ProxTape m;          // output is M(s)
  Image rain;          // R(s)
  Image background_hat;
  ProxTape b;          // output is B(s)
};

struct ForwardTape {
  Image observed;
  Image initial_background;
  std::vector<StageTape> stages;

  const Image& background(std::size_t s) const {
    return s == 0 ? initial_background : stages[s - 1].b.output;
  }
};

ForwardTape forward(const LearnableSet& p, const Image& observed);

// backgrounds holds B(0..S), rains holds R(1..S).
double loss(const std::vector<Image>& backgrounds, const std::vector<Image>& rains,
            const Image& truth, const Image& observed, const LossWeights& w);
double loss(const ForwardTape& tape, const Image& truth, const LossWeights& w);

// Loss of one pair; gradients are added into *grad when it is non-null.
double loss_and_gradient(const LearnableSet& p, const Image& observed,
                         const Image& truth, const LossWeights& w,
                         LearnableSet* grad);

LearnableSet backward(const Image& observed, const Image& truth,
                      const LearnableSet& p, const LossWeights& w);

struct TrainingPair {
  Image observed;
  Image truth;
};

struct TrainResult {
  LearnableSet params;
  std::vector<double> epoch_loss;  // mean per-pair loss of each epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) over random patches, stepwise
// learning-rate decay. Deterministic given cfg.seed and dataset order.
TrainResult train(const std::vector<TrainingPair>& dataset,
                  LearnableSet initial, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Scaled-down training recipe: N = 4, k = 9, S = 5, 32×32 patches,
// 50 epochs, seed 0.
struct DeskRecipe {
  ModelConfig model;
  TrainConfig train;
  std::size_t pairs = 200;
  std::size_t image_size = 32;
  double density = 10.0;
};
DeskRecipe desk_recipe(std::size_t stages = 5);

}  // namespace rcd
