#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rcd/tensor.hpp"

namespace rcd {

// ---------------------------------------------------------------------------
// Analytic proximal operators and the penalties they belong to.

// sign(x) * max(|x| - tau, 0), elementwise. tau >= 0.
Tensor soft_threshold(const Tensor& x, double tau);

// Elementwise clamp to [lo, hi]. lo <= hi.
Tensor box_project(const Tensor& x, double lo, double hi);

enum class Penalty { kNone, kL1, kBox };

// l1 norm for kL1; 0 or +infinity for kBox; 0 for kNone.
double penalty_value(Penalty kind, const Tensor& x, double box_lo = 0.0,
                     double box_hi = 1.0);

// ---------------------------------------------------------------------------
// Learnable residual proximal network:
//   y = compress(block_T(... block_1(expand(x))))
//   block(z) = z + conv2(relu(conv1(z) + b1)) + b2
// All convolutions are 3×3 "same"; filters use the {k, k, in, out} layout.

struct ResBlock {
  Tensor conv1;  // {3, 3, hidden, hidden}
  Tensor bias1;  // {hidden}
  Tensor conv2;
  Tensor bias2;
};

struct ProxParams {
  Tensor expand;    // {3, 3, in, hidden}
  std::vector<ResBlock> blocks;
  Tensor compress;  // {3, 3, hidden, out}

  std::size_t in_channels() const { return expand.dim(2); }
  std::size_t hidden_channels() const { return expand.dim(3); }
  std::size_t out_channels() const { return compress.dim(3); }
  std::size_t block_count() const { return blocks.size(); }

  // Every parameter tensor in a fixed order (expand, blocks..., compress).
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  // Suffixes naming tensors() entries, e.g. "block0.conv1".
  std::vector<std::string> tensor_names() const;

  void validate() const;
};

inline constexpr std::size_t kProxKernel = 3;

// Zero-valued parameters of the given architecture.
ProxParams zero_prox_params(std::size_t channels, std::size_t hidden,
                            std::size_t blocks);

// Delta-kernel expand/compress wiring the first `channels` hidden channels
// straight through, blocks drawn N(0, block_std^2) with zero biases. With
// block_std = 0 this is exactly the identity map.
ProxParams identity_prox_params(std::size_t channels, std::size_t hidden,
                                std::size_t blocks, double block_std,
                                std::uint64_t seed);

// Intermediate values of one forward pass, kept for the backward pass.
struct ProxTape {
  Tensor input;
  std::vector<Tensor> block_inputs;  // z_0 .. z_T (z_0 = expand(input))
  std::vector<Tensor> pre_activations;
  Tensor output;
};

ProxTape residual_prox_tape(const ProxParams& p, const Tensor& x);
Tensor residual_prox_forward(const ProxParams& p, const Tensor& x);

struct ProxGradient {
  Tensor input;
  ProxParams params;
};

// Vector-Jacobian products of residual_prox_forward. ReLU has derivative 0
// at a zero pre-activation.
ProxGradient residual_prox_backward(const ProxParams& p, const ProxTape& tape,
                                    const Tensor& upstream);
ProxGradient residual_prox_backward(const ProxParams& p, const Tensor& x,
                                    const Tensor& upstream);

// ---------------------------------------------------------------------------

struct SoftThreshold {
  double tau = 0.0;
};
struct BoxProject {
  double lo = 0.0;
  double hi = 1.0;
};
struct IdentityProx {};
struct ResidualProx {
  ProxParams params;
};

using ProxKind = std::variant<SoftThreshold, BoxProject, IdentityProx, ResidualProx>;

Tensor apply_prox(const ProxKind& prox, const Tensor& x);
std::string describe(const ProxKind& prox);

}  // namespace rcd
