#include "rcd/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "rcd/conv.hpp"
#include "rcd/error.hpp"

namespace rcd {

Tensor soft_threshold(const Tensor& x, double tau) {
  if (!(tau >= 0.0)) {
    throw ConfigError("soft_threshold: tau must be nonnegative");
  }
  Tensor y = x;
  for (auto& v : y.values()) {
    const double mag = std::abs(v) - tau;
    v = mag > 0.0 ? std::copysign(mag, v) : 0.0;
  }
  return y;
}

Tensor box_project(const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) throw ConfigError("box_project: lo must not exceed hi");
  return clamp(x, lo, hi);
}

double penalty_value(Penalty kind, const Tensor& x, double box_lo,
                     double box_hi) {
  switch (kind) {
    case Penalty::kNone:
      return 0.0;
    case Penalty::kL1: {
      double acc = 0.0;
      for (double v : x.values()) acc += std::abs(v);
      return acc;
    }
    case Penalty::kBox:
      for (double v : x.values()) {
        if (v < box_lo || v > box_hi) {
          return std::numeric_limits<double>::infinity();
        }
      }
      return 0.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

std::vector<Tensor*> ProxParams::tensors() {
  std::vector<Tensor*> out{&expand};
  for (auto& b : blocks) {
    out.insert(out.end(), {&b.conv1, &b.bias1, &b.conv2, &b.bias2});
  }
  out.push_back(&compress);
  return out;
}

std::vector<const Tensor*> ProxParams::tensors() const {
  std::vector<const Tensor*> out{&expand};
  for (const auto& b : blocks) {
    out.insert(out.end(), {&b.conv1, &b.bias1, &b.conv2, &b.bias2});
  }
  out.push_back(&compress);
  return out;
}

std::vector<std::string> ProxParams::tensor_names() const {
  std::vector<std::string> out{"expand"};
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const std::string b = "block" + std::to_string(t) + ".";
    out.insert(out.end(), {b + "conv1", b + "bias1", b + "conv2", b + "bias2"});
  }
  out.push_back("compress");
  return out;
}

void ProxParams::validate() const {
  require_filter(expand, "prox expand");
  require_filter(compress, "prox compress");
  const std::size_t hidden = hidden_channels();
  if (blocks.empty()) throw ConfigError("residual prox needs at least one block");
  if (compress.dim(2) != hidden) {
    throw ShapeError("prox compress input channels do not match hidden width");
  }
  if (hidden < out_channels()) {
    throw ConfigError("prox hidden width must be at least the output width");
  }
  const Shape conv_shape{kProxKernel, kProxKernel, hidden, hidden};
  const Shape bias_shape{hidden};
  for (const auto& b : blocks) {
    if (b.conv1.shape() != conv_shape || b.conv2.shape() != conv_shape ||
        b.bias1.shape() != bias_shape || b.bias2.shape() != bias_shape) {
      throw ShapeError("prox residual block has inconsistent shapes");
    }
  }
}

ProxParams zero_prox_params(std::size_t channels, std::size_t hidden,
                            std::size_t blocks) {
  if (channels == 0 || hidden < channels || blocks == 0) {
    throw ConfigError("prox architecture needs channels >= 1, hidden >= channels, blocks >= 1");
  }
  ProxParams p;
  p.expand = Tensor({kProxKernel, kProxKernel, channels, hidden});
  p.compress = Tensor({kProxKernel, kProxKernel, hidden, channels});
  for (std::size_t t = 0; t < blocks; ++t) {
    p.blocks.push_back({Tensor({kProxKernel, kProxKernel, hidden, hidden}),
                        Tensor({hidden}),
                        Tensor({kProxKernel, kProxKernel, hidden, hidden}),
                        Tensor({hidden})});
  }
  return p;
}

ProxParams identity_prox_params(std::size_t channels, std::size_t hidden,
                                std::size_t blocks, double block_std,
                                std::uint64_t seed) {
  ProxParams p = zero_prox_params(channels, hidden, blocks);
  const std::size_t center = (kProxKernel * kProxKernel) / 2;
  for (std::size_t c = 0; c < channels; ++c) {
    p.expand[(center * channels + c) * hidden + c] = 1.0;
    p.compress[(center * hidden + c) * channels + c] = 1.0;
  }
  if (block_std > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, block_std);
    for (auto& b : p.blocks) {
      for (auto& v : b.conv1.values()) v = normal(rng);
      for (auto& v : b.conv2.values()) v = normal(rng);
    }
  }
  return p;
}

namespace {

void add_bias(Tensor& x, const Tensor& bias) {
  for (std::size_t c = 0; c < channels(x); ++c) {
    for (auto& v : x.plane(c)) v += bias[c];
  }
}

Tensor channel_sums(const Tensor& x) {
  Tensor s({channels(x)});
  for (std::size_t c = 0; c < channels(x); ++c) {
    double acc = 0.0;
    for (double v : x.plane(c)) acc += v;
    s[c] = acc;
  }
  return s;
}

Tensor relu(Tensor x) {
  for (auto& v : x.values()) v = v > 0.0 ? v : 0.0;
  return x;
}

}  // namespace

ProxTape residual_prox_tape(const ProxParams& p, const Tensor& x) {
  p.validate();
  require_stack(x, "residual_prox_forward");
  if (channels(x) != p.in_channels()) {
    throw ShapeError("residual_prox_forward: input has " +
                     std::to_string(channels(x)) + " channels, prox expects " +
                     std::to_string(p.in_channels()));
  }
  ProxTape tape;
  tape.input = x;
  tape.block_inputs.reserve(p.blocks.size() + 1);
  tape.block_inputs.push_back(conv_forward(x, p.expand));
  for (const auto& b : p.blocks) {
    const Tensor& z = tape.block_inputs.back();
    Tensor a = conv_forward(z, b.conv1);
    add_bias(a, b.bias1);
    Tensor next = conv_forward(relu(a), b.conv2);
    add_bias(next, b.bias2);
    next += z;
    tape.pre_activations.push_back(std::move(a));
    tape.block_inputs.push_back(std::move(next));
  }
  tape.output = conv_forward(tape.block_inputs.back(), p.compress);
  return tape;
}

Tensor residual_prox_forward(const ProxParams& p, const Tensor& x) {
  return residual_prox_tape(p, x).output;
}

ProxGradient residual_prox_backward(const ProxParams& p, const ProxTape& tape,
                                    const Tensor& upstream) {
  require_same_shape(tape.output, upstream, "residual_prox_backward");
  ProxGradient g{Tensor(), zero_prox_params(p.in_channels(),
                                            p.hidden_channels(),
                                            p.block_count())};
  const Tensor& last = tape.block_inputs.back();
  g.params.compress = conv_filter_grad(last, upstream, kProxKernel);
  Tensor gz = conv_adjoint(upstream, p.compress);

  for (std::size_t t = p.blocks.size(); t-- > 0;) {
    const ResBlock& b = p.blocks[t];
    ResBlock& gb = g.params.blocks[t];
    const Tensor& a = tape.pre_activations[t];
    const Tensor& z = tape.block_inputs[t];

    gb.bias2 = channel_sums(gz);
    gb.conv2 = conv_filter_grad(relu(a), gz, kProxKernel);
    Tensor ga = conv_adjoint(gz, b.conv2);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      if (!(a[i] > 0.0)) ga[i] = 0.0;
    }
    gb.bias1 = channel_sums(ga);
    gb.conv1 = conv_filter_grad(z, ga, kProxKernel);
    gz += conv_adjoint(ga, b.conv1);
  }

  g.params.expand = conv_filter_grad(tape.input, gz, kProxKernel);
  g.input = conv_adjoint(gz, p.expand);
  return g;
}

ProxGradient residual_prox_backward(const ProxParams& p, const Tensor& x,
                                    const Tensor& upstream) {
  return residual_prox_backward(p, residual_prox_tape(p, x), upstream);
}

// ---------------------------------------------------------------------------

Tensor apply_prox(const ProxKind& prox, const Tensor& x) {
  struct Visitor {
    const Tensor& x;
    Tensor operator()(const SoftThreshold& s) const {
      return soft_threshold(x, s.tau);
    }
    Tensor operator()(const BoxProject& b) const {
      return box_project(x, b.lo, b.hi);
    }
    Tensor operator()(const IdentityProx&) const { return x; }
    Tensor operator()(const ResidualProx& r) const {
      return residual_prox_forward(r.params, x);
    }
  };
  return std::visit(Visitor{x}, prox);
}

std::string describe(const ProxKind& prox) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SoftThreshold>) {
          out << "soft_threshold(tau=" << p.tau << ")";
        } else if constexpr (std::is_same_v<T, BoxProject>) {
          out << "box_project[" << p.lo << ", " << p.hi << "]";
        } else if constexpr (std::is_same_v<T, IdentityProx>) {
          out << "identity";
        } else {
          out << "residual(hidden=" << p.params.hidden_channels()
              << ", blocks=" << p.params.block_count() << ")";
        }
      },
      prox);
  return out.str();
}

}  // namespace rcd
