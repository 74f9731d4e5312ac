#include "rcd/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rcd/conv.hpp"
#include "rcd/error.hpp"
#include "rcd/rcdt.hpp"

namespace rcd {

KernelBank::KernelBank(Tensor filter, bool normalized)
    : filter_(std::move(filter)), normalized_(normalized) {
  require_filter(filter_, "KernelBank");
  if (filter_.dim(3) != 3) {
    throw ShapeError("KernelBank: expected k×k×N×3, got " +
                     shape_string(filter_.shape()));
  }
  if (!filter_.all_finite()) throw NumericalError("KernelBank has non-finite entries");
}

KernelBank KernelBank::zeros(std::size_t kernel_size, std::size_t count) {
  return KernelBank(Tensor({kernel_size, kernel_size, count, 3}));
}

Tensor KernelBank::slice(std::size_t n) const {
  const std::size_t k = kernel_size();
  const std::size_t N = count();
  Tensor s({k, k, 3});
  for (std::size_t t = 0; t < k * k; ++t) {
    for (std::size_t c = 0; c < 3; ++c) s[t * 3 + c] = filter_[(t * N + n) * 3 + c];
  }
  return s;
}

void KernelBank::set_slice(std::size_t n, const Tensor& slice) {
  const std::size_t k = kernel_size();
  const std::size_t N = count();
  if (slice.shape() != Shape{k, k, 3} || n >= N) {
    throw ShapeError("KernelBank::set_slice: expected a k×k×3 slice");
  }
  for (std::size_t t = 0; t < k * k; ++t) {
    for (std::size_t c = 0; c < 3; ++c) filter_[(t * N + n) * 3 + c] = slice[t * 3 + c];
  }
  normalized_ = false;
}

double KernelBank::slice_norm(std::size_t n) const {
  return std::sqrt(frob_norm_sq(slice(n)));
}

void KernelBank::normalize_slices() {
  for (std::size_t n = 0; n < count(); ++n) {
    const double norm = slice_norm(n);
    if (norm > 0.0) set_slice(n, (1.0 / norm) * slice(n));
  }
  normalized_ = true;
}

void save_kernel_bank(const std::filesystem::path& path, const KernelBank& bank) {
  save_tensor(path, bank.filter());
}

KernelBank load_kernel_bank(const std::filesystem::path& path) {
  Tensor t = load_tensor(path);
  if (t.rank() != 4 || t.dim(3) != 3 || t.dim(0) != t.dim(1) ||
      t.dim(0) % 2 == 0) {
    throw FormatError("kernel bank file " + path.string() +
                      " does not hold a k×k×N×3 tensor with odd k");
  }
  return KernelBank(std::move(t));
}

void Regularizers::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw ConfigError("regularization weights must be nonnegative");
  }
  if (!(box_lo <= box_hi)) throw ConfigError("box bounds out of order");
}

void require_consistent(const Image& observed, const RainMapStack& maps,
                        const KernelBank& bank, const char* what) {
  require_image(observed, what);
  require_stack(maps, what);
  if (channels(maps) != bank.count()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(channels(maps)) +
                     " rain maps for " + std::to_string(bank.count()) +
                     " kernels");
  }
  if (height(maps) != height(observed) || width(maps) != width(observed)) {
    throw ShapeError(std::string(what) + ": rain maps " +
                     shape_string(maps.shape()) + " do not match image " +
                     shape_string(observed.shape()));
  }
}

Image synthesize_rain(const KernelBank& bank, const RainMapStack& maps) {
  require_stack(maps, "synthesize_rain");
  if (channels(maps) != bank.count()) {
    throw ShapeError("synthesize_rain: " + std::to_string(channels(maps)) +
                     " rain maps for " + std::to_string(bank.count()) +
                     " kernels");
  }
  return conv_forward(maps, bank.filter());
}

RainMapStack analyze_rain(const KernelBank& bank, const Image& rain) {
  require_image(rain, "analyze_rain");
  return conv_adjoint(rain, bank.filter());
}

Image compose(const Image& background, const Image& rain) {
  require_same_shape(background, rain, "compose");
  return background + rain;
}

namespace {

// sum_n C_n (x) M_n + B - O
Image signed_residual(const Image& observed, const Image& background,
                      const RainMapStack& maps, const KernelBank& bank,
                      const char* what) {
  require_consistent(observed, maps, bank, what);
  require_same_shape(observed, background, what);
  Image r = synthesize_rain(bank, maps);
  r += background;
  r -= observed;
  return r;
}

}  // namespace

double fidelity(const Image& observed, const Image& background,
                const RainMapStack& maps, const KernelBank& bank) {
  return frob_norm_sq(signed_residual(observed, background, maps, bank, "fidelity"));
}

double objective(const Image& observed, const Image& background,
                 const RainMapStack& maps, const KernelBank& bank,
                 const Regularizers& reg) {
  reg.validate();
  double value = fidelity(observed, background, maps, bank);
  if (reg.alpha > 0.0) value += reg.alpha * penalty_value(reg.g1, maps, reg.box_lo, reg.box_hi);
  if (reg.g2 == Penalty::kBox) {
    // The indicator is infinite off the box regardless of beta.
    if (std::isinf(penalty_value(reg.g2, background, reg.box_lo, reg.box_hi))) {
      return std::numeric_limits<double>::infinity();
    }
  } else if (reg.beta > 0.0) {
    value += reg.beta * penalty_value(reg.g2, background, reg.box_lo, reg.box_hi);
  }
  return value;
}

RainMapStack grad_M(const Image& observed, const Image& background,
                    const RainMapStack& maps, const KernelBank& bank) {
  return analyze_rain(bank, signed_residual(observed, background, maps, bank, "grad_M"));
}

Image grad_B(const Image& observed, const Image& background,
             const RainMapStack& maps, const KernelBank& bank) {
  return signed_residual(observed, background, maps, bank, "grad_B");
}

}  // namespace rcd
