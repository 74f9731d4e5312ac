#pragma once

#include <cstddef>
#include <filesystem>

#include "rcd/prox.hpp"
#include "rcd/tensor.hpp"

namespace rcd {

// The convolutional dictionary C: N rain kernels of size k×k×3, stored as a
// {k, k, N, 3} filter so that channel c of the rain layer is
// sum_n conv2d_same(M_n, C[:, :, n, c]).
class KernelBank {
 public:
  KernelBank() = default;
  explicit KernelBank(Tensor filter, bool normalized = false);

  static KernelBank zeros(std::size_t kernel_size, std::size_t count);

  std::size_t kernel_size() const { return filter_.dim(0); }
  std::size_t count() const { return filter_.dim(2); }
  bool normalized() const { return normalized_; }

  const Tensor& filter() const { return filter_; }
  // Mutable access clears the normalization flag.
  Tensor& mutable_filter() {
    normalized_ = false;
    return filter_;
  }

  // k×k×3 slice of kernel n as a {k, k, 3} tensor.
  Tensor slice(std::size_t n) const;
  void set_slice(std::size_t n, const Tensor& slice);
  double slice_norm(std::size_t n) const;

  // Scales every k×k×3 slice to unit Frobenius norm. Zero slices stay zero.
  void normalize_slices();

  friend bool operator==(const KernelBank&, const KernelBank&) = default;

 private:
  Tensor filter_;
  bool normalized_ = false;
};

void save_kernel_bank(const std::filesystem::path& path, const KernelBank& bank);
KernelBank load_kernel_bank(const std::filesystem::path& path);

struct Regularizers {
  double alpha = 0.0;
  double beta = 0.0;
  Penalty g1 = Penalty::kL1;
  Penalty g2 = Penalty::kBox;
  double box_lo = 0.0;
  double box_hi = 1.0;

  void validate() const;
};

// R = sum_n C_n (x) M_n, one color channel at a time.
Image synthesize_rain(const KernelBank& bank, const RainMapStack& maps);

// C (x)^T A: channel n is sum_c conv2d_transpose_same(A_c, C[:, :, n, c]).
RainMapStack analyze_rain(const KernelBank& bank, const Image& rain);

// O = B + R.
Image compose(const Image& background, const Image& rain);

// ||O - B - sum_n C_n (x) M_n||_F^2
double fidelity(const Image& observed, const Image& background,
                const RainMapStack& maps, const KernelBank& bank);

// fidelity + alpha * g1(M) + beta * g2(B). A box-infeasible B yields +inf.
double objective(const Image& observed, const Image& background,
                 const RainMapStack& maps, const KernelBank& bank,
                 const Regularizers& reg);

// C (x)^T (sum_n C_n (x) M_n + B - O). Half the true gradient of the
// squared-norm fidelity, matching the update rule the solver unrolls.
RainMapStack grad_M(const Image& observed, const Image& background,
                    const RainMapStack& maps, const KernelBank& bank);

// sum_n C_n (x) M_n + B - O, likewise half the true gradient in B.
Image grad_B(const Image& observed, const Image& background,
             const RainMapStack& maps, const KernelBank& bank);

void require_consistent(const Image& observed, const RainMapStack& maps,
                        const KernelBank& bank, const char* what);

}  // namespace rcd
