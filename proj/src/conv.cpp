#include "rcd/conv.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "rcd/error.hpp"

namespace rcd {

namespace {

void require_odd(std::size_t k) {
  if (k == 0 || k % 2 == 0) {
    throw ConfigError("kernel size must be odd, got " + std::to_string(k));
  }
}

void require_square_kernel(const Plane& kernel) {
  require_plane(kernel, "kernel");
  if (kernel.dim(0) != kernel.dim(1)) {
    throw ShapeError("kernel must be square, got " +
                     shape_string(kernel.shape()));
  }
  require_odd(kernel.dim(0));
}

// Valid output range [lo, hi) for a shift d along an axis of length n.
struct Range {
  std::size_t lo, hi;
};

inline Range shifted_range(std::ptrdiff_t d, std::size_t n) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -d);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(sn, sn - d);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// Kernel planes of a filter, gathered once per call: planes[i*out + o].
std::vector<double> gather_planes(const Tensor& filter) {
  const std::size_t k = filter_size(filter);
  const std::size_t cin = filter_in(filter);
  const std::size_t cout = filter_out(filter);
  std::vector<double> planes(cin * cout * k * k);
  for (std::size_t t = 0; t < k * k; ++t) {
    for (std::size_t i = 0; i < cin; ++i) {
      for (std::size_t o = 0; o < cout; ++o) {
        planes[(i * cout + o) * k * k + t] = filter[(t * cin + i) * cout + o];
      }
    }
  }
  return planes;
}

}  // namespace

namespace kernels {

void correlate_add(std::span<const double> x, std::size_t h, std::size_t w,
                   std::span<const double> kernel, std::size_t k,
                   std::span<double> out) {
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  for (std::size_t u = 0; u < k; ++u) {
    const std::ptrdiff_t du = static_cast<std::ptrdiff_t>(u) - pad;
    const Range rows = shifted_range(du, h);
    for (std::size_t v = 0; v < k; ++v) {
      const double kv = kernel[u * k + v];
      if (kv == 0.0) continue;
      const std::ptrdiff_t dv = static_cast<std::ptrdiff_t>(v) - pad;
      const Range cols = shifted_range(dv, w);
      for (std::size_t i = rows.lo; i < rows.hi; ++i) {
        double* dst = out.data() + i * w;
        const double* src = x.data() + (i + du) * w;
        for (std::size_t j = cols.lo; j < cols.hi; ++j) {
          dst[j] += kv * src[j + dv];
        }
      }
    }
  }
}

void correlate_transpose_add(std::span<const double> y, std::size_t h,
                             std::size_t w, std::span<const double> kernel,
                             std::size_t k, std::span<double> out) {
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  for (std::size_t u = 0; u < k; ++u) {
    const std::ptrdiff_t du = static_cast<std::ptrdiff_t>(u) - pad;
    const Range rows = shifted_range(-du, h);
    for (std::size_t v = 0; v < k; ++v) {
      const double kv = kernel[u * k + v];
      if (kv == 0.0) continue;
      const std::ptrdiff_t dv = static_cast<std::ptrdiff_t>(v) - pad;
      const Range cols = shifted_range(-dv, w);
      for (std::size_t i = rows.lo; i < rows.hi; ++i) {
        double* dst = out.data() + i * w;
        const double* src = y.data() + (i - du) * w;
        for (std::size_t j = cols.lo; j < cols.hi; ++j) {
          dst[j] += kv * src[j - dv];
        }
      }
    }
  }
}

void kernel_grad_add(std::span<const double> x,
                     std::span<const double> upstream, std::size_t h,
                     std::size_t w, std::size_t k, std::span<double> grad) {
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  std::vector<double> partial(w);
  for (std::size_t u = 0; u < k; ++u) {
    const std::ptrdiff_t du = static_cast<std::ptrdiff_t>(u) - pad;
    const Range rows = shifted_range(du, h);
    for (std::size_t v = 0; v < k; ++v) {
      const std::ptrdiff_t dv = static_cast<std::ptrdiff_t>(v) - pad;
      const Range cols = shifted_range(dv, w);
      // Column-wise partial sums vectorize; the reduction order is fixed.
      std::fill(partial.begin(), partial.end(), 0.0);
      for (std::size_t i = rows.lo; i < rows.hi; ++i) {
        const double* g = upstream.data() + i * w;
        const double* src = x.data() + (i + du) * w;
        for (std::size_t j = cols.lo; j < cols.hi; ++j) partial[j] += g[j] * src[j + dv];
      }
      double acc = 0.0;
      for (double p : partial) acc += p;
      grad[u * k + v] += acc;
    }
  }
}

}  // namespace kernels

Plane conv2d_same(const Plane& x, const Plane& kernel) {
  require_plane(x, "conv2d_same");
  require_square_kernel(kernel);
  Plane out = Tensor::zeros_like(x);
  kernels::correlate_add(x.data(), x.dim(0), x.dim(1), kernel.data(),
                         kernel.dim(0), out.data());
  return out;
}

Plane conv2d_transpose_same(const Plane& y, const Plane& kernel) {
  require_plane(y, "conv2d_transpose_same");
  require_square_kernel(kernel);
  Plane out = Tensor::zeros_like(y);
  kernels::correlate_transpose_add(y.data(), y.dim(0), y.dim(1), kernel.data(),
                                   kernel.dim(0), out.data());
  return out;
}

void require_filter(const Tensor& filter, const char* what) {
  if (filter.rank() != 4 || filter.dim(0) != filter.dim(1)) {
    throw ShapeError(std::string(what) + ": expected a k×k×in×out filter, got " +
                     shape_string(filter.shape()));
  }
  require_odd(filter.dim(0));
}

Plane filter_slice(const Tensor& filter, std::size_t in, std::size_t out) {
  require_filter(filter, "filter_slice");
  const std::size_t k = filter_size(filter);
  Plane slice({k, k});
  for (std::size_t t = 0; t < k * k; ++t) {
    slice[t] = filter[(t * filter_in(filter) + in) * filter_out(filter) + out];
  }
  return slice;
}

Tensor conv_forward(const Tensor& x, const Tensor& filter) {
  require_stack(x, "conv_forward");
  require_filter(filter, "conv_forward");
  if (channels(x) != filter_in(filter)) {
    throw ShapeError("conv_forward: input has " + std::to_string(channels(x)) +
                     " channels, filter expects " +
                     std::to_string(filter_in(filter)));
  }
  const std::size_t k = filter_size(filter);
  const std::size_t cin = filter_in(filter);
  const std::size_t cout = filter_out(filter);
  const std::vector<double> planes = gather_planes(filter);
  Tensor y({cout, height(x), width(x)});
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t i = 0; i < cin; ++i) {
      kernels::correlate_add(
          x.plane(i), height(x), width(x),
          std::span<const double>(planes).subspan((i * cout + o) * k * k, k * k),
          k, y.plane(o));
    }
  }
  return y;
}

Tensor conv_adjoint(const Tensor& y, const Tensor& filter) {
  require_stack(y, "conv_adjoint");
  require_filter(filter, "conv_adjoint");
  if (channels(y) != filter_out(filter)) {
    throw ShapeError("conv_adjoint: input has " + std::to_string(channels(y)) +
                     " channels, filter produces " +
                     std::to_string(filter_out(filter)));
  }
  const std::size_t k = filter_size(filter);
  const std::size_t cin = filter_in(filter);
  const std::size_t cout = filter_out(filter);
  const std::vector<double> planes = gather_planes(filter);
  Tensor x({cin, height(y), width(y)});
  for (std::size_t i = 0; i < cin; ++i) {
    for (std::size_t o = 0; o < cout; ++o) {
      kernels::correlate_transpose_add(
          y.plane(o), height(y), width(y),
          std::span<const double>(planes).subspan((i * cout + o) * k * k, k * k),
          k, x.plane(i));
    }
  }
  return x;
}

Tensor conv_filter_grad(const Tensor& x, const Tensor& upstream,
                        std::size_t kernel_size) {
  require_stack(x, "conv_filter_grad");
  require_stack(upstream, "conv_filter_grad");
  require_odd(kernel_size);
  if (height(x) != height(upstream) || width(x) != width(upstream)) {
    throw ShapeError("conv_filter_grad: spatial mismatch " +
                     shape_string(x.shape()) + " vs " +
                     shape_string(upstream.shape()));
  }
  const std::size_t k = kernel_size;
  const std::size_t cin = channels(x);
  const std::size_t cout = channels(upstream);
  std::vector<double> planes(cin * cout * k * k, 0.0);
  for (std::size_t i = 0; i < cin; ++i) {
    for (std::size_t o = 0; o < cout; ++o) {
      kernels::kernel_grad_add(
          x.plane(i), upstream.plane(o), height(x), width(x), k,
          std::span<double>(planes).subspan((i * cout + o) * k * k, k * k));
    }
  }
  Tensor grad({k, k, cin, cout});
  for (std::size_t t = 0; t < k * k; ++t) {
    for (std::size_t i = 0; i < cin; ++i) {
      for (std::size_t o = 0; o < cout; ++o) {
        grad[(t * cin + i) * cout + o] = planes[(i * cout + o) * k * k + t];
      }
    }
  }
  return grad;
}

}  // namespace rcd
