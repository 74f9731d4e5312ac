#pragma once

#include <cstddef>
#include <span>

#include "rcd/tensor.hpp"

namespace rcd {

// "Same" 2-D cross-correlation with zero padding (k-1)/2 and stride 1:
//   out[i,j] = sum_{u,v} kernel[u,v] * x_padded[i+u, j+v]
// k must be odd.
Plane conv2d_same(const Plane& x, const Plane& kernel);

// Exact adjoint of conv2d_same in its first argument:
//   <conv2d_same(x,K), y> == <x, conv2d_transpose_same(y,K)>
Plane conv2d_transpose_same(const Plane& y, const Plane& kernel);

// Multi-channel filters are tensors of shape {k, k, in, out}. Channel o of
// the forward output is sum_i conv2d_same(x[i], w[:,:,i,o]).
Tensor conv_forward(const Tensor& x, const Tensor& filter);

// Adjoint of conv_forward in x: channel i is
// sum_o conv2d_transpose_same(y[o], w[:,:,i,o]).
Tensor conv_adjoint(const Tensor& y, const Tensor& filter);

// Gradient of <conv_forward(x, w), upstream> with respect to w. Also the
// gradient of <conv_adjoint(y, w), g> with respect to w when called as
// conv_filter_grad(g, y, k).
Tensor conv_filter_grad(const Tensor& x, const Tensor& upstream,
                        std::size_t kernel_size);

void require_filter(const Tensor& filter, const char* what);
inline std::size_t filter_size(const Tensor& f) { return f.dim(0); }
inline std::size_t filter_in(const Tensor& f) { return f.dim(2); }
inline std::size_t filter_out(const Tensor& f) { return f.dim(3); }

// k×k kernel for the (in, out) channel pair, copied out of a filter.
Plane filter_slice(const Tensor& filter, std::size_t in, std::size_t out);

namespace kernels {

// Raw accumulate kernels on row-major H×W planes. Each output element is
// summed in fixed (u, v) order.
void correlate_add(std::span<const double> x, std::size_t h, std::size_t w,
                   std::span<const double> kernel, std::size_t k,
                   std::span<double> out);
void correlate_transpose_add(std::span<const double> y, std::size_t h,
                             std::size_t w, std::span<const double> kernel,
                             std::size_t k, std::span<double> out);
// grad[u,v] += sum_{i,j} upstream[i,j] * x_padded[i+u, j+v]
void kernel_grad_add(std::span<const double> x,
                     std::span<const double> upstream, std::size_t h,
                     std::size_t w, std::size_t k, std::span<double> grad);

}  // namespace kernels

}  // namespace rcd
