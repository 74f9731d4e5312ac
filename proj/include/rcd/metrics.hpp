#pragma once

#include "rcd/tensor.hpp"

namespace rcd {

// BT.601 full-range luma on [0, 1] scale.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

// Value reported in tables when two images are identical.
inline constexpr double kPsnrCap = 99.0;

Plane rgb_to_y(const Image& img);

// 10 log10(peak^2 / MSE). Returns +infinity for identical planes.
double psnr(const Plane& ref, const Plane& est, double peak = 1.0);
inline double cap_psnr(double db) { return db > kPsnrCap ? kPsnrCap : db; }

// Mean SSIM over all 11×11 Gaussian (sigma 1.5) windows fully inside the
// plane, K1 = 0.01, K2 = 0.03.
double ssim(const Plane& ref, const Plane& est, double peak = 1.0);

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

// Evaluation protocol: both images clamped to [0, 1] (what an 8-bit file
// would hold), converted to luma, then compared. PSNR capped at 99 dB.
double psnr_y(const Image& ref, const Image& est);
double ssim_y(const Image& ref, const Image& est);

}  // namespace rcd
