#pragma once

#include "field/image.hpp"

namespace ptych {

// Reported PSNR is capped here; identical images report exactly this value.
inline constexpr double kPsnrCapDb = 99.0;

struct MetricReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
};

double mse(const RealImage& a, const RealImage& b);

// 10 log10(peak^2 / MSE), capped at kPsnrCapDb.
double psnr(const RealImage& a, const RealImage& b, double peak = 1.0);

// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5),
// C1 = (0.01 L)^2, C2 = (0.03 L)^2, L = 1. The local map is evaluated
// where the window fits entirely inside the image and then averaged.
double ssim(const RealImage& a, const RealImage& b);

MetricReport evaluate(const RealImage& estimate, const RealImage& truth);

} // namespace ptych
