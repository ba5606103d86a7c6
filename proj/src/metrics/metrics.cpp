#include "metrics/metrics.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ptych {

namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> gaussian_taps()
{
    std::array<double, kWindow> taps{};
    double total = 0.0;
    for (std::size_t i = 0; i < kWindow; ++i) {
        const double d = static_cast<double>(i) - (kWindow - 1) / 2.0;
        taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        total += taps[i];
    }
    for (double& t : taps)
        t /= total;
    return taps;
}

// Separable "valid" filtering: output is (h - 10) x (w - 10).
RealImage filter_valid(const RealImage& img, const std::array<double, kWindow>& taps)
{
    const std::size_t oh = img.height() - kWindow + 1;
    const std::size_t ow = img.width() - kWindow + 1;
    RealImage rows(img.height(), ow);
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < kWindow; ++k)
                s += taps[k] * img(r, c + k);
            rows(r, c) = s;
        }
    RealImage out(oh, ow);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < kWindow; ++k)
                s += taps[k] * rows(r + k, c);
            out(r, c) = s;
        }
    return out;
}

RealImage product(const RealImage& a, const RealImage& b)
{
    RealImage out(a.height(), a.width());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] * b[i];
    return out;
}

} // namespace

double mse(const RealImage& a, const RealImage& b)
{
    require_same_dims(a, b, "mse");
    if (a.empty())
        throw DimensionError("mse: empty images");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

double psnr(const RealImage& a, const RealImage& b, double peak)
{
    const double e = mse(a, b);
    if (e == 0.0)
        return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(peak * peak / e));
}

double ssim(const RealImage& a, const RealImage& b)
{
    require_same_dims(a, b, "ssim");
    if (a.height() < kWindow || a.width() < kWindow)
        throw DimensionError("ssim: images must be at least 11x11");

    const auto taps = gaussian_taps();
    const RealImage mu_a = filter_valid(a, taps);
    const RealImage mu_b = filter_valid(b, taps);
    const RealImage e_aa = filter_valid(product(a, a), taps);
    const RealImage e_bb = filter_valid(product(b, b), taps);
    const RealImage e_ab = filter_valid(product(a, b), taps);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double var_a = e_aa[i] - ma * ma;
        const double var_b = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
        const double den = (ma * ma + mb * mb + kC1) * (var_a + var_b + kC2);
        total += num / den;
    }
    return total / static_cast<double>(mu_a.size());
}

MetricReport evaluate(const RealImage& estimate, const RealImage& truth)
{
    return MetricReport{psnr(estimate, truth), ssim(estimate, truth)};
}

} // namespace ptych
