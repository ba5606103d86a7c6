#include "field/sampling.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ptych {

std::size_t SubsampleMask::retained_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& m : per_camera)
        for (auto v : m.values())
            n += v;
    return n;
}

std::vector<std::size_t> retained_counts(std::size_t pixels, std::size_t cameras, double ratio)
{
    if (cameras == 0)
        throw ConfigError("subsample mask: camera count must be >= 1");
    if (!(ratio > 0.0 && ratio <= 100.0))
        throw ConfigError("subsample ratio must lie in (0, 100]");
    const double exact = ratio * static_cast<double>(pixels) * static_cast<double>(cameras) / 100.0;
    const auto total = static_cast<std::size_t>(std::llround(exact));
    std::vector<std::size_t> counts(cameras, total / cameras);
    for (std::size_t l = 0; l < total % cameras; ++l)
        ++counts[l];
    for (std::size_t l = 0; l < cameras; ++l)
        if (counts[l] == 0)
            throw ConfigError("subsample ratio " + std::to_string(ratio) +
                              "% leaves camera " + std::to_string(l) + " with no samples");
    return counts;
}

SubsampleMask make_subsample_mask(std::size_t height, std::size_t width, std::size_t cameras,
                                  double ratio, std::uint64_t seed)
{
    const std::size_t n = height * width;
    const auto counts = retained_counts(n, cameras, ratio);

    SubsampleMask out;
    out.ratio = ratio;
    out.seed = seed;
    out.per_camera.reserve(cameras);
    std::vector<std::size_t> index(n);
    for (std::size_t l = 0; l < cameras; ++l) {
        BinaryMask mask(height, width, 0);
        if (counts[l] == n) {
            std::fill(mask.values().begin(), mask.values().end(), std::uint8_t{1});
        } else {
            // Partial Fisher-Yates: the first counts[l] slots are the sample.
            Rng rng(split_seed(seed, l));
            std::iota(index.begin(), index.end(), std::size_t{0});
            for (std::size_t i = 0; i < counts[l]; ++i) {
                const std::size_t j = i + rng.below(n - i);
                std::swap(index[i], index[j]);
                mask[index[i]] = 1;
            }
        }
        out.per_camera.push_back(std::move(mask));
    }
    return out;
}

void validate(const NoiseSpec& spec)
{
    if (!(spec.level >= 0.0) || !std::isfinite(spec.level))
        throw ConfigError("noise level must be finite and >= 0");
}

RealImage add_noise(const RealImage& y, const NoiseSpec& spec)
{
    validate(spec);
    RealImage out = y;
    if (spec.level > 0.0) {
        Rng rng(spec.seed);
        const double sigma = spec.sigma();
        for (double& v : out.values())
            v += sigma * rng.normal();
    }
    if (spec.clip_negative)
        for (double& v : out.values())
            v = std::max(v, 0.0);
    return out;
}

} // namespace ptych
