#pragma once

#include "field/image.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ptych {

struct SubsampleMask {
    std::vector<BinaryMask> per_camera;
    double ratio = 100.0;
    std::uint64_t seed = 0;

    std::size_t camera_count() const noexcept { return per_camera.size(); }
    std::size_t retained_count() const noexcept;
};

// Total retained count: round(ratio/100 * h*w * L), split as evenly as
// possible (the first `total % L` cameras keep one extra pixel). Each
// camera's subset is drawn without replacement from a sub-seed derived
// from (seed, camera index).
SubsampleMask make_subsample_mask(std::size_t height, std::size_t width, std::size_t cameras,
                                  double ratio, std::uint64_t seed);

// Per-camera retained counts for the given totals; exposed for checks.
std::vector<std::size_t> retained_counts(std::size_t pixels, std::size_t cameras, double ratio);

struct NoiseSpec {
    double level = 0.0; // percent of the [0,1] range; sigma = level / 100
    std::uint64_t seed = 0;
    bool clip_negative = false;

    double sigma() const noexcept { return level / 100.0; }
};

void validate(const NoiseSpec& spec);

// y + eps, eps ~ N(0, sigma^2) i.i.d.; not clipped unless requested.
RealImage add_noise(const RealImage& y, const NoiseSpec& spec);

} // namespace ptych
