#include "field/pupil.hpp"

#include "common/error.hpp"
#include "field/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ptych {

std::size_t PupilMask::area() const noexcept
{
    std::size_t n = 0;
    for (auto v : support.values())
        n += v;
    return n;
}

PupilMask make_pupil(std::size_t height, std::size_t width, double center_row, double center_col,
                     double radius)
{
    if (!(radius >= 0.0) || !std::isfinite(radius))
        throw ConfigError("pupil radius must be finite and non-negative");
    PupilMask p{center_row, center_col, radius, BinaryMask(height, width)};
    const double r2 = radius * radius;
    for (std::size_t r = 0; r < height; ++r) {
        const double dy = static_cast<double>(r) - center_row;
        for (std::size_t c = 0; c < width; ++c) {
            const double dx = static_cast<double>(c) - center_col;
            p.support(r, c) = (dy * dy + dx * dx <= r2) ? 1 : 0;
        }
    }
    if (p.area() == 0)
        throw ConfigError("pupil has empty support");
    return p;
}

double spacing_for_overlap(double radius, double overlap_fraction)
{
    if (!(overlap_fraction > 0.0 && overlap_fraction < 1.0))
        throw ConfigError("overlap fraction must lie in (0, 1)");
    // Lens area of two unit disks at distance u, over pi; decreasing in u on [0, 2].
    auto fraction = [](double u) {
        return (2.0 / std::numbers::pi) * (std::acos(u / 2.0) - (u / 2.0) * std::sqrt(1.0 - u * u / 4.0));
    };
    double lo = 0.0;
    double hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (fraction(mid) > overlap_fraction)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi) * radius;
}

CameraGeometry default_geometry(std::size_t height, std::size_t width)
{
    const double radius = static_cast<double>(std::min(height, width)) / 8.0;
    return CameraGeometry{5, radius, spacing_for_overlap(radius, 0.6)};
}

CameraArray::CameraArray(std::size_t height, std::size_t width, CameraGeometry geometry,
                         std::vector<PupilMask> pupils)
    : height_(height), width_(width), geometry_(geometry), pupils_(std::move(pupils))
{
}

CameraArray make_camera_array(std::size_t height, std::size_t width, const CameraGeometry& geometry)
{
    require_fft_dims(height, width);
    const std::size_t g = geometry.grid_size;
    if (g < 1)
        throw ConfigError("camera grid size must be >= 1");
    if (!(geometry.radius >= 1.0))
        throw ConfigError("pupil radius must be >= 1 pixel");
    if (g > 1 && !(geometry.spacing > 0.0))
        throw ConfigError("pupil spacing must be positive");

    const double c_row = static_cast<double>(height / 2);
    const double c_col = static_cast<double>(width / 2);
    const double half = (static_cast<double>(g) - 1.0) / 2.0;

    std::vector<PupilMask> pupils;
    pupils.reserve(g * g);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            const double row = c_row + (static_cast<double>(i) - half) * geometry.spacing;
            const double col = c_col + (static_cast<double>(j) - half) * geometry.spacing;
            if (g > 1) {
                const bool inside = row - geometry.radius >= 0.0 &&
                                    row + geometry.radius <= static_cast<double>(height - 1) &&
                                    col - geometry.radius >= 0.0 &&
                                    col + geometry.radius <= static_cast<double>(width - 1);
                if (!inside)
                    throw ConfigError("camera array: pupil " + std::to_string(i * g + j) +
                                      " exceeds the Fourier plane bounds");
            }
            pupils.push_back(make_pupil(height, width, row, col, geometry.radius));
        }
    }
    return CameraArray(height, width, geometry, std::move(pupils));
}

} // namespace ptych
