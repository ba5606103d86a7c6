#pragma once

#include "field/image.hpp"

#include <cstddef>
#include <vector>

namespace ptych {

// Circular aperture in the DC-centered Fourier plane.
struct PupilMask {
    double center_row = 0.0;
    double center_col = 0.0;
    double radius = 0.0;
    BinaryMask support;

    std::size_t height() const noexcept { return support.height(); }
    std::size_t width() const noexcept { return support.width(); }
    std::size_t area() const noexcept;
};

// Rasterizes a disk: pixel p is on iff |p - center| <= radius (ties included).
PupilMask make_pupil(std::size_t height, std::size_t width, double center_row, double center_col,
                     double radius);

struct CameraGeometry {
    std::size_t grid_size = 5;
    double radius = 0.0;
    double spacing = 0.0;
};

// Center-to-center distance giving the requested fractional area overlap
// between two disks of the given radius.
double spacing_for_overlap(double radius, double overlap_fraction);

// g = 5, radius = n/8 (n = min(h, w)), spacing for 60% area overlap.
CameraGeometry default_geometry(std::size_t height, std::size_t width);

class CameraArray {
public:
    CameraArray() = default;
    CameraArray(std::size_t height, std::size_t width, CameraGeometry geometry,
                std::vector<PupilMask> pupils);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    const CameraGeometry& geometry() const noexcept { return geometry_; }
    std::size_t camera_count() const noexcept { return pupils_.size(); }
    const std::vector<PupilMask>& pupils() const noexcept { return pupils_; }
    const PupilMask& pupil(std::size_t i) const { return pupils_.at(i); }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    CameraGeometry geometry_;
    std::vector<PupilMask> pupils_;
};

// g x g pupils on a square grid centered on the Fourier plane, ordered
// row-major. For g > 1 every disk must lie inside the plane; a single
// camera may exceed it (the full-aperture limit).
CameraArray make_camera_array(std::size_t height, std::size_t width, const CameraGeometry& geometry);

} // namespace ptych
