#pragma once

#include "common/rng.hpp"
#include "field/image.hpp"

#include <string>
#include <vector>

namespace ptych {

// One to three Gaussian blobs on a dark background, values in [0, 1].
RealImage blob_image(std::size_t height, std::size_t width, Rng& rng);
std::vector<RealImage> blob_dataset(std::size_t count, std::size_t height, std::size_t width,
                                    std::uint64_t seed);

// Horizontal and vertical bar gratings whose period shrinks across the image.
RealImage bars_image(std::size_t height, std::size_t width);

// Resolution-chart style pattern: groups of three bars in both orientations,
// halving in size from group to group, on a mid-gray background.
RealImage chart_image(std::size_t height, std::size_t width);

// Smooth bumps plus fine texture; a stand-in for a natural scene.
RealImage scene_image(std::size_t height, std::size_t width, std::uint64_t seed);

// Resolves "synthetic:<kind>[:<seed>]" for kind in {blobs, bars, chart,
// scene}. Throws ConfigError for unknown kinds.
RealImage synthetic_image(const std::string& spec, std::size_t height, std::size_t width);

bool is_synthetic_name(const std::string& name);

// Synthetic name, PNG or PTYF path, returned as a size x size image in
// [0, 1]. Files are center-cropped to a square before resizing.
RealImage load_test_image(const std::string& source, std::size_t size);

// Short label for tables: the file stem, or the synthetic name.
std::string image_label(const std::string& source);

} // namespace ptych
