#include "data/synthetic.hpp"

#include "common/error.hpp"
#include "field/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

namespace ptych {

RealImage blob_image(std::size_t height, std::size_t width, Rng& rng)
{
    RealImage img(height, width, 0.0);
    const std::size_t count = 1 + rng.below(3);
    const double side = static_cast<double>(std::min(height, width));
    for (std::size_t b = 0; b < count; ++b) {
        const double cr = rng.uniform(0.2, 0.8) * static_cast<double>(height);
        const double cc = rng.uniform(0.2, 0.8) * static_cast<double>(width);
        const double sigma = rng.uniform(0.08, 0.2) * side;
        const double amp = rng.uniform(0.4, 1.0);
        for (std::size_t r = 0; r < height; ++r)
            for (std::size_t c = 0; c < width; ++c) {
                const double dr = static_cast<double>(r) + 0.5 - cr;
                const double dc = static_cast<double>(c) + 0.5 - cc;
                img(r, c) += amp * std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
            }
    }
    return clamp(img, 0.0, 1.0);
}

std::vector<RealImage> blob_dataset(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed)
{
    Rng rng(split_seed(seed, Stream::Data));
    std::vector<RealImage> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(blob_image(height, width, rng));
    return out;
}

RealImage bars_image(std::size_t height, std::size_t width)
{
    RealImage img(height, width, 0.0);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const double u = (static_cast<double>(c) + 0.5) / static_cast<double>(width);
            const double v = (static_cast<double>(r) + 0.5) / static_cast<double>(height);
            // period falls from 1/4 to 1/32 of the side across the image
            const bool top = v < 0.5;
            const double t = top ? u : v * 2.0 - 1.0;
            const double x = top ? u : v;
            const double freq = 4.0 * std::pow(8.0, t);
            const double phase = 2.0 * std::numbers::pi * freq * x;
            img(r, c) = std::sin(phase) >= 0.0 ? 0.85 : 0.15;
        }
    return img;
}

namespace {

void fill_rect(RealImage& img, double r0, double c0, double r1, double c1, double value)
{
    const auto clampi = [](double v, std::size_t hi) {
        return static_cast<std::size_t>(std::clamp(std::floor(v), 0.0, static_cast<double>(hi)));
    };
    for (std::size_t r = clampi(r0, img.height()); r < clampi(r1, img.height()); ++r)
        for (std::size_t c = clampi(c0, img.width()); c < clampi(c1, img.width()); ++c)
            img(r, c) = value;
}

} // namespace

RealImage chart_image(std::size_t height, std::size_t width)
{
    RealImage img(height, width, 0.5);
    const double side = static_cast<double>(std::min(height, width));
    double bar = side / 20.0;
    double row = side * 0.06, col = side * 0.06;
    for (int group = 0; group < 6 && bar >= 0.5; ++group) {
        const double len = 5.0 * bar;
        // three vertical bars
        for (int i = 0; i < 3; ++i)
            fill_rect(img, row, col + 2.0 * i * bar, row + len, col + (2.0 * i + 1.0) * bar, 0.95);
        // three horizontal bars to the right
        const double c2 = col + 6.0 * bar;
        for (int i = 0; i < 3; ++i)
            fill_rect(img, row + 2.0 * i * bar, c2, row + (2.0 * i + 1.0) * bar, c2 + len, 0.05);
        col += 12.0 * bar;
        if (col + 12.0 * bar / 2.0 > static_cast<double>(width)) {
            col = side * 0.06;
            row += len + 2.0 * bar;
        }
        bar /= 2.0;
    }
    return img;
}

RealImage scene_image(std::size_t height, std::size_t width, std::uint64_t seed)
{
    Rng rng(split_seed(seed, Stream::Data));
    RealImage img(height, width, 0.0);
    const double h = static_cast<double>(height), w = static_cast<double>(width);
    for (int k = 0; k < 6; ++k) {
        const double cr = rng.uniform(0.0, h), cc = rng.uniform(0.0, w);
        const double sr = rng.uniform(0.05, 0.3) * h, sc = rng.uniform(0.05, 0.3) * w;
        const double amp = rng.uniform(-0.4, 0.6);
        for (std::size_t r = 0; r < height; ++r)
            for (std::size_t c = 0; c < width; ++c) {
                const double dr = (static_cast<double>(r) - cr) / sr, dc = (static_cast<double>(c) - cc) / sc;
                img(r, c) += amp * std::exp(-0.5 * (dr * dr + dc * dc));
            }
    }
    const double fr = rng.uniform(0.1, 0.3), fc = rng.uniform(0.1, 0.3);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            img(r, c) += 0.35 + 0.08 * std::sin(fr * static_cast<double>(r) * 2.0) * std::cos(fc * static_cast<double>(c) * 2.0);
    return clamp(img, 0.0, 1.0);
}

bool is_synthetic_name(const std::string& name) { return name.rfind("synthetic:", 0) == 0; }

RealImage synthetic_image(const std::string& spec, std::size_t height, std::size_t width)
{
    if (!is_synthetic_name(spec))
        throw ConfigError("not a synthetic image name: " + spec);
    std::string kind = spec.substr(10);
    std::uint64_t seed = 0;
    if (const auto colon = kind.find(':'); colon != std::string::npos) {
        try {
            seed = std::stoull(kind.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("bad seed in synthetic image name: " + spec);
        }
        kind = kind.substr(0, colon);
    }
    if (kind == "blobs") {
        Rng rng(split_seed(seed, Stream::Data));
        return blob_image(height, width, rng);
    }
    if (kind == "bars")
        return bars_image(height, width);
    if (kind == "chart")
        return chart_image(height, width);
    if (kind == "scene")
        return scene_image(height, width, seed);
    throw ConfigError("unknown synthetic image kind '" + kind + "' (blobs, bars, chart, scene)");
}

RealImage load_test_image(const std::string& source, std::size_t size)
{
    if (is_synthetic_name(source))
        return synthetic_image(source, size, size);
    const std::filesystem::path path(source);
    const RealImage full = path.extension() == ".ptyf" ? read_ptyf_real(path) : read_png(path);
    const std::size_t side = std::min(full.height(), full.width());
    const std::size_t r0 = (full.height() - side) / 2, c0 = (full.width() - side) / 2;
    RealImage square(side, side);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c)
            square(r, c) = full(r0 + r, c0 + c);
    return clamp(resize(square, size, size), 0.0, 1.0);
}

std::string image_label(const std::string& source)
{
    if (is_synthetic_name(source))
        return source;
    return std::filesystem::path(source).stem().string();
}

} // namespace ptych
