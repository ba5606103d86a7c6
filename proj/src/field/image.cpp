#include "field/image.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace ptych {

template <typename T>
Grid<T>::Grid(std::size_t height, std::size_t width, T fill)
    : height_(height), width_(width), values_(height * width, fill)
{
}

template <typename T>
Grid<T>::Grid(std::size_t height, std::size_t width, std::vector<T> values)
    : height_(height), width_(width), values_(std::move(values))
{
    if (values_.size() != height * width)
        throw DimensionError("grid storage size " + std::to_string(values_.size()) +
                             " does not match " + std::to_string(height) + "x" +
                             std::to_string(width));
}

template class Grid<double>;
template class Grid<Complex>;
template class Grid<std::uint8_t>;

void require_same_dims(std::size_t h1, std::size_t w1, std::size_t h2, std::size_t w2,
                       const std::string& what)
{
    if (h1 != h2 || w1 != w2)
        throw DimensionError(what + ": dimension mismatch " + std::to_string(h1) + "x" +
                             std::to_string(w1) + " vs " + std::to_string(h2) + "x" +
                             std::to_string(w2));
}

void require_finite(const RealImage& img, const std::string& what)
{
    for (double v : img.values())
        if (!std::isfinite(v))
            throw NumericError(what + ": non-finite value");
}

void require_finite(const ComplexField& field, const std::string& what)
{
    for (const Complex& v : field.values())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericError(what + ": non-finite value");
}

ComplexField to_complex(const RealImage& img)
{
    ComplexField out(img.height(), img.width());
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = Complex(img[i], 0.0);
    return out;
}

RealImage real_part(const ComplexField& field)
{
    RealImage out(field.height(), field.width());
    for (std::size_t i = 0; i < field.size(); ++i)
        out[i] = field[i].real();
    return out;
}

RealImage magnitude(const ComplexField& field)
{
    RealImage out(field.height(), field.width());
    for (std::size_t i = 0; i < field.size(); ++i)
        out[i] = std::abs(field[i]);
    return out;
}

RealImage clamp(const RealImage& img, double lo, double hi)
{
    RealImage out = img;
    for (double& v : out.values())
        v = std::clamp(v, lo, hi);
    return out;
}

RealImage normalize_unit_range(const RealImage& img)
{
    if (img.empty())
        return img;
    const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
    const double a = *lo;
    const double span = *hi - *lo;
    RealImage out(img.height(), img.width());
    if (span <= 0.0)
        return out;
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = (img[i] - a) / span;
    return out;
}

RealImage resize(const RealImage& img, std::size_t height, std::size_t width)
{
    if (height == 0 || width == 0)
        throw ConfigError("resize: target dims must be positive");
    if (img.height() == height && img.width() == width)
        return img;

    RealImage out(height, width);
    if (img.height() % height == 0 && img.width() % width == 0) {
        const std::size_t fy = img.height() / height;
        const std::size_t fx = img.width() / width;
        const double norm = 1.0 / static_cast<double>(fy * fx);
        for (std::size_t r = 0; r < height; ++r)
            for (std::size_t c = 0; c < width; ++c) {
                double s = 0.0;
                for (std::size_t dy = 0; dy < fy; ++dy)
                    for (std::size_t dx = 0; dx < fx; ++dx)
                        s += img(r * fy + dy, c * fx + dx);
                out(r, c) = s * norm;
            }
        return out;
    }

    const double sy = static_cast<double>(img.height()) / static_cast<double>(height);
    const double sx = static_cast<double>(img.width()) / static_cast<double>(width);
    for (std::size_t r = 0; r < height; ++r) {
        const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
        const auto y0 = static_cast<std::size_t>(y);
        const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
        const double ty = y - y0;
        for (std::size_t c = 0; c < width; ++c) {
            const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
            const auto x0 = static_cast<std::size_t>(x);
            const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
            const double tx = x - x0;
            out(r, c) = (1 - ty) * ((1 - tx) * img(y0, x0) + tx * img(y0, x1)) +
                        ty * ((1 - tx) * img(y1, x0) + tx * img(y1, x1));
        }
    }
    return out;
}

double mean(const RealImage& img)
{
    double s = 0.0;
    for (double v : img.values())
        s += v;
    return img.empty() ? 0.0 : s / static_cast<double>(img.size());
}

std::uint64_t fingerprint(const RealImage& img)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t word) {
        for (int i = 0; i < 8; ++i) {
            h ^= (word >> (8 * i)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    feed(img.height());
    feed(img.width());
    for (double v : img.values()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        feed(bits);
    }
    return h;
}

} // namespace ptych
