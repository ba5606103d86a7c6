#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ptych {

using Complex = std::complex<double>;

// Row-major 2-D grid. Shared storage for real images, complex fields and
// binary masks.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(std::size_t height, std::size_t width, T fill = T{});
    Grid(std::size_t height, std::size_t width, std::vector<T> values);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    T& operator()(std::size_t row, std::size_t col) noexcept { return values_[row * width_ + col]; }
    const T& operator()(std::size_t row, std::size_t col) const noexcept
    {
        return values_[row * width_ + col];
    }
    T& operator[](std::size_t i) noexcept { return values_[i]; }
    const T& operator[](std::size_t i) const noexcept { return values_[i]; }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }
    std::vector<T>& storage() noexcept { return values_; }
    const std::vector<T>& storage() const noexcept { return values_; }

    bool same_dims(const Grid<T>& other) const noexcept
    {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> values_;
};

using RealImage = Grid<double>;
using ComplexField = Grid<Complex>;
using BinaryMask = Grid<std::uint8_t>;

// Throws DimensionError naming `what` when dims differ.
void require_same_dims(std::size_t h1, std::size_t w1, std::size_t h2, std::size_t w2,
                       const std::string& what);

template <typename A, typename B>
void require_same_dims(const Grid<A>& a, const Grid<B>& b, const std::string& what)
{
    require_same_dims(a.height(), a.width(), b.height(), b.width(), what);
}

// Throws NumericError on NaN/Inf.
void require_finite(const RealImage& img, const std::string& what);
void require_finite(const ComplexField& field, const std::string& what);

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

ComplexField to_complex(const RealImage& img);
RealImage real_part(const ComplexField& field);
RealImage magnitude(const ComplexField& field);

RealImage clamp(const RealImage& img, double lo, double hi);

// Rescales values linearly so that min -> 0 and max -> 1. Constant images map to 0.
RealImage normalize_unit_range(const RealImage& img);

// Area-averaging resize when shrinking by an integer factor, bilinear otherwise.
RealImage resize(const RealImage& img, std::size_t height, std::size_t width);

double mean(const RealImage& img);

// Hash of dims and exact value bits (FNV-1a); used to fingerprint inputs in manifests.
std::uint64_t fingerprint(const RealImage& img);

extern template class Grid<double>;
extern template class Grid<Complex>;
extern template class Grid<std::uint8_t>;

} // namespace ptych
