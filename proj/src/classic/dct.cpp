#include "classic/dct.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace ptych {

namespace {

// Row-major n x n orthonormal DCT-II matrix: C[k][i].
std::vector<double> dct_matrix(std::size_t n)
{
    std::vector<double> c(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            c[k * n + i] = scale * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n));
    }
    return c;
}

// out = Ch * in * Cw^T (forward) or Ch^T * in * Cw (inverse).
template <typename T>
Grid<T> separable(const Grid<T>& in, bool inverse)
{
    const std::size_t h = in.height();
    const std::size_t w = in.width();
    const auto ch = dct_matrix(h);
    const auto cw = dct_matrix(w);
    auto coef = [inverse](const std::vector<double>& c, std::size_t n, std::size_t k, std::size_t i) {
        return inverse ? c[i * n + k] : c[k * n + i];
    };

    Grid<T> tmp(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t k = 0; k < w; ++k) {
            T s{};
            for (std::size_t i = 0; i < w; ++i)
                s += coef(cw, w, k, i) * in(r, i);
            tmp(r, k) = s;
        }
    Grid<T> out(h, w);
    for (std::size_t k = 0; k < h; ++k)
        for (std::size_t c = 0; c < w; ++c) {
            T s{};
            for (std::size_t i = 0; i < h; ++i)
                s += coef(ch, h, k, i) * tmp(i, c);
            out(k, c) = s;
        }
    return out;
}

} // namespace

ComplexField dct2(const ComplexField& field) { return separable(field, false); }
ComplexField idct2(const ComplexField& coeffs) { return separable(coeffs, true); }
RealImage dct2(const RealImage& img) { return separable(img, false); }
RealImage idct2(const RealImage& coeffs) { return separable(coeffs, true); }

RealImage dct_basis(std::size_t height, std::size_t width, std::size_t u, std::size_t v)
{
    RealImage coeffs(height, width);
    coeffs(u, v) = 1.0;
    return idct2(coeffs);
}

} // namespace ptych
