#pragma once

#include "field/image.hpp"

namespace ptych {

// Orthonormal 2-D DCT-II and its inverse (DCT-III), applied separably to
// the real and imaginary parts.
ComplexField dct2(const ComplexField& field);
ComplexField idct2(const ComplexField& coeffs);

RealImage dct2(const RealImage& img);
RealImage idct2(const RealImage& coeffs);

// Orthonormal DCT-II basis function (u, v) sampled on an h x w grid.
RealImage dct_basis(std::size_t height, std::size_t width, std::size_t u, std::size_t v);

} // namespace ptych
