#pragma once

#include "field/image.hpp"

namespace ptych {

// Unitary 2-D DFT (1/sqrt(h*w) in each direction). The spectrum uses the
// DC-centered layout: frequency (0,0) sits at pixel (h/2, w/2), so pupil
// geometry is expressed around the plane center. Dimensions must be powers
// of two.
ComplexField fft2(const ComplexField& field);

// Inverse of fft2: takes a DC-centered spectrum, returns the spatial field.
ComplexField ifft2(const ComplexField& spectrum);

// Throws ConfigError unless both dims are powers of two.
void require_fft_dims(std::size_t height, std::size_t width);

} // namespace ptych
