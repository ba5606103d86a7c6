#pragma once

#include "autodiff/tensor.hpp"
#include "measurement/forward.hpp"

namespace ptych::ad {

// Differentiable sum_l ||y_l - M_l |A_l x|||^2 for a real (H, W) image,
// built from the Fourier layers: one forward fft, then per camera
// mask -> ifft -> magnitude -> subsample -> squared residual.
Tensor measurement_loss(const Tensor& image, const MeasurementSet& m);

} // namespace ptych::ad
