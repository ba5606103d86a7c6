#pragma once

#include "generative/decoder.hpp"
#include "generative/result.hpp"
#include "measurement/forward.hpp"

namespace ptych {

// Fits the decoder weights (latent input fixed) to the measurements with
// Adam on the differentiable measurement loss; returns the best-loss iterate.
ReconResult untrained_ptych(const MeasurementSet& m, const DecoderConfig& dcfg, const GenReconConfig& ocfg,
                            const RealImage* truth = nullptr);

} // namespace ptych
