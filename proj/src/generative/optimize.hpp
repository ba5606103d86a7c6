#pragma once

#include "autodiff/parameters.hpp"
#include "generative/result.hpp"

#include <functional>
#include <optional>

namespace ptych {

struct GraphOutput {
    ad::Tensor image;            // (H, W) estimate
    ad::Tensor measurement_loss; // scalar recorded in the trace
    std::optional<ad::Tensor> objective; // minimized instead when set
};

using GraphBuilder = std::function<GraphOutput(ad::Tape&, const std::vector<ad::Tensor>&)>;

// Adam loop shared by the generative solvers. Each iteration rebuilds the
// graph, records the measurement loss of the current parameters, keeps the
// image of the best iterate, then steps. The returned image is clamped to
// [0, 1].
ReconResult run_adam(ad::ParameterSet& params, const GenReconConfig& cfg, const RealImage* truth,
                     const GraphBuilder& build);

} // namespace ptych
