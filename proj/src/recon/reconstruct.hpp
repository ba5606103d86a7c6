#pragma once

#include "generative/flow.hpp"
#include "generative/result.hpp"
#include "measurement/forward.hpp"
#include "recon/config.hpp"

namespace ptych {

// Uniform entry point over the four solvers. Classic methods report their
// per-epoch residual as the loss trace. Invertible uses `model` when given,
// else loads settings.model_dir; neither present raises MissingModelError.
ReconResult reconstruct(const MeasurementSet& m, Method method, const MethodSettings& settings,
                        const RealImage* truth = nullptr, const FlowModel* model = nullptr);

} // namespace ptych
