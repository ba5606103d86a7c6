#pragma once

#include "generative/flow.hpp"
#include "generative/result.hpp"
#include "measurement/forward.hpp"

namespace ptych {

// Optimizes the full-dimensional latent z with Adam on the measurement loss
// of flow_inverse(z); returns flow_inverse of the best-loss latent, clamped
// to [0, 1].
ReconResult invertible_ptych(const MeasurementSet& m, const FlowModel& model, const GenReconConfig& ocfg,
                             const RealImage* truth = nullptr);

// Initial latent per GenReconConfig::latent_init.
std::vector<double> initial_latent(const FlowModel& model, const GenReconConfig& ocfg);

} // namespace ptych
