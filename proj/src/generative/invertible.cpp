#include "generative/invertible.hpp"

#include "autodiff/measurement_graph.hpp"
#include "autodiff/ops.hpp"
#include "common/rng.hpp"
#include "generative/optimize.hpp"

namespace ptych {

std::vector<double> initial_latent(const FlowModel& model, const GenReconConfig& ocfg)
{
    std::vector<double> z(model.latent_size(), 0.0);
    if (ocfg.latent_init == LatentInit::Gaussian) {
        Rng rng(split_seed(ocfg.seed, Stream::Latent));
        for (double& v : z)
            v = rng.normal(0.0, ocfg.latent_sigma);
    }
    return z;
}

ReconResult invertible_ptych(const MeasurementSet& m, const FlowModel& model, const GenReconConfig& ocfg,
                             const RealImage* truth)
{
    validate(ocfg);
    const FlowConfig& fc = model.config();
    if (fc.channels != 1 || fc.height != m.height() || fc.width != m.width())
        throw DimensionError("invertible: flow output " + std::to_string(fc.height) + "x" + std::to_string(fc.width) +
                             " does not match measurements " + std::to_string(m.height()) + "x" +
                             std::to_string(m.width()));
    ad::ParameterSet latent;
    latent.add("z", {1, model.latent_size()}, initial_latent(model, ocfg));
    return run_adam(latent, ocfg, truth, [&](ad::Tape& tape, const std::vector<ad::Tensor>& bound) {
        const auto weights = ad::bind(tape, model.parameters(), false);
        const ad::Tensor image = ad::reshape(model.inverse(tape, weights, bound[0]), {fc.height, fc.width});
        const ad::Tensor loss = ad::measurement_loss(image, m);
        if (ocfg.latent_penalty > 0.0)
            return GraphOutput{image, loss, loss + ad::scale(ad::sum(ad::square(bound[0])), ocfg.latent_penalty)};
        return GraphOutput{image, loss, {}};
    });
}

} // namespace ptych
