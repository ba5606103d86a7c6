#include "recon/reconstruct.hpp"

#include "classic/iera.hpp"
#include "common/error.hpp"
#include "generative/invertible.hpp"
#include "generative/untrained.hpp"

#include <chrono>

namespace ptych {

namespace {

ReconResult from_classic(ClassicResult classic, const RealImage* truth, double seconds)
{
    ReconResult r;
    r.image = std::move(classic.image);
    r.loss_trace = std::move(classic.residual_trace);
    r.best_iteration = r.loss_trace.empty() ? 0 : r.loss_trace.size() - 1;
    if (truth)
        r.metrics = evaluate(r.image, *truth);
    r.wall_time_s = seconds;
    return r;
}

} // namespace

ReconResult reconstruct(const MeasurementSet& m, Method method, const MethodSettings& settings,
                        const RealImage* truth, const FlowModel* model)
{
    if (truth)
        require_same_dims(truth->height(), truth->width(), m.height(), m.width(), "reconstruct: truth");
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    switch (method) {
    case Method::Iera: {
        auto classic = iera_reconstruct(m, settings.iera);
        return from_classic(std::move(classic), truth, elapsed());
    }
    case Method::Sparse: {
        auto classic = sparse_reconstruct(m, settings.sparse_for(m.height(), m.width()));
        return from_classic(std::move(classic), truth, elapsed());
    }
    case Method::Untrained:
        return untrained_ptych(m, settings.decoder_for(m.height(), m.width()), settings.untrained, truth);
    case Method::Invertible:
        if (model)
            return invertible_ptych(m, *model, settings.invertible, truth);
        if (settings.model_dir.empty())
            throw MissingModelError("invertible: no flow checkpoint given");
        return invertible_ptych(m, load_flow(settings.model_dir), settings.invertible, truth);
    }
    throw UnknownMethodError("reconstruct: invalid method");
}

} // namespace ptych
