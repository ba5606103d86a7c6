#include "generative/untrained.hpp"

#include "autodiff/measurement_graph.hpp"
#include "generative/optimize.hpp"

namespace ptych {

ReconResult untrained_ptych(const MeasurementSet& m, const DecoderConfig& dcfg, const GenReconConfig& ocfg,
                            const RealImage* truth)
{
    validate(ocfg);
    if (dcfg.output_height() != m.height() || dcfg.output_width() != m.width())
        throw DimensionError("untrained: decoder output " + std::to_string(dcfg.output_height()) + "x" +
                             std::to_string(dcfg.output_width()) + " does not match measurements " +
                             std::to_string(m.height()) + "x" + std::to_string(m.width()));
    DecoderNet net(dcfg);
    return run_adam(net.parameters(), ocfg, truth,
                    [&](ad::Tape& tape, const std::vector<ad::Tensor>& bound) {
                        const ad::Tensor image = net.forward(tape, bound);
                        return GraphOutput{image, ad::measurement_loss(image, m), {}};
                    });
}

} // namespace ptych
