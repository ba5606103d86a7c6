#include "generative/optimize.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace ptych {

void validate(const GenReconConfig& cfg)
{
    if (cfg.iterations < 1)
        throw ConfigError("iterations must be at least 1");
    if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr))
        throw ConfigError("lr must be positive");
    if (!(cfg.latent_sigma >= 0.0))
        throw ConfigError("latent_sigma must be non-negative");
    if (!(cfg.latent_penalty >= 0.0))
        throw ConfigError("latent_penalty must be non-negative");
    if (!(cfg.lr_final_fraction > 0.0) || cfg.lr_final_fraction > 1.0)
        throw ConfigError("lr_final_fraction must be in (0, 1]");
}

ReconResult run_adam(ad::ParameterSet& params, const GenReconConfig& cfg, const RealImage* truth,
                     const GraphBuilder& build)
{
    const auto start = std::chrono::steady_clock::now();
    ReconResult result;
    result.loss_trace.reserve(cfg.iterations);
    ad::Adam adam({cfg.lr});
    double best = std::numeric_limits<double>::infinity();

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        ad::Tape tape;
        const std::vector<ad::Tensor> bound = ad::bind(tape, params);
        const GraphOutput out = build(tape, bound);
        const double loss = out.measurement_loss.item();
        if (!std::isfinite(loss))
            throw DivergenceError("non-finite loss at iteration " + std::to_string(it), result.loss_trace);
        result.loss_trace.push_back(loss);
        if (loss < best) {
            best = loss;
            result.best_iteration = it;
            const auto v = out.image.data();
            result.image = RealImage(out.image.dim(0), out.image.dim(1), std::vector<double>(v.begin(), v.end()));
        }
        if (cfg.log_every && cfg.progress && it % cfg.log_every == 0)
            cfg.progress(it, loss);
        if (cfg.patience && it - result.best_iteration >= cfg.patience)
            break;
        if (it + 1 == cfg.iterations)
            break; // the last recorded iterate needs no further step

        try {
            tape.backward(out.objective ? *out.objective : out.measurement_loss);
        } catch (const NumericError& e) {
            throw DivergenceError(std::string(e.what()) + " at iteration " + std::to_string(it), result.loss_trace);
        }
        const double frac = cfg.iterations > 1 ? static_cast<double>(it) / static_cast<double>(cfg.iterations - 1) : 0.0;
        const double lr = cfg.lr * (1.0 - (1.0 - cfg.lr_final_fraction) * frac);
        adam.step(params, ad::gradients(bound), lr);
    }

    result.image = clamp(result.image, 0.0, 1.0);
    if (truth)
        result.metrics = evaluate(result.image, *truth);
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace ptych
