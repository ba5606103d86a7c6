#pragma once

#include "common/error.hpp"
#include "field/image.hpp"
#include "metrics/metrics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace ptych {

using ProgressFn = std::function<void(std::size_t iteration, double loss)>;

enum class LatentInit { Zeros, Gaussian };

struct GenReconConfig {
    std::size_t iterations = 5000;
    double lr = 0.01;
    std::uint64_t seed = 0;
    // `progress` is called every log_every iterations; 0 disables it.
    std::size_t log_every = 0;
    ProgressFn progress;
    LatentInit latent_init = LatentInit::Zeros; // invertible only
    double latent_sigma = 0.1;
    // Weight of ||z||^2 added to the loss (invertible only).
    double latent_penalty = 0.0;
    // Stop when the best loss has not improved for this many iterations; 0 = off.
    std::size_t patience = 0;
    // Multiplies lr linearly down to lr * lr_final_fraction at the last iteration.
    double lr_final_fraction = 1.0;
};

void validate(const GenReconConfig& cfg);

struct ReconResult {
    RealImage image;
    // One entry per iteration (for iterative classic methods: per epoch,
    // entry 0 being the initial estimate).
    std::vector<double> loss_trace;
    std::optional<MetricReport> metrics;
    double wall_time_s = 0.0;
    std::size_t best_iteration = 0;
};

// Raised when the loss or a gradient turns non-finite; carries the trace
// recorded so far.
class DivergenceError : public NumericError {
public:
    DivergenceError(const std::string& what, std::vector<double> trace)
        : NumericError(what), trace_(std::move(trace))
    {
    }
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

} // namespace ptych
