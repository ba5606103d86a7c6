#pragma once

#include "autodiff/parameters.hpp"
#include "field/image.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace ptych {

struct FlowConfig {
    std::size_t levels = 2;
    std::size_t steps = 4; // steps of flow per level (K)
    std::size_t height = 16;
    std::size_t width = 16;
    std::size_t channels = 1; // image channels
    std::size_t hidden = 32;  // coupling hidden channels
    double lr = 1e-3;
    std::size_t epochs = 20;
    std::size_t batch_size = 16;
    std::size_t warmup = 200; // iterations of linear lr ramp
    std::uint64_t seed = 0;
};

void validate(const FlowConfig& cfg);

// Multi-scale flow. Per level: squeeze (space to channel x2), K steps of
// actnorm -> fixed channel permutation -> affine coupling, then every level
// but the last splits off half its channels into the latent. Couplings
// transform the second channel half with y = x * exp(tanh(s)) + t, where
// (s, t) = conv3x3(relu(conv3x3(first half))); the final conv starts at zero,
// so a fresh model is the identity apart from actnorm.
class FlowModel {
public:
    explicit FlowModel(FlowConfig cfg);

    const FlowConfig& config() const noexcept { return cfg_; }
    ad::ParameterSet& parameters() noexcept { return params_; }
    const ad::ParameterSet& parameters() const noexcept { return params_; }
    std::size_t latent_size() const noexcept { return cfg_.channels * cfg_.height * cfg_.width; }
    // Permutation applied in global step `s` (level-major order).
    const std::vector<std::size_t>& permutation(std::size_t s) const { return perms_.at(s); }
    std::size_t step_count() const noexcept { return perms_.size(); }
    // Channel count seen by the steps of each level.
    std::vector<std::size_t> level_channels() const;
    bool initialized() const noexcept { return initialized_; }
    void mark_initialized() noexcept { initialized_ = true; }

    // Sees intermediate activations of forward(): stage is "actnorm" (after
    // actnorm), "coupling_in" or "coupling_out".
    using Observer = std::function<void(std::size_t step, const char* stage, const ad::Tensor& t)>;

    struct Encoded {
        ad::Tensor z;      // (N, k)
        ad::Tensor logdet; // (N)
    };

    // x: (N, C, H, W). When `init` is set, every actnorm is first fitted to
    // its incoming activations (bias = -mean, log_scale = -log std per
    // channel) and the fitted values are written into *init.
    Encoded forward(ad::Tape& tape, const std::vector<ad::Tensor>& bound, const ad::Tensor& x,
                    ad::ParameterSet* init = nullptr, const Observer& observe = {}) const;
    // z: (N, k) -> (N, C, H, W).
    ad::Tensor inverse(ad::Tape& tape, const std::vector<ad::Tensor>& bound, const ad::Tensor& z) const;

    // Single-image helpers without gradients (channels must be 1).
    std::vector<double> encode(const RealImage& x, double* logdet = nullptr) const;
    RealImage decode(std::span<const double> z) const;

private:
    struct Step {
        std::size_t channels;
        std::size_t an_bias, an_scale, w1, b1, w2, b2;
    };

    ad::Tensor step_forward(const Step& st, std::size_t index, ad::Tape& tape, const std::vector<ad::Tensor>& bound,
                            const ad::Tensor& x, std::vector<ad::Tensor>& sample_ld, std::vector<ad::Tensor>& shared_ld,
                            ad::ParameterSet* init, const Observer& observe) const;
    ad::Tensor step_inverse(const Step& st, std::size_t index, const std::vector<ad::Tensor>& bound,
                            const ad::Tensor& y) const;

    FlowConfig cfg_;
    ad::ParameterSet params_;
    std::vector<std::vector<Step>> levels_;
    std::vector<std::vector<std::size_t>> perms_;
    bool initialized_ = false;
};

// Fits every actnorm to `batch` (N, C, H, W values) and marks the model initialized.
void initialize_actnorm(FlowModel& model, const std::vector<RealImage>& batch);

struct FlowTrainResult {
    // Mean negative log-likelihood per image (nats, dequantized 8-bit
    // convention) of each epoch's minibatches.
    std::vector<double> nll_trace;
    double wall_time_s = 0.0;
};

// Maximum-likelihood training with Adam, linear warmup, uniform
// dequantization noise U(0, 1/256). Initializes actnorm on the first batch
// unless the model is already initialized.
FlowTrainResult train_flow(FlowModel& model, const std::vector<RealImage>& dataset);

// Mean NLL per image over `images` without dequantization noise.
double flow_nll(const FlowModel& model, const std::vector<RealImage>& images);

// flow_inverse(temperature * eps), eps ~ N(0, I) from `seed`.
RealImage flow_sample(const FlowModel& model, double temperature, std::uint64_t seed);

// Parameter checkpoint plus topology.txt (levels, K, channel counts,
// permutation tables).
void save_flow(const std::filesystem::path& dir, const FlowModel& model);
FlowModel load_flow(const std::filesystem::path& dir);

} // namespace ptych
