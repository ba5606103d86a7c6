#pragma once

#include "autodiff/parameters.hpp"
#include "field/image.hpp"

#include <cstdint>
#include <vector>

namespace ptych {

struct DecoderConfig {
    std::size_t latent_channels = 64;
    std::size_t latent_height = 4;
    std::size_t latent_width = 4;
    std::size_t stages = 0;
    std::vector<std::size_t> channels; // one entry per stage
    // Extra 1x1 branch from each upsampled input, concatenated before the norm.
    bool skip = false;
    std::size_t skip_channels = 4;
    std::uint64_t seed = 0;

    std::size_t output_height() const noexcept { return latent_height << stages; }
    std::size_t output_width() const noexcept { return latent_width << stages; }
};

inline const std::vector<std::size_t> kDefaultDecoderChannels{128, 128, 64, 64, 32, 16};

// Latent grid 4x4 (or smaller for tiny images), enough stages to reach
// height x width, and the default channel list truncated or extended with
// its last entry.
DecoderConfig default_decoder_config(std::size_t height, std::size_t width,
                                     const std::vector<std::size_t>& channels = kDefaultDecoderChannels);

// Throws ConfigError for inconsistent configs.
void validate(const DecoderConfig& cfg);

// Closed-form trainable parameter count for a config.
std::size_t decoder_parameter_count(const DecoderConfig& cfg);

// Deep-decoder style generator: per stage upsample x2 -> conv3x3 ->
// channel_norm -> leaky_relu(0.2); then conv1x1 -> sigmoid. The latent
// input is drawn once from U(0, 0.1) and held fixed.
class DecoderNet {
public:
    explicit DecoderNet(DecoderConfig cfg);

    const DecoderConfig& config() const noexcept { return cfg_; }
    ad::ParameterSet& parameters() noexcept { return params_; }
    const ad::ParameterSet& parameters() const noexcept { return params_; }
    const std::vector<double>& latent() const noexcept { return latent_; }

    // Builds the graph on `tape` from parameters bound in order; returns an
    // (H, W) tensor.
    ad::Tensor forward(ad::Tape& tape, const std::vector<ad::Tensor>& bound) const;

    // Forward pass without gradients.
    RealImage render() const;

private:
    DecoderConfig cfg_;
    ad::ParameterSet params_;
    std::vector<double> latent_;
};

} // namespace ptych
