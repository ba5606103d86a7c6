#include "generative/decoder.hpp"

#include "autodiff/ops.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"

#include <cmath>

namespace ptych {

DecoderConfig default_decoder_config(std::size_t height, std::size_t width,
                                     const std::vector<std::size_t>& channels)
{
    if (channels.empty())
        throw ConfigError("decoder: empty channel list");
    DecoderConfig cfg;
    std::size_t base = std::min<std::size_t>(4, std::min(height, width));
    std::size_t stages = 0;
    while ((base << stages) < std::min(height, width))
        ++stages;
    cfg.latent_height = height >> stages;
    cfg.latent_width = width >> stages;
    cfg.stages = stages;
    cfg.channels.assign(channels.begin(), channels.begin() + static_cast<std::ptrdiff_t>(std::min(stages, channels.size())));
    while (cfg.channels.size() < stages)
        cfg.channels.push_back(channels.back());
    cfg.latent_channels = channels.front();
    return cfg;
}

void validate(const DecoderConfig& cfg)
{
    if (cfg.latent_channels == 0 || cfg.latent_height == 0 || cfg.latent_width == 0)
        throw ConfigError("decoder: latent shape must be positive");
    if (cfg.stages == 0)
        throw ConfigError("decoder: at least one stage is required");
    if (cfg.channels.size() != cfg.stages)
        throw ConfigError("decoder: channel list has " + std::to_string(cfg.channels.size()) +
                          " entries for " + std::to_string(cfg.stages) + " stages");
    for (std::size_t c : cfg.channels)
        if (c == 0)
            throw ConfigError("decoder: zero channel count");
    if (cfg.skip && cfg.skip_channels == 0)
        throw ConfigError("decoder: skip branch needs at least one channel");
    if (!is_power_of_two(cfg.output_height()) || !is_power_of_two(cfg.output_width()))
        throw ConfigError("decoder: output " + std::to_string(cfg.output_height()) + "x" +
                          std::to_string(cfg.output_width()) + " is not a power-of-two plane");
}

namespace {

std::size_t stage_width(const DecoderConfig& cfg, std::size_t i)
{
    return cfg.channels[i] + (cfg.skip ? cfg.skip_channels : 0);
}

std::size_t stage_input(const DecoderConfig& cfg, std::size_t i)
{
    return i == 0 ? cfg.latent_channels : stage_width(cfg, i - 1);
}

} // namespace

std::size_t decoder_parameter_count(const DecoderConfig& cfg)
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < cfg.stages; ++i) {
        const std::size_t in = stage_input(cfg, i);
        n += 9 * in * cfg.channels[i];
        if (cfg.skip)
            n += in * cfg.skip_channels;
        n += 2 * stage_width(cfg, i);
    }
    return n + stage_width(cfg, cfg.stages - 1) + 1;
}

// Convolutions feeding a channel_norm carry no bias: the norm removes it.
DecoderNet::DecoderNet(DecoderConfig cfg) : cfg_(std::move(cfg))
{
    validate(cfg_);
    Rng rng(split_seed(cfg_.seed, Stream::Init));
    auto he = [&rng](std::size_t count, std::size_t fan_in) {
        std::vector<double> w(count);
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (double& v : w)
            v = rng.normal(0.0, sd);
        return w;
    };
    for (std::size_t i = 0; i < cfg_.stages; ++i) {
        const std::size_t in = stage_input(cfg_, i), out = cfg_.channels[i];
        const std::string p = "stage" + std::to_string(i) + ".";
        params_.add(p + "conv.weight", {out, in, 3, 3}, he(out * in * 9, in * 9));
        if (cfg_.skip)
            params_.add(p + "skip.weight", {cfg_.skip_channels, in, 1, 1}, he(cfg_.skip_channels * in, in));
        const std::size_t width = stage_width(cfg_, i);
        params_.add(p + "norm.gamma", {width}, std::vector<double>(width, 1.0));
        params_.add(p + "norm.beta", {width}, std::vector<double>(width, 0.0));
    }
    const std::size_t last = stage_width(cfg_, cfg_.stages - 1);
    params_.add("out.weight", {1, last, 1, 1}, he(last, last));
    params_.add("out.bias", {1}, {0.0});

    Rng zrng(split_seed(cfg_.seed, Stream::Latent));
    latent_.resize(cfg_.latent_channels * cfg_.latent_height * cfg_.latent_width);
    for (double& v : latent_)
        v = zrng.uniform(0.0, 0.1);
}

ad::Tensor DecoderNet::forward(ad::Tape& tape, const std::vector<ad::Tensor>& bound) const
{
    if (bound.size() != params_.size())
        throw DimensionError("decoder: expected " + std::to_string(params_.size()) + " bound parameters");
    ad::Tensor x = tape.constant({1, cfg_.latent_channels, cfg_.latent_height, cfg_.latent_width}, latent_);
    std::size_t k = 0;
    for (std::size_t i = 0; i < cfg_.stages; ++i) {
        const ad::Tensor up = ad::upsample_nearest2x(x);
        const std::size_t out = cfg_.channels[i];
        ad::Tensor y = ad::conv2d(up, bound[k++], tape.constant({out}, std::vector<double>(out, 0.0)));
        if (cfg_.skip) {
            const ad::Tensor s = ad::conv2d(
                up, bound[k++], tape.constant({cfg_.skip_channels}, std::vector<double>(cfg_.skip_channels, 0.0)));
            y = ad::concat({y, s}, 1);
        }
        const ad::Tensor& gamma = bound[k++];
        const ad::Tensor& beta = bound[k++];
        x = ad::leaky_relu(ad::channel_norm(y, gamma, beta), 0.2);
    }
    const ad::Tensor logits = ad::conv2d(x, bound[k], bound[k + 1]);
    return ad::reshape(ad::sigmoid(logits), {cfg_.output_height(), cfg_.output_width()});
}

RealImage DecoderNet::render() const
{
    ad::Tape tape;
    const ad::Tensor out = forward(tape, ad::bind(tape, params_, false));
    return RealImage(cfg_.output_height(), cfg_.output_width(),
                     std::vector<double>(out.data().begin(), out.data().end()));
}

} // namespace ptych
