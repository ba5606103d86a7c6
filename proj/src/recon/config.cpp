#include "recon/config.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>

namespace ptych {

namespace {

const char* const kMethodNames[] = {"iera", "sparse", "untrained", "invertible"};

// Recognised keys that have no default value.
const std::vector<std::string> kOptionalKeys{"invertible.model", "sparse.count"};

std::string latent_init_name(LatentInit init)
{
    return init == LatentInit::Zeros ? "zeros" : "gaussian";
}

LatentInit parse_latent_init(const std::string& text)
{
    if (text == "zeros")
        return LatentInit::Zeros;
    if (text == "gaussian")
        return LatentInit::Gaussian;
    throw ConfigError("invertible.latent_init: expected zeros or gaussian, got '" + text + "'");
}

IeraInit parse_iera_init(const std::string& text)
{
    if (text == "flat")
        return IeraInit::FlatMagnitude;
    if (text == "random")
        return IeraInit::Random;
    throw ConfigError("iera.init: expected flat or random, got '" + text + "'");
}

void read_optimizer(const KeyValue& kv, const std::string& prefix, GenReconConfig& cfg)
{
    cfg.iterations = kv.get_u64(prefix + ".iterations", cfg.iterations);
    cfg.lr = kv.get_double(prefix + ".lr", cfg.lr);
    cfg.seed = kv.get_u64(prefix + ".seed", cfg.seed);
    cfg.log_every = kv.get_u64(prefix + ".log_every", cfg.log_every);
    cfg.patience = kv.get_u64(prefix + ".patience", cfg.patience);
    cfg.lr_final_fraction = kv.get_double(prefix + ".lr_final_fraction", cfg.lr_final_fraction);
}

void write_optimizer(KeyValue& kv, const std::string& prefix, const GenReconConfig& cfg)
{
    kv.set(prefix + ".iterations", static_cast<std::uint64_t>(cfg.iterations));
    kv.set(prefix + ".lr", cfg.lr);
    kv.set(prefix + ".seed", cfg.seed);
    kv.set(prefix + ".log_every", static_cast<std::uint64_t>(cfg.log_every));
    kv.set(prefix + ".patience", static_cast<std::uint64_t>(cfg.patience));
    kv.set(prefix + ".lr_final_fraction", cfg.lr_final_fraction);
}

std::string join(const std::vector<std::size_t>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

} // namespace

Method parse_method(const std::string& name)
{
    for (std::size_t i = 0; i < 4; ++i)
        if (name == kMethodNames[i])
            return static_cast<Method>(i);
    throw UnknownMethodError("unknown method '" + name + "' (expected iera, sparse, untrained or invertible)");
}

const char* method_name(Method method)
{
    return kMethodNames[static_cast<std::size_t>(method)];
}

SimulationParams SimulationSettings::resolve(std::size_t height, std::size_t width) const
{
    SimulationParams p = default_simulation(height, width);
    p.geometry.grid_size = grid;
    if (radius > 0.0)
        p.geometry.radius = radius;
    p.geometry.spacing = spacing > 0.0 ? spacing : spacing_for_overlap(p.geometry.radius, 0.6);
    p.ratio = ratio;
    p.noise_level = noise;
    p.seed = seed;
    p.clip_negative = clip_negative;
    return p;
}

MethodSettings::MethodSettings()
{
    untrained.iterations = 5000;
    untrained.lr = 0.01;
    invertible.iterations = 3000;
    invertible.lr = 0.05;
}

DecoderConfig MethodSettings::decoder_for(std::size_t height, std::size_t width) const
{
    DecoderConfig cfg = default_decoder_config(height, width, decoder_channels);
    cfg.skip = decoder_skip;
    cfg.skip_channels = decoder_skip_channels;
    cfg.seed = decoder_seed;
    return cfg;
}

SparseConfig MethodSettings::sparse_for(std::size_t height, std::size_t width) const
{
    SparseConfig cfg;
    cfg.iera = iera;
    const std::size_t n = height * width;
    cfg.sparsity = sparse_count != 0
                       ? sparse_count
                       : std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(sparse_fraction * static_cast<double>(n))), 1, n);
    return cfg;
}

SimulationSettings parse_simulation(const KeyValue& kv)
{
    SimulationSettings s;
    s.grid = kv.get_u64("simulate.grid", s.grid);
    s.radius = kv.get_double("simulate.radius", s.radius);
    s.spacing = kv.get_double("simulate.spacing", s.spacing);
    s.ratio = kv.get_double("simulate.ratio", s.ratio);
    s.noise = kv.get_double("simulate.noise", s.noise);
    s.seed = kv.get_u64("simulate.seed", s.seed);
    s.clip_negative = kv.get_bool("simulate.clip_negative", s.clip_negative);
    if (s.radius < 0.0 || s.spacing < 0.0)
        throw ConfigError("simulate: radius and spacing must be non-negative");
    return s;
}

MethodSettings parse_methods(const KeyValue& kv)
{
    MethodSettings s;
    s.iera.epochs = kv.get_u64("iera.epochs", s.iera.epochs);
    s.iera.init = parse_iera_init(kv.get_string("iera.init", "flat"));
    s.iera.seed = kv.get_u64("iera.seed", s.iera.seed);
    s.iera.track_residual = kv.get_bool("iera.track_residual", s.iera.track_residual);
    validate(s.iera);

    s.sparse_fraction = kv.get_double("sparse.fraction", s.sparse_fraction);
    s.sparse_count = kv.get_u64("sparse.count", 0);
    if (!(s.sparse_fraction > 0.0 && s.sparse_fraction <= 1.0))
        throw ConfigError("sparse.fraction must lie in (0, 1]");

    const auto channels = kv.get_u64s("decoder.channels", {});
    if (kv.contains("decoder.channels")) {
        if (channels.empty())
            throw ConfigError("decoder.channels must not be empty");
        s.decoder_channels.assign(channels.begin(), channels.end());
    }
    s.decoder_skip = kv.get_bool("decoder.skip", s.decoder_skip);
    s.decoder_skip_channels = kv.get_u64("decoder.skip_channels", s.decoder_skip_channels);
    s.decoder_seed = kv.get_u64("decoder.seed", s.decoder_seed);

    read_optimizer(kv, "untrained", s.untrained);
    read_optimizer(kv, "invertible", s.invertible);
    s.invertible.latent_init = parse_latent_init(kv.get_string("invertible.latent_init", "zeros"));
    s.invertible.latent_sigma = kv.get_double("invertible.latent_sigma", s.invertible.latent_sigma);
    s.invertible.latent_penalty = kv.get_double("invertible.latent_penalty", s.invertible.latent_penalty);
    validate(s.untrained);
    validate(s.invertible);
    if (const auto model = kv.find("invertible.model"))
        s.model_dir = *model;
    return s;
}

FlowConfig parse_flow(const KeyValue& kv)
{
    FlowConfig cfg;
    cfg.levels = kv.get_u64("flow.levels", cfg.levels);
    cfg.steps = kv.get_u64("flow.steps", cfg.steps);
    cfg.hidden = kv.get_u64("flow.hidden", cfg.hidden);
    cfg.lr = kv.get_double("flow.lr", cfg.lr);
    cfg.epochs = kv.get_u64("flow.epochs", cfg.epochs);
    cfg.batch_size = kv.get_u64("flow.batch_size", cfg.batch_size);
    cfg.warmup = kv.get_u64("flow.warmup", cfg.warmup);
    cfg.seed = kv.get_u64("flow.seed", cfg.seed);
    return cfg;
}

KeyValue default_config()
{
    KeyValue kv;
    const SimulationSettings sim;
    kv.set("simulate.grid", static_cast<std::uint64_t>(sim.grid));
    kv.set("simulate.radius", sim.radius);
    kv.set("simulate.spacing", sim.spacing);
    kv.set("simulate.ratio", sim.ratio);
    kv.set("simulate.noise", sim.noise);
    kv.set("simulate.seed", sim.seed);
    kv.set("simulate.clip_negative", sim.clip_negative);

    const MethodSettings m;
    kv.set("iera.epochs", static_cast<std::uint64_t>(m.iera.epochs));
    kv.set("iera.init", std::string("flat"));
    kv.set("iera.seed", m.iera.seed);
    kv.set("iera.track_residual", m.iera.track_residual);
    kv.set("sparse.fraction", m.sparse_fraction);
    kv.set("decoder.channels", join(m.decoder_channels));
    kv.set("decoder.skip", m.decoder_skip);
    kv.set("decoder.skip_channels", static_cast<std::uint64_t>(m.decoder_skip_channels));
    kv.set("decoder.seed", m.decoder_seed);
    write_optimizer(kv, "untrained", m.untrained);
    write_optimizer(kv, "invertible", m.invertible);
    kv.set("invertible.latent_init", latent_init_name(m.invertible.latent_init));
    kv.set("invertible.latent_sigma", m.invertible.latent_sigma);
    kv.set("invertible.latent_penalty", m.invertible.latent_penalty);

    const FlowConfig f;
    kv.set("flow.levels", static_cast<std::uint64_t>(f.levels));
    kv.set("flow.steps", static_cast<std::uint64_t>(f.steps));
    kv.set("flow.hidden", static_cast<std::uint64_t>(f.hidden));
    kv.set("flow.lr", f.lr);
    kv.set("flow.epochs", static_cast<std::uint64_t>(f.epochs));
    kv.set("flow.batch_size", static_cast<std::uint64_t>(f.batch_size));
    kv.set("flow.warmup", static_cast<std::uint64_t>(f.warmup));
    kv.set("flow.seed", f.seed);
    // Training data for the command line tool: images are resized to
    // size x size; synthetic blob sets have data_count images.
    kv.set("flow.size", static_cast<std::uint64_t>(f.height));
    kv.set("flow.data_count", std::uint64_t{500});
    return kv;
}

void check_config_keys(const KeyValue& kv, const std::vector<std::string>& extra_prefixes)
{
    const KeyValue known = default_config();
    for (const auto& [key, value] : kv.entries()) {
        if (known.contains(key) || std::find(kOptionalKeys.begin(), kOptionalKeys.end(), key) != kOptionalKeys.end())
            continue;
        const bool owned = std::any_of(extra_prefixes.begin(), extra_prefixes.end(), [&](const std::string& p) {
            return key.rfind(p + ".", 0) == 0;
        });
        if (!owned)
            throw ConfigError("unknown config key '" + key + "'");
    }
}

} // namespace ptych
