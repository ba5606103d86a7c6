#pragma once

#include "classic/iera.hpp"
#include "common/keyvalue.hpp"
#include "generative/decoder.hpp"
#include "generative/flow.hpp"
#include "generative/result.hpp"
#include "measurement/forward.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ptych {

enum class Method { Iera, Sparse, Untrained, Invertible };

// Throws UnknownMethodError.
Method parse_method(const std::string& name);
const char* method_name(Method method);

// Simulation knobs as they appear in config files. Zero radius or spacing
// means the size-dependent default geometry.
struct SimulationSettings {
    std::size_t grid = 5;
    double radius = 0.0;
    double spacing = 0.0;
    double ratio = 100.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    bool clip_negative = false;

    SimulationParams resolve(std::size_t height, std::size_t width) const;
};

// Every per-method setting. Sizes that depend on the measurement (decoder
// stage count, sparsity) are resolved at dispatch time.
struct MethodSettings {
    IeraConfig iera;
    double sparse_fraction = 0.1; // used when sparse_count is 0
    std::size_t sparse_count = 0;
    std::vector<std::size_t> decoder_channels = kDefaultDecoderChannels;
    bool decoder_skip = false;
    std::size_t decoder_skip_channels = 4;
    std::uint64_t decoder_seed = 0;
    GenReconConfig untrained;
    GenReconConfig invertible;
    std::filesystem::path model_dir; // empty: no checkpoint

    MethodSettings();

    DecoderConfig decoder_for(std::size_t height, std::size_t width) const;
    SparseConfig sparse_for(std::size_t height, std::size_t width) const;
};

SimulationSettings parse_simulation(const KeyValue& kv);
MethodSettings parse_methods(const KeyValue& kv);
// Image dims come from the training data, not from the config.
FlowConfig parse_flow(const KeyValue& kv);

// Config file with every recognised key at its default value.
KeyValue default_config();

// Rejects keys outside the known sections; `extra_prefixes` admits whole
// sections owned by the caller (e.g. "bench").
void check_config_keys(const KeyValue& kv, const std::vector<std::string>& extra_prefixes = {});

} // namespace ptych
