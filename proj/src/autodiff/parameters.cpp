#include "autodiff/parameters.hpp"

#include "common/error.hpp"
#include "field/io.hpp"

#include <cmath>
#include <cstdio>

namespace ptych::ad {

namespace fs = std::filesystem;

std::size_t ParameterSet::add(std::string name, Shape shape, std::vector<double> value)
{
    if (value.size() != numel(shape))
        throw DimensionError("parameter " + name + ": value length does not match shape " + to_string(shape));
    for (const Parameter& p : params_)
        if (p.name == name)
            throw ConfigError("parameter " + name + " defined twice");
    params_.push_back({std::move(name), std::move(shape), std::move(value)});
    return params_.size() - 1;
}

std::size_t ParameterSet::index_of(const std::string& name) const
{
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name)
            return i;
    throw ConfigError("unknown parameter " + name);
}

std::size_t ParameterSet::scalar_count() const noexcept
{
    std::size_t n = 0;
    for (const Parameter& p : params_)
        n += p.value.size();
    return n;
}

std::vector<Tensor> bind(Tape& tape, const ParameterSet& params, bool requires_grad)
{
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const Parameter& p : params)
        out.push_back(requires_grad ? tape.variable(p.shape, p.value) : tape.constant(p.shape, p.value));
    return out;
}

std::vector<std::vector<double>> gradients(const std::vector<Tensor>& bound)
{
    std::vector<std::vector<double>> out;
    out.reserve(bound.size());
    for (const Tensor& t : bound) {
        const auto g = t.grad();
        out.emplace_back(g.begin(), g.end());
        if (out.back().empty())
            out.back().assign(t.numel(), 0.0);
    }
    return out;
}

namespace {

std::string shape_text(const Shape& shape)
{
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i)
        s += (i ? "," : "") + std::to_string(shape[i]);
    return s;
}

std::string tensor_file(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "tensor_%03zu.ptyf", i);
    return buf;
}

} // namespace

void save_parameters(const fs::path& dir, const ParameterSet& params, const KeyValue& extra)
{
    fs::create_directories(dir);
    KeyValue manifest = extra;
    manifest.set("format", std::string("ptych-parameters-1"));
    manifest.set("tensor_count", static_cast<std::uint64_t>(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Parameter& p = params[i];
        const std::string key = "tensor." + std::to_string(i);
        manifest.set(key + ".name", p.name);
        manifest.set(key + ".shape", shape_text(p.shape));
        manifest.set(key + ".file", tensor_file(i));
        const std::size_t rows = p.shape.empty() ? 1 : p.shape[0];
        const std::size_t cols = rows ? p.value.size() / rows : 0;
        write_ptyf(dir / tensor_file(i), RealImage(rows, cols, p.value));
    }
    write_text_atomic(dir / "manifest.txt", manifest.serialize());
}

ParameterSet load_parameters(const fs::path& dir, KeyValue* manifest_out)
{
    const fs::path manifest_path = dir / "manifest.txt";
    if (!fs::exists(manifest_path))
        throw MissingModelError("no model checkpoint at " + dir.string());
    const KeyValue manifest = KeyValue::load(manifest_path);
    if (manifest.get_string("format", "") != "ptych-parameters-1")
        throw IoError(manifest_path.string() + ": not a parameter checkpoint");
    ParameterSet params;
    const std::uint64_t count = manifest.get_u64("tensor_count");
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::string key = "tensor." + std::to_string(i);
        Shape shape;
        for (std::uint64_t d : manifest.get_u64s(key + ".shape", {}))
            shape.push_back(static_cast<std::size_t>(d));
        const RealImage data = read_ptyf_real(dir / manifest.get_string(key + ".file"));
        if (data.size() != numel(shape))
            throw IoError(dir.string() + ": tensor " + manifest.get_string(key + ".name") +
                          " size does not match its shape");
        params.add(manifest.get_string(key + ".name"), std::move(shape), data.storage());
    }
    if (manifest_out)
        *manifest_out = manifest;
    return params;
}

void Adam::step(ParameterSet& params, const std::vector<std::vector<double>>& grads, double lr)
{
    if (grads.size() != params.size())
        throw DimensionError("adam: gradient count does not match parameter count");
    if (m_.empty()) {
        for (const Parameter& p : params) {
            m_.emplace_back(p.value.size(), 0.0);
            v_.emplace_back(p.value.size(), 0.0);
        }
    }
    ++step_;
    const double t = static_cast<double>(step_);
    const double c1 = 1.0 - std::pow(options_.beta1, t);
    const double c2 = 1.0 - std::pow(options_.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        std::vector<double>& w = params[k].value;
        const std::vector<double>& g = grads[k];
        if (g.size() != w.size())
            throw DimensionError("adam: gradient size mismatch for " + params[k].name);
        for (std::size_t i = 0; i < w.size(); ++i) {
            m_[k][i] = options_.beta1 * m_[k][i] + (1.0 - options_.beta1) * g[i];
            v_[k][i] = options_.beta2 * v_[k][i] + (1.0 - options_.beta2) * g[i] * g[i];
            const double mhat = m_[k][i] / c1;
            const double vhat = v_[k][i] / c2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + options_.eps);
        }
    }
}

} // namespace ptych::ad
