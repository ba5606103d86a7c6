#pragma once

#include "autodiff/tensor.hpp"
#include "common/keyvalue.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ptych::ad {

struct Parameter {
    std::string name;
    Shape shape;
    std::vector<double> value;
};

// Ordered, named trainable tensors. Order is part of the model topology.
class ParameterSet {
public:
    std::size_t add(std::string name, Shape shape, std::vector<double> value);

    std::size_t size() const noexcept { return params_.size(); }
    Parameter& operator[](std::size_t i) { return params_.at(i); }
    const Parameter& operator[](std::size_t i) const { return params_.at(i); }
    // Throws ConfigError for unknown names.
    std::size_t index_of(const std::string& name) const;
    std::size_t scalar_count() const noexcept;

    std::vector<Parameter>::const_iterator begin() const noexcept { return params_.begin(); }
    std::vector<Parameter>::const_iterator end() const noexcept { return params_.end(); }

private:
    std::vector<Parameter> params_;
};

// Records every parameter on the tape (as variables when requires_grad,
// else constants), in order.
std::vector<Tensor> bind(Tape& tape, const ParameterSet& params, bool requires_grad = true);

// Copies the gradients of bound tensors after Tape::backward.
std::vector<std::vector<double>> gradients(const std::vector<Tensor>& bound);

// Directory with manifest.txt plus one PTYF file per tensor. `extra` is
// stored in the manifest alongside the tensor table.
void save_parameters(const std::filesystem::path& dir, const ParameterSet& params,
                     const KeyValue& extra = {});
ParameterSet load_parameters(const std::filesystem::path& dir, KeyValue* manifest = nullptr);

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over a ParameterSet.
class Adam {
public:
    explicit Adam(AdamOptions options = {}) : options_(options) {}

    // Applies one update with learning rate `lr`.
    void step(ParameterSet& params, const std::vector<std::vector<double>>& grads, double lr);
    void step(ParameterSet& params, const std::vector<std::vector<double>>& grads)
    {
        step(params, grads, options_.lr);
    }

    const AdamOptions& options() const noexcept { return options_; }
    std::uint64_t steps() const noexcept { return step_; }

private:
    AdamOptions options_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::uint64_t step_ = 0;
};

} // namespace ptych::ad
