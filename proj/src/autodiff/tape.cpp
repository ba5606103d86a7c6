#include "autodiff/tensor.hpp"

#include "common/error.hpp"

#include <cmath>

namespace ptych::ad {

std::size_t numel(const Shape& shape) noexcept
{
    std::size_t n = 1;
    for (std::size_t d : shape)
        n *= d;
    return n;
}

std::string to_string(const Shape& shape)
{
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i)
        s += (i ? "," : "") + std::to_string(shape[i]);
    return s + ")";
}

const Shape& Tensor::shape() const { return tape_->shape(id_); }
std::size_t Tensor::numel() const { return tape_->values(id_).size(); }
std::span<const double> Tensor::data() const { return tape_->values(id_); }
std::span<const double> Tensor::grad() const { return tape_->grad(id_); }
bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }

double Tensor::item() const
{
    if (numel() != 1)
        throw DimensionError("item() on tensor of shape " + to_string(shape()));
    return data()[0];
}

Tensor Tape::push(Node node)
{
    if (node.values.size() != numel(node.shape))
        throw DimensionError("tensor data length " + std::to_string(node.values.size()) +
                             " does not match shape " + to_string(node.shape));
    if (swept_)
        throw Error("tape: cannot record after backward");
    nodes_.push_back(std::move(node));
    return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::constant(Shape shape, std::vector<double> values)
{
    return push(Node{std::move(shape), Buffer(values.begin(), values.end()), {}, false, true, {}});
}

Tensor Tape::variable(Shape shape, std::vector<double> values)
{
    for (double v : values)
        if (!std::isfinite(v))
            throw NumericError("tape: non-finite value in variable");
    return push(Node{std::move(shape), Buffer(values.begin(), values.end()), {}, true, true, {}});
}

Tensor Tape::record(Shape shape, Buffer values, std::initializer_list<Tensor> inputs,
                    BackwardFn fn)
{
    bool needs = false;
    for (const Tensor& t : inputs) {
        if (&t.tape() != this)
            throw Error("tape: input recorded on a different tape");
        needs = needs || t.requires_grad();
    }
    return push(Node{std::move(shape), std::move(values), {}, needs, false,
                     needs ? std::move(fn) : BackwardFn{}});
}

Tensor Tape::record(Shape shape, Buffer values, const std::vector<Tensor>& inputs,
                    BackwardFn fn)
{
    bool needs = false;
    for (const Tensor& t : inputs) {
        if (&t.tape() != this)
            throw Error("tape: input recorded on a different tape");
        needs = needs || t.requires_grad();
    }
    return push(Node{std::move(shape), std::move(values), {}, needs, false,
                     needs ? std::move(fn) : BackwardFn{}});
}

std::span<double> Tape::grad_sink(const Tensor& t)
{
    Node& node = nodes_[t.id()];
    if (!node.requires_grad)
        return {};
    if (node.grad.empty())
        node.grad.assign(node.values.size(), 0.0);
    return node.grad;
}

void Tape::backward(const Tensor& loss)
{
    if (&loss.tape() != this)
        throw Error("tape: loss recorded on a different tape");
    if (loss.numel() != 1)
        throw DimensionError("backward: loss must be scalar, got shape " + to_string(loss.shape()));
    if (swept_)
        throw Error("tape: backward already ran");
    swept_ = true;

    for (Node& node : nodes_)
        if (node.leaf && node.requires_grad && node.grad.empty())
            node.grad.assign(node.values.size(), 0.0);

    Node& root = nodes_[loss.id()];
    if (!root.requires_grad)
        return;
    grad_sink(loss)[0] += 1.0;

    for (std::size_t id = loss.id() + 1; id-- > 0;) {
        Node& node = nodes_[id];
        if (!node.backward || node.grad.empty())
            continue;
        node.backward(*this, node.grad);
    }

    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const Node& node = nodes_[id];
        if (!node.leaf || !node.requires_grad)
            continue;
        for (double g : node.grad)
            if (!std::isfinite(g))
                throw NumericError("backward: non-finite gradient in leaf tensor #" +
                                   std::to_string(id) + " " + to_string(node.shape));
    }
}

} // namespace ptych::ad
