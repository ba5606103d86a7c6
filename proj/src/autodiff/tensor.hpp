#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace ptych::ad {

using Shape = std::vector<std::size_t>;

// 64-byte aligned storage. Vectorized kernels peel a data-dependent number
// of leading elements when buffers are misaligned, which changes rounding;
// a fixed alignment keeps results bit-identical across runs.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept
    {
    }
    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const noexcept
    {
        return true;
    }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

std::size_t numel(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the
// tape is alive.
class Tensor {
public:
    Tensor() = default;

    const Shape& shape() const;
    std::size_t numel() const;
    std::size_t dim(std::size_t axis) const { return shape().at(axis); }
    std::span<const double> data() const;
    // Accumulated gradient after Tape::backward; empty when the tensor does
    // not require gradients.
    std::span<const double> grad() const;
    bool requires_grad() const;
    double item() const;

    Tape& tape() const { return *tape_; }
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Receives the output's gradient and accumulates into the inputs through
// Tape::grad_sink.
using BackwardFn = std::function<void(Tape&, std::span<const double> out_grad)>;

// Records operations in execution order; backward replays them in reverse.
// Single-threaded; independent tapes may be used concurrently.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Tensor constant(Shape shape, std::vector<double> values);
    Tensor variable(Shape shape, std::vector<double> values);
    Tensor scalar(double value) { return constant({}, std::vector<double>{value}); }

    // Appends a node computed from `inputs`. The node requires gradients iff
    // any input does; `fn` is dropped otherwise.
    Tensor record(Shape shape, Buffer values, std::initializer_list<Tensor> inputs,
                  BackwardFn fn);
    Tensor record(Shape shape, Buffer values, const std::vector<Tensor>& inputs,
                  BackwardFn fn);

    // Reverse sweep from a scalar loss. Every requires_grad leaf ends with a
    // (possibly zero) gradient. Throws NumericError if any leaf gradient is
    // non-finite.
    void backward(const Tensor& loss);

    // Gradient buffer for accumulation; empty span if the tensor does not
    // require gradients.
    std::span<double> grad_sink(const Tensor& t);

    const Shape& shape(std::size_t id) const { return nodes_[id].shape; }
    std::span<const double> values(std::size_t id) const { return nodes_[id].values; }
    std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Shape shape;
        Buffer values;
        Buffer grad;
        bool requires_grad = false;
        bool leaf = false;
        BackwardFn backward;
    };

    Tensor push(Node node);

    std::deque<Node> nodes_;
    bool swept_ = false;
};

// Complex value carried as two real tensors of equal shape.
struct ComplexPair {
    Tensor re;
    Tensor im;
};

} // namespace ptych::ad
