#include "autodiff/ops.hpp"

#include "common/error.hpp"
#include "common/summation.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numeric>

namespace ptych::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op)
{
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                             to_string(b.shape()));
}

void require_rank(const Tensor& t, std::size_t rank, const char* op)
{
    if (t.shape().size() != rank)
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                             ", got shape " + to_string(t.shape()));
}

// Elementwise unary op: forward f(x), derivative df(x, f(x)).
template <typename F, typename DF>
Tensor unary(const Tensor& a, F f, DF df)
{
    const auto x = a.data();
    Buffer y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = f(x[i]);
    return a.tape().record(a.shape(), std::move(y), {a}, [a, f, df](Tape& tape, std::span<const double> g) {
        auto ga = tape.grad_sink(a);
        const auto x = a.data();
        for (std::size_t i = 0; i < g.size(); ++i)
            ga[i] += g[i] * df(x[i], f(x[i]));
    });
}

struct AxisSplit {
    std::size_t outer = 1;
    std::size_t extent = 1;
    std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis)
{
    AxisSplit s;
    for (std::size_t i = 0; i < axis; ++i)
        s.outer *= shape[i];
    s.extent = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i)
        s.inner *= shape[i];
    return s;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b)
{
    require_same_shape(a, b, "add");
    Buffer y(a.numel());
    const auto x1 = a.data();
    const auto x2 = b.data();
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = x1[i] + x2[i];
    return a.tape().record(a.shape(), std::move(y), {a, b}, [a, b](Tape& tape, std::span<const double> g) {
        if (auto ga = tape.grad_sink(a); !ga.empty())
            for (std::size_t i = 0; i < g.size(); ++i)
                ga[i] += g[i];
        if (auto gb = tape.grad_sink(b); !gb.empty())
            for (std::size_t i = 0; i < g.size(); ++i)
                gb[i] += g[i];
    });
}

Tensor sub(const Tensor& a, const Tensor& b)
{
    require_same_shape(a, b, "sub");
    Buffer y(a.numel());
    const auto x1 = a.data();
    const auto x2 = b.data();
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = x1[i] - x2[i];
    return a.tape().record(a.shape(), std::move(y), {a, b}, [a, b](Tape& tape, std::span<const double> g) {
        if (auto ga = tape.grad_sink(a); !ga.empty())
            for (std::size_t i = 0; i < g.size(); ++i)
                ga[i] += g[i];
        if (auto gb = tape.grad_sink(b); !gb.empty())
            for (std::size_t i = 0; i < g.size(); ++i)
                gb[i] -= g[i];
    });
}

Tensor mul(const Tensor& a, const Tensor& b)
{
    require_same_shape(a, b, "mul");
    Buffer y(a.numel());
    const auto x1 = a.data();
    const auto x2 = b.data();
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = x1[i] * x2[i];
    return a.tape().record(a.shape(), std::move(y), {a, b}, [a, b](Tape& tape, std::span<const double> g) {
        if (auto ga = tape.grad_sink(a); !ga.empty()) {
            const auto x2 = b.data();
            for (std::size_t i = 0; i < g.size(); ++i)
                ga[i] += g[i] * x2[i];
        }
        if (auto gb = tape.grad_sink(b); !gb.empty()) {
            const auto x1 = a.data();
            for (std::size_t i = 0; i < g.size(); ++i)
                gb[i] += g[i] * x1[i];
        }
    });
}

Tensor scale(const Tensor& a, double s)
{
    Buffer y(a.data().begin(), a.data().end());
    for (double& v : y)
        v *= s;
    return a.tape().record(a.shape(), std::move(y), {a}, [a, s](Tape& tape, std::span<const double> g) {
        auto ga = tape.grad_sink(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            ga[i] += s * g[i];
    });
}

Tensor add_scalar(const Tensor& a, double s)
{
    Buffer y(a.data().begin(), a.data().end());
    for (double& v : y)
        v += s;
    return a.tape().record(a.shape(), std::move(y), {a}, [a](Tape& tape, std::span<const double> g) {
        auto ga = tape.grad_sink(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            ga[i] += g[i];
    });
}

Tensor square(const Tensor& a)
{
    Buffer y(a.data().begin(), a.data().end());
    for (double& v : y)
        v *= v;
    return a.tape().record(a.shape(), std::move(y), {a}, [a](Tape& tape, std::span<const double> g) {
        auto ga = tape.grad_sink(a);
        const auto x = a.data();
        for (std::size_t i = 0; i < g.size(); ++i)
            ga[i] += 2.0 * x[i] * g[i];
    });
}

Tensor exp(const Tensor& a)
{
    return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a)
{
    for (double v : a.data())
        if (!(v > 0.0))
            throw NumericError("log: non-positive input");
    return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor relu(const Tensor& a)
{
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope)
{
    return unary(a, [slope](double x) { return x > 0.0 ? x : slope * x; },
                 [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& a)
{
    return unary(
        a,
        [](double x) {
            if (x >= 0.0)
                return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a)
{
    return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sum(const Tensor& a)
{
    return a.tape().record({}, {pairwise_sum(a.data())}, {a}, [a](Tape& tape, std::span<const double> g) {
        auto ga = tape.grad_sink(a);
        for (double& v : ga)
            v += g[0];
    });
}

Tensor mean(const Tensor& a)
{
    if (a.numel() == 0)
        throw DimensionError("mean: empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor add_n(const std::vector<Tensor>& terms)
{
    if (terms.empty())
        throw DimensionError("add_n: no terms");
    if (terms.size() == 1)
        return terms[0];
    const std::size_t half = terms.size() / 2;
    return add(add_n({terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(half)}),
               add_n({terms.begin() + static_cast<std::ptrdiff_t>(half), terms.end()}));
}

Tensor batch_sum(const Tensor& a)
{
    if (a.shape().empty())
        throw DimensionError("batch_sum: scalar input");
    const std::size_t n = a.dim(0);
    const std::size_t inner = n ? a.numel() / n : 0;
    Buffer y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = pairwise_sum(a.data().subspan(i * inner, inner));
    return a.tape().record({n}, std::move(y), {a}, [a, inner](Tape& tape, std::span<const double> g) {
        auto ga = tape.grad_sink(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = 0; j < inner; ++j)
                ga[i * inner + j] += g[i];
    });
}

Tensor expand_scalar(const Tensor& a, Shape shape)
{
    if (a.numel() != 1)
        throw DimensionError("expand_scalar: input has shape " + to_string(a.shape()));
    Buffer y(numel(shape), a.data()[0]);
    return a.tape().record(std::move(shape), std::move(y), {a}, [a](Tape& tape, std::span<const double> g) {
        tape.grad_sink(a)[0] += pairwise_sum(g);
    });
}

Tensor reshape(const Tensor& a, Shape shape)
{
    if (numel(shape) != a.numel())
        throw DimensionError("reshape: " + to_string(a.shape()) + " -> " + to_string(shape));
    return a.tape().record(std::move(shape), Buffer(a.data().begin(), a.data().end()), {a},
                           [a](Tape& tape, std::span<const double> g) {
                               auto ga = tape.grad_sink(a);
                               for (std::size_t i = 0; i < g.size(); ++i)
                                   ga[i] += g[i];
                           });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end)
{
    if (axis >= a.shape().size() || begin > end || end > a.dim(axis))
        throw DimensionError("slice: bad range on shape " + to_string(a.shape()));
    const AxisSplit s = split_axis(a.shape(), axis);
    const std::size_t len = end - begin;
    Shape shape = a.shape();
    shape[axis] = len;
    Buffer y(s.outer * len * s.inner);
    const auto x = a.data();
    for (std::size_t o = 0; o < s.outer; ++o)
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>((o * s.extent + begin) * s.inner), len * s.inner,
                    y.begin() + static_cast<std::ptrdiff_t>(o * len * s.inner));
    return a.tape().record(std::move(shape), std::move(y), {a},
                           [a, s, begin, len](Tape& tape, std::span<const double> g) {
                               auto ga = tape.grad_sink(a);
                               for (std::size_t o = 0; o < s.outer; ++o)
                                   for (std::size_t j = 0; j < len * s.inner; ++j)
                                       ga[(o * s.extent + begin) * s.inner + j] += g[o * len * s.inner + j];
                           });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis)
{
    if (parts.empty())
        throw DimensionError("concat: no parts");
    const Shape& ref = parts[0].shape();
    if (axis >= ref.size())
        throw DimensionError("concat: axis out of range for " + to_string(ref));
    Shape shape = ref;
    shape[axis] = 0;
    for (const Tensor& p : parts) {
        Shape probe = p.shape();
        if (probe.size() != ref.size())
            throw DimensionError("concat: rank mismatch");
        shape[axis] += probe[axis];
        probe[axis] = ref[axis];
        if (probe != ref)
            throw DimensionError("concat: shape mismatch " + to_string(p.shape()) + " vs " + to_string(ref));
    }
    const AxisSplit total = split_axis(shape, axis);
    Buffer y(numel(shape));
    std::vector<std::size_t> offsets;
    std::size_t offset = 0;
    for (const Tensor& p : parts) {
        offsets.push_back(offset);
        const std::size_t len = p.dim(axis);
        const auto x = p.data();
        for (std::size_t o = 0; o < total.outer; ++o)
            std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(o * len * total.inner), len * total.inner,
                        y.begin() + static_cast<std::ptrdiff_t>((o * total.extent + offset) * total.inner));
        offset += len;
    }
    return parts[0].tape().record(
        std::move(shape), std::move(y), parts, [parts, axis, total, offsets](Tape& tape, std::span<const double> g) {
            for (std::size_t k = 0; k < parts.size(); ++k) {
                auto gp = tape.grad_sink(parts[k]);
                if (gp.empty())
                    continue;
                const std::size_t len = parts[k].dim(axis);
                for (std::size_t o = 0; o < total.outer; ++o)
                    for (std::size_t j = 0; j < len * total.inner; ++j)
                        gp[o * len * total.inner + j] += g[(o * total.extent + offsets[k]) * total.inner + j];
            }
        });
}

Tensor gather(const Tensor& a, std::vector<std::size_t> index, Shape shape)
{
    if (numel(shape) != index.size())
        throw DimensionError("gather: index length does not match shape " + to_string(shape));
    const auto x = a.data();
    Buffer y(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= x.size())
            throw DimensionError("gather: index out of range");
        y[i] = x[index[i]];
    }
    return a.tape().record(std::move(shape), std::move(y), {a},
                           [a, index = std::move(index)](Tape& tape, std::span<const double> g) {
                               auto ga = tape.grad_sink(a);
                               for (std::size_t i = 0; i < g.size(); ++i)
                                   ga[index[i]] += g[i];
                           });
}

Tensor matmul(const Tensor& a, const Tensor& b)
{
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k)
        throw DimensionError("matmul: " + to_string(a.shape()) + " x " + to_string(b.shape()));
    Buffer y(m * n);
    const auto ma = static_cast<Eigen::Index>(m), ka = static_cast<Eigen::Index>(k),
               na = static_cast<Eigen::Index>(n);
    Map(y.data(), ma, na).noalias() = ConstMap(a.data().data(), ma, ka) * ConstMap(b.data().data(), ka, na);
    return a.tape().record({m, n}, std::move(y), {a, b}, [a, b, ma, ka, na](Tape& tape, std::span<const double> g) {
        ConstMap G(g.data(), ma, na);
        if (auto ga = tape.grad_sink(a); !ga.empty())
            Map(ga.data(), ma, ka).noalias() += G * ConstMap(b.data().data(), ka, na).transpose();
        if (auto gb = tape.grad_sink(b); !gb.empty())
            Map(gb.data(), ka, na).noalias() += ConstMap(a.data().data(), ma, ka).transpose() * G;
    });
}

Tensor upsample_nearest2x(const Tensor& x)
{
    require_rank(x, 4, "upsample_nearest2x");
    const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
    std::vector<std::size_t> index(planes * 4 * h * w);
    std::size_t i = 0;
    for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t r = 0; r < 2 * h; ++r)
            for (std::size_t c = 0; c < 2 * w; ++c)
                index[i++] = (p * h + r / 2) * w + c / 2;
    return gather(x, std::move(index), {x.dim(0), x.dim(1), 2 * h, 2 * w});
}

Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta)
{
    require_rank(x, 4, "channel_norm");
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (gamma.shape() != Shape{c} || beta.shape() != Shape{c})
        throw DimensionError("channel_norm: gamma/beta must have shape (" + std::to_string(c) + ")");
    const double count = static_cast<double>(n * hw);
    const auto xv = x.data();
    Buffer inv_std(c), xhat(xv.size()), y(xv.size());
    for (std::size_t ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t j = 0; j < hw; ++j)
                s += xv[(b * c + ch) * hw + j];
        const double mu = s / count;
        double v = 0.0;
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t j = 0; j < hw; ++j) {
                const double d = xv[(b * c + ch) * hw + j] - mu;
                v += d * d;
            }
        inv_std[ch] = 1.0 / std::sqrt(v / count + kChannelNormEps);
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t j = 0; j < hw; ++j) {
                const std::size_t idx = (b * c + ch) * hw + j;
                xhat[idx] = (xv[idx] - mu) * inv_std[ch];
                y[idx] = gamma.data()[ch] * xhat[idx] + beta.data()[ch];
            }
    }
    return x.tape().record(
        x.shape(), std::move(y), {x, gamma, beta},
        [x, gamma, beta, n, c, hw, count, inv_std = std::move(inv_std),
         xhat = std::move(xhat)](Tape& tape, std::span<const double> g) {
            auto gx = tape.grad_sink(x);
            auto gg = tape.grad_sink(gamma);
            auto gb = tape.grad_sink(beta);
            for (std::size_t ch = 0; ch < c; ++ch) {
                double sum_g = 0.0, sum_gx = 0.0;
                for (std::size_t b = 0; b < n; ++b)
                    for (std::size_t j = 0; j < hw; ++j) {
                        const std::size_t idx = (b * c + ch) * hw + j;
                        sum_g += g[idx];
                        sum_gx += g[idx] * xhat[idx];
                    }
                if (!gg.empty())
                    gg[ch] += sum_gx;
                if (!gb.empty())
                    gb[ch] += sum_g;
                if (gx.empty())
                    continue;
                const double gm = gamma.data()[ch];
                const double k = gm * inv_std[ch] / count;
                for (std::size_t b = 0; b < n; ++b)
                    for (std::size_t j = 0; j < hw; ++j) {
                        const std::size_t idx = (b * c + ch) * hw + j;
                        gx[idx] += k * (count * g[idx] - sum_g - xhat[idx] * sum_gx);
                    }
            }
        });
}

namespace {

void require_channel_params(const Tensor& x, const Tensor& bias, const Tensor& log_scale, const char* op)
{
    require_rank(x, 4, op);
    const Shape want{x.dim(1)};
    if (bias.shape() != want || log_scale.shape() != want)
        throw DimensionError(std::string(op) + ": parameters must have shape " + to_string(want));
}

} // namespace

Tensor actnorm(const Tensor& x, const Tensor& bias, const Tensor& log_scale)
{
    require_channel_params(x, bias, log_scale, "actnorm");
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    const auto xv = x.data();
    Buffer y(xv.size());
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double s = std::exp(log_scale.data()[ch]), off = bias.data()[ch];
            for (std::size_t j = 0; j < hw; ++j) {
                const std::size_t idx = (b * c + ch) * hw + j;
                y[idx] = (xv[idx] + off) * s;
            }
        }
    return x.tape().record(x.shape(), std::move(y), {x, bias, log_scale},
                           [x, bias, log_scale, n, c, hw](Tape& tape, std::span<const double> g) {
                               auto gx = tape.grad_sink(x);
                               auto gb = tape.grad_sink(bias);
                               auto gs = tape.grad_sink(log_scale);
                               const auto xv = x.data();
                               for (std::size_t ch = 0; ch < c; ++ch) {
                                   const double s = std::exp(log_scale.data()[ch]), off = bias.data()[ch];
                                   double sum_g = 0.0, sum_gy = 0.0;
                                   for (std::size_t b = 0; b < n; ++b)
                                       for (std::size_t j = 0; j < hw; ++j) {
                                           const std::size_t idx = (b * c + ch) * hw + j;
                                           sum_g += g[idx];
                                           sum_gy += g[idx] * (xv[idx] + off) * s;
                                           if (!gx.empty())
                                               gx[idx] += g[idx] * s;
                                       }
                                   if (!gb.empty())
                                       gb[ch] += sum_g * s;
                                   if (!gs.empty())
                                       gs[ch] += sum_gy;
                               }
                           });
}

Tensor actnorm_inverse(const Tensor& y, const Tensor& bias, const Tensor& log_scale)
{
    require_channel_params(y, bias, log_scale, "actnorm_inverse");
    const std::size_t n = y.dim(0), c = y.dim(1), hw = y.dim(2) * y.dim(3);
    const auto yv = y.data();
    Buffer x(yv.size());
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double inv = std::exp(-log_scale.data()[ch]), off = bias.data()[ch];
            for (std::size_t j = 0; j < hw; ++j) {
                const std::size_t idx = (b * c + ch) * hw + j;
                x[idx] = yv[idx] * inv - off;
            }
        }
    return y.tape().record(y.shape(), std::move(x), {y, bias, log_scale},
                           [y, bias, log_scale, n, c, hw](Tape& tape, std::span<const double> g) {
                               auto gy = tape.grad_sink(y);
                               auto gb = tape.grad_sink(bias);
                               auto gs = tape.grad_sink(log_scale);
                               const auto yv = y.data();
                               for (std::size_t ch = 0; ch < c; ++ch) {
                                   const double inv = std::exp(-log_scale.data()[ch]);
                                   double sum_g = 0.0, sum_gy = 0.0;
                                   for (std::size_t b = 0; b < n; ++b)
                                       for (std::size_t j = 0; j < hw; ++j) {
                                           const std::size_t idx = (b * c + ch) * hw + j;
                                           sum_g += g[idx];
                                           sum_gy += g[idx] * yv[idx] * inv;
                                           if (!gy.empty())
                                               gy[idx] += g[idx] * inv;
                                       }
                                   if (!gb.empty())
                                       gb[ch] -= sum_g;
                                   if (!gs.empty())
                                       gs[ch] -= sum_gy;
                               }
                           });
}

Tensor squeeze2x(const Tensor& x)
{
    require_rank(x, 4, "squeeze2x");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 || w % 2)
        throw DimensionError("squeeze2x: spatial dims must be even, got " + to_string(x.shape()));
    const std::size_t h2 = h / 2, w2 = w / 2;
    std::vector<std::size_t> index(x.numel());
    std::size_t i = 0;
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t dy = 0; dy < 2; ++dy)
                for (std::size_t dx = 0; dx < 2; ++dx)
                    for (std::size_t r = 0; r < h2; ++r)
                        for (std::size_t q = 0; q < w2; ++q)
                            index[i++] = ((b * c + ch) * h + 2 * r + dy) * w + 2 * q + dx;
    return gather(x, std::move(index), {n, 4 * c, h2, w2});
}

Tensor unsqueeze2x(const Tensor& x)
{
    require_rank(x, 4, "unsqueeze2x");
    const std::size_t n = x.dim(0), c4 = x.dim(1), h2 = x.dim(2), w2 = x.dim(3);
    if (c4 % 4)
        throw DimensionError("unsqueeze2x: channels must be a multiple of 4, got " + to_string(x.shape()));
    const std::size_t c = c4 / 4, h = 2 * h2, w = 2 * w2;
    std::vector<std::size_t> index(x.numel());
    std::size_t i = 0;
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t r = 0; r < h; ++r)
                for (std::size_t q = 0; q < w; ++q) {
                    const std::size_t src_c = 4 * ch + 2 * (r % 2) + q % 2;
                    index[i++] = ((b * c4 + src_c) * h2 + r / 2) * w2 + q / 2;
                }
    return gather(x, std::move(index), {n, c, h, w});
}

Tensor permute_channels(const Tensor& x, const std::vector<std::size_t>& perm)
{
    require_rank(x, 4, "permute_channels");
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (perm.size() != c)
        throw DimensionError("permute_channels: permutation length mismatch");
    std::vector<std::size_t> index(x.numel());
    std::size_t i = 0;
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch) {
            if (perm[ch] >= c)
                throw DimensionError("permute_channels: index out of range");
            for (std::size_t j = 0; j < hw; ++j)
                index[i++] = (b * c + perm[ch]) * hw + j;
        }
    return gather(x, std::move(index), x.shape());
}

} // namespace ptych::ad
