#include "autodiff/ops.hpp"
#include "autodiff/measurement_graph.hpp"

#include "common/error.hpp"
#include "field/fft.hpp"

#include <cmath>

namespace ptych::ad {

namespace {

void require_plane(const Tensor& t, const char* op)
{
    if (t.shape().size() != 2)
        throw DimensionError(std::string(op) + ": expected an (H, W) plane, got " + to_string(t.shape()));
}

Tensor pack(const ComplexPair& x)
{
    require_plane(x.re, "complex pair");
    if (x.re.shape() != x.im.shape())
        throw DimensionError("complex pair: re/im shapes differ");
    const Shape plane{1, x.re.dim(0), x.re.dim(1)};
    return concat({reshape(x.re, plane), reshape(x.im, plane)}, 0);
}

ComplexPair unpack(const Tensor& packed)
{
    const Shape plane{packed.dim(1), packed.dim(2)};
    return {reshape(slice(packed, 0, 0, 1), plane), reshape(slice(packed, 0, 1, 2), plane)};
}

ComplexField to_field(std::span<const double> packed, std::size_t h, std::size_t w)
{
    ComplexField f(h, w);
    const std::size_t n = h * w;
    for (std::size_t i = 0; i < n; ++i)
        f[i] = {packed[i], packed[n + i]};
    return f;
}

void add_field(const ComplexField& f, std::span<double> packed)
{
    const std::size_t n = f.size();
    for (std::size_t i = 0; i < n; ++i) {
        packed[i] += f[i].real();
        packed[n + i] += f[i].imag();
    }
}

Buffer field_values(const ComplexField& f)
{
    Buffer v(2 * f.size(), 0.0);
    add_field(f, v);
    return v;
}

// Unitary transform on a packed (2, H, W) tensor; the reverse rule applies
// the adjoint, which for a unitary map is the inverse.
Tensor transform_packed(const Tensor& x, bool inverse)
{
    if (x.shape().size() != 3 || x.dim(0) != 2)
        throw DimensionError("fft: expected packed (2, H, W), got " + to_string(x.shape()));
    const std::size_t h = x.dim(1), w = x.dim(2);
    require_fft_dims(h, w);
    const ComplexField in = to_field(x.data(), h, w);
    const ComplexField out = inverse ? ifft2(in) : fft2(in);
    return x.tape().record(x.shape(), field_values(out), {x},
                           [x, h, w, inverse](Tape& tape, std::span<const double> g) {
                               const ComplexField cot = to_field(g, h, w);
                               add_field(inverse ? fft2(cot) : ifft2(cot), tape.grad_sink(x));
                           });
}

Tensor mask_packed(const Tensor& x, const BinaryMask& support)
{
    const std::size_t h = x.dim(1), w = x.dim(2);
    if (support.height() != h || support.width() != w)
        throw DimensionError("pupil_mask_layer: support dims do not match field");
    Buffer y(x.numel(), 0.0);
    const auto xv = x.data();
    const std::size_t n = h * w;
    for (std::size_t p = 0; p < 2; ++p)
        for (std::size_t i = 0; i < n; ++i)
            if (support[i])
                y[p * n + i] = xv[p * n + i];
    return x.tape().record(x.shape(), std::move(y), {x}, [x, support, n](Tape& tape, std::span<const double> g) {
        auto gx = tape.grad_sink(x);
        for (std::size_t p = 0; p < 2; ++p)
            for (std::size_t i = 0; i < n; ++i)
                if (support[i])
                    gx[p * n + i] += g[p * n + i];
    });
}

Tensor magnitude_packed(const Tensor& x)
{
    const std::size_t h = x.dim(1), w = x.dim(2), n = h * w;
    const auto xv = x.data();
    Buffer y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = std::hypot(xv[i], xv[n + i]);
    return x.tape().record({h, w}, std::move(y), {x}, [x, n](Tape& tape, std::span<const double> g) {
        auto gx = tape.grad_sink(x);
        const auto xv = x.data();
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::hypot(xv[i], xv[n + i]);
            if (m == 0.0)
                continue;
            gx[i] += g[i] * xv[i] / m;
            gx[n + i] += g[i] * xv[n + i] / m;
        }
    });
}

} // namespace

ComplexPair real_to_complex(const Tensor& re)
{
    require_plane(re, "real_to_complex");
    return {re, re.tape().constant(re.shape(), std::vector<double>(re.numel(), 0.0))};
}

ComplexPair fft_layer(const ComplexPair& x) { return unpack(transform_packed(pack(x), false)); }

ComplexPair ifft_layer(const ComplexPair& x) { return unpack(transform_packed(pack(x), true)); }

ComplexPair pupil_mask_layer(const ComplexPair& x, const BinaryMask& support)
{
    return unpack(mask_packed(pack(x), support));
}

Tensor magnitude_layer(const ComplexPair& x) { return magnitude_packed(pack(x)); }

Tensor subsample_layer(const Tensor& x, const BinaryMask& mask)
{
    require_plane(x, "subsample_layer");
    if (mask.height() != x.dim(0) || mask.width() != x.dim(1))
        throw DimensionError("subsample_layer: mask dims do not match plane");
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i])
            index.push_back(i);
    const std::size_t count = index.size();
    return gather(x, std::move(index), {count});
}

Tensor measurement_loss(const Tensor& image, const MeasurementSet& m)
{
    if (image.shape() != Shape{m.height(), m.width()})
        throw DimensionError("measurement_loss: image shape " + to_string(image.shape()) +
                             " does not match measurements " + std::to_string(m.height()) + "x" +
                             std::to_string(m.width()));
    Tape& tape = image.tape();
    const Tensor spectrum = transform_packed(pack(real_to_complex(image)), false);
    std::vector<Tensor> terms;
    terms.reserve(m.camera_count());
    for (std::size_t l = 0; l < m.camera_count(); ++l) {
        const Tensor field = transform_packed(mask_packed(spectrum, m.array.pupil(l).support), true);
        const BinaryMask& mask = m.masks.per_camera[l];
        const Tensor predicted = subsample_layer(magnitude_packed(field), mask);
        std::vector<double> observed;
        observed.reserve(predicted.numel());
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i])
                observed.push_back(m.y[l][i]);
        const Tensor y = tape.constant(predicted.shape(), std::move(observed));
        terms.push_back(sum(square(y - predicted)));
    }
    return add_n(terms);
}

} // namespace ptych::ad
