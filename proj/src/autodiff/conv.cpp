#include "autodiff/ops.hpp"

#include "common/error.hpp"

#include <Eigen/Core>

#include <algorithm>

namespace ptych::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;
using Stride = Eigen::OuterStride<>;
using ConstStridedMap = Eigen::Map<const RowMatrix, 0, Stride>;
using StridedMap = Eigen::Map<RowMatrix, 0, Stride>;

// Column buffers are built a band of image rows at a time so they stay
// cache-resident.
constexpr std::size_t kTileBytes = std::size_t{1} << 20;

struct ConvDims {
    std::size_t n, c, h, w, o, k, pad;
    Eigen::Index rows() const { return static_cast<Eigen::Index>(c * k * k); }
    Eigen::Index pixels() const { return static_cast<Eigen::Index>(h * w); }
    std::size_t band_rows() const
    {
        const std::size_t per_row = static_cast<std::size_t>(rows()) * w * sizeof(double);
        return std::clamp<std::size_t>(kTileBytes / std::max<std::size_t>(per_row, 1), 1, h);
    }
};

// Output columns q whose source column q + kx - pad lies inside [0, w).
struct ColumnRange {
    std::size_t begin, end;
    std::ptrdiff_t shift;
};

ColumnRange valid_columns(const ConvDims& d, std::size_t kx)
{
    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(d.pad);
    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(d.w);
    const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(-shift, 0, w);
    const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(w - shift, 0, w);
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi)), shift};
}

// For output rows [r0, r1): cols(row = (ci*k + ky)*k + kx, col = (r-r0)*w + q)
// = x[ci, r+ky-pad, q+kx-pad], zero outside the image.
void im2col(const ConvDims& d, const double* x, std::size_t r0, std::size_t r1, RowMatrix& cols)
{
    const std::size_t band = (r1 - r0) * d.w;
    cols.resize(d.rows(), static_cast<Eigen::Index>(band));
    for (std::size_t ci = 0; ci < d.c; ++ci)
        for (std::size_t ky = 0; ky < d.k; ++ky)
            for (std::size_t kx = 0; kx < d.k; ++kx) {
                const ColumnRange cr = valid_columns(d, kx);
                double* out = cols.data() + ((ci * d.k + ky) * d.k + kx) * band;
                for (std::size_t r = r0; r < r1; ++r) {
                    const std::ptrdiff_t sr = static_cast<std::ptrdiff_t>(r + ky) - static_cast<std::ptrdiff_t>(d.pad);
                    double* row = out + (r - r0) * d.w;
                    if (sr < 0 || sr >= static_cast<std::ptrdiff_t>(d.h)) {
                        std::fill(row, row + d.w, 0.0);
                        continue;
                    }
                    const double* src = x + (ci * d.h + static_cast<std::size_t>(sr)) * d.w;
                    std::fill(row, row + cr.begin, 0.0);
                    std::copy(src + static_cast<std::ptrdiff_t>(cr.begin) + cr.shift,
                              src + static_cast<std::ptrdiff_t>(cr.end) + cr.shift, row + cr.begin);
                    std::fill(row + cr.end, row + d.w, 0.0);
                }
            }
}

void col2im_add(const ConvDims& d, const RowMatrix& cols, std::size_t r0, std::size_t r1, double* gx)
{
    const std::size_t band = (r1 - r0) * d.w;
    for (std::size_t ci = 0; ci < d.c; ++ci)
        for (std::size_t ky = 0; ky < d.k; ++ky)
            for (std::size_t kx = 0; kx < d.k; ++kx) {
                const ColumnRange cr = valid_columns(d, kx);
                const double* in = cols.data() + ((ci * d.k + ky) * d.k + kx) * band;
                for (std::size_t r = r0; r < r1; ++r) {
                    const std::ptrdiff_t sr = static_cast<std::ptrdiff_t>(r + ky) - static_cast<std::ptrdiff_t>(d.pad);
                    if (sr < 0 || sr >= static_cast<std::ptrdiff_t>(d.h))
                        continue;
                    double* dst = gx + (ci * d.h + static_cast<std::size_t>(sr)) * d.w + cr.shift;
                    const double* row = in + (r - r0) * d.w;
                    for (std::size_t q = cr.begin; q < cr.end; ++q)
                        dst[q] += row[q];
                }
            }
}

} // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias)
{
    if (x.shape().size() != 4 || weight.shape().size() != 4)
        throw DimensionError("conv2d: expected rank-4 input and weight, got " + to_string(x.shape()) + " and " +
                             to_string(weight.shape()));
    ConvDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), weight.dim(0), weight.dim(2), 0};
    if (weight.dim(1) != d.c || weight.dim(3) != d.k || d.k % 2 == 0)
        throw DimensionError("conv2d: weight " + to_string(weight.shape()) + " incompatible with input " +
                             to_string(x.shape()));
    if (bias.shape() != Shape{d.o})
        throw DimensionError("conv2d: bias must have shape (" + std::to_string(d.o) + ")");
    d.pad = d.k / 2;

    const auto O = static_cast<Eigen::Index>(d.o);
    const std::size_t in_plane = d.c * d.h * d.w, out_plane = d.o * d.h * d.w;
    const std::size_t band_rows = d.band_rows();
    Buffer y(d.n * out_plane);
    ConstMap W(weight.data().data(), O, d.rows());
    RowMatrix cols;
    for (std::size_t b = 0; b < d.n; ++b) {
        Map Y(y.data() + b * out_plane, O, d.pixels());
        const double* xb = x.data().data() + b * in_plane;
        if (d.k == 1) {
            Y.noalias() = W * ConstMap(xb, d.rows(), d.pixels());
        } else {
            for (std::size_t r0 = 0; r0 < d.h; r0 += band_rows) {
                const std::size_t r1 = std::min(d.h, r0 + band_rows);
                im2col(d, xb, r0, r1, cols);
                StridedMap(y.data() + b * out_plane + r0 * d.w, O, cols.cols(), Stride(d.pixels())).noalias() =
                    W * cols;
            }
        }
        for (Eigen::Index oc = 0; oc < O; ++oc)
            Y.row(oc).array() += bias.data()[static_cast<std::size_t>(oc)];
    }

    return x.tape().record(
        {d.n, d.o, d.h, d.w}, std::move(y), {x, weight, bias},
        [x, weight, bias, d, O, in_plane, out_plane, band_rows](Tape& tape, std::span<const double> g) {
            auto gx = tape.grad_sink(x);
            auto gw = tape.grad_sink(weight);
            auto gb = tape.grad_sink(bias);
            ConstMap W(weight.data().data(), O, d.rows());
            RowMatrix cols, dcols;
            for (std::size_t b = 0; b < d.n; ++b) {
                ConstMap G(g.data() + b * out_plane, O, d.pixels());
                if (!gb.empty())
                    for (Eigen::Index oc = 0; oc < O; ++oc)
                        gb[static_cast<std::size_t>(oc)] += G.row(oc).sum();
                const double* xb = x.data().data() + b * in_plane;
                if (d.k == 1) {
                    if (!gw.empty())
                        Map(gw.data(), O, d.rows()).noalias() += G * ConstMap(xb, d.rows(), d.pixels()).transpose();
                    if (!gx.empty())
                        Map(gx.data() + b * in_plane, d.rows(), d.pixels()).noalias() += W.transpose() * G;
                    continue;
                }
                for (std::size_t r0 = 0; r0 < d.h; r0 += band_rows) {
                    const std::size_t r1 = std::min(d.h, r0 + band_rows);
                    const auto band = static_cast<Eigen::Index>((r1 - r0) * d.w);
                    ConstStridedMap Gb(g.data() + b * out_plane + r0 * d.w, O, band, Stride(d.pixels()));
                    if (!gw.empty()) {
                        im2col(d, xb, r0, r1, cols);
                        Map(gw.data(), O, d.rows()).noalias() += Gb * cols.transpose();
                    }
                    if (!gx.empty()) {
                        dcols.noalias() = W.transpose() * Gb;
                        col2im_add(d, dcols, r0, r1, gx.data() + b * in_plane);
                    }
                }
            }
        });
}

} // namespace ptych::ad
