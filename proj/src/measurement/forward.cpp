#include "measurement/forward.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"
#include "common/summation.hpp"
#include "field/fft.hpp"

#include <cmath>

namespace ptych {

namespace {

ComplexField band_pass(const ComplexField& x, const PupilMask& pupil)
{
    require_same_dims(x, pupil.support, "apply_A");
    ComplexField spectrum = fft2(x);
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        if (pupil.support[i] == 0)
            spectrum[i] = Complex(0.0, 0.0);
    return ifft2(spectrum);
}

ComplexField band_pass_spectrum(const ComplexField& spectrum, const PupilMask& pupil)
{
    ComplexField masked = spectrum;
    for (std::size_t i = 0; i < masked.size(); ++i)
        if (pupil.support[i] == 0)
            masked[i] = Complex(0.0, 0.0);
    return ifft2(masked);
}

double camera_residual(const ComplexField& spectrum, const PupilMask& pupil, const RealImage& y,
                       const BinaryMask& mask)
{
    const ComplexField a = band_pass_spectrum(spectrum, pupil);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask[i] == 0)
            continue;
        const double d = y[i] - std::abs(a[i]);
        s += d * d;
    }
    return s;
}

} // namespace

ComplexField apply_A(const ComplexField& x, const PupilMask& pupil)
{
    return band_pass(x, pupil);
}

ComplexField apply_A(const RealImage& x, const PupilMask& pupil)
{
    return band_pass(to_complex(x), pupil);
}

ComplexField apply_A_adjoint(const ComplexField& u, const PupilMask& pupil)
{
    return band_pass(u, pupil);
}

double MeasurementSet::energy() const
{
    std::vector<double> parts;
    parts.reserve(y.size());
    for (const auto& img : y) {
        double s = 0.0;
        for (double v : img.values())
            s += v * v;
        parts.push_back(s);
    }
    return pairwise_sum(parts);
}

double MeasurementSet::retained_mean() const
{
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t l = 0; l < y.size(); ++l)
        for (std::size_t i = 0; i < y[l].size(); ++i)
            if (masks.per_camera[l][i] != 0) {
                s += y[l][i];
                ++n;
            }
    return n == 0 ? 0.0 : s / static_cast<double>(n);
}

void validate(const MeasurementSet& m)
{
    const std::size_t cameras = m.array.camera_count();
    if (m.y.size() != cameras || m.masks.camera_count() != cameras)
        throw DimensionError("measurement set: camera count mismatch");
    for (std::size_t l = 0; l < cameras; ++l) {
        require_same_dims(m.y[l], m.array.pupil(l).support, "measurement set");
        require_same_dims(m.y[l], m.masks.per_camera[l], "measurement set");
        require_finite(m.y[l], "measurement set");
        for (std::size_t i = 0; i < m.y[l].size(); ++i)
            if (m.masks.per_camera[l][i] == 0 && m.y[l][i] != 0.0)
                throw ConfigError("measurement set: nonzero value at a discarded pixel");
    }
}

MeasurementSet forward_measure(const RealImage& x, const CameraArray& array,
                               const SubsampleMask& masks, const NoiseSpec& noise)
{
    validate(noise);
    require_same_dims(x.height(), x.width(), array.height(), array.width(), "forward_measure");
    require_finite(x, "forward_measure");
    if (masks.camera_count() != array.camera_count())
        throw DimensionError("forward_measure: mask count does not match camera count");

    MeasurementSet m{array, masks, noise, {}};
    m.y.reserve(array.camera_count());
    const ComplexField spectrum = fft2(to_complex(x));
    const double sigma = noise.sigma();
    for (std::size_t l = 0; l < array.camera_count(); ++l) {
        const BinaryMask& mask = masks.per_camera[l];
        require_same_dims(x, mask, "forward_measure");
        const PupilMask& pupil = array.pupil(l);
        // A full-aperture pupil is the identity; skip the round trip so y is exact.
        const ComplexField a = pupil.area() == pupil.support.size() ? to_complex(x) : band_pass_spectrum(spectrum, pupil);
        RealImage y(x.height(), x.width());
        Rng rng(split_seed(noise.seed, l));
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (mask[i] == 0)
                continue;
            double v = std::abs(a[i]);
            if (sigma > 0.0)
                v += sigma * rng.normal();
            if (noise.clip_negative && v < 0.0)
                v = 0.0;
            y[i] = v;
        }
        m.y.push_back(std::move(y));
    }
    return m;
}

double measurement_loss(const ComplexField& x, const MeasurementSet& m)
{
    require_same_dims(x.height(), x.width(), m.height(), m.width(), "measurement_loss");
    const ComplexField spectrum = fft2(x);
    std::vector<double> per_camera;
    per_camera.reserve(m.camera_count());
    for (std::size_t l = 0; l < m.camera_count(); ++l)
        per_camera.push_back(
            camera_residual(spectrum, m.array.pupil(l), m.y[l], m.masks.per_camera[l]));
    return pairwise_sum(per_camera);
}

double measurement_loss(const RealImage& x, const MeasurementSet& m)
{
    return measurement_loss(to_complex(x), m);
}

SimulationParams default_simulation(std::size_t height, std::size_t width)
{
    SimulationParams p;
    p.geometry = default_geometry(height, width);
    return p;
}

MeasurementSet simulate(const RealImage& x, const SimulationParams& params)
{
    const CameraArray array = make_camera_array(x.height(), x.width(), params.geometry);
    const SubsampleMask masks =
        make_subsample_mask(x.height(), x.width(), array.camera_count(), params.ratio,
                            split_seed(params.seed, Stream::Mask));
    const NoiseSpec noise{params.noise_level, split_seed(params.seed, Stream::Noise),
                          params.clip_negative};
    return forward_measure(x, array, masks, noise);
}

} // namespace ptych
