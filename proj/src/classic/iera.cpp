#include "classic/iera.hpp"

#include "classic/dct.hpp"
#include "common/error.hpp"
#include "common/keyvalue.hpp"
#include "common/rng.hpp"
#include "field/fft.hpp"
#include "field/io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ptych {

namespace {

ComplexField initial_spectrum(const MeasurementSet& m, const IeraConfig& cfg)
{
    if (cfg.initial_spectrum) {
        require_same_dims(cfg.initial_spectrum->height(), cfg.initial_spectrum->width(), m.height(),
                          m.width(), "iera initial spectrum");
        return *cfg.initial_spectrum;
    }
    const double level = m.retained_mean();
    RealImage start(m.height(), m.width(), level);
    if (cfg.init == IeraInit::Random) {
        Rng rng(split_seed(cfg.seed, Stream::Init));
        for (double& v : start.values())
            v = rng.uniform(0.0, 2.0 * level);
    }
    return fft2(to_complex(start));
}

void project_camera(ComplexField& spectrum, const PupilMask& pupil, const RealImage& y,
                    const BinaryMask& mask)
{
    ComplexField band = spectrum;
    for (std::size_t i = 0; i < band.size(); ++i)
        if (pupil.support[i] == 0)
            band[i] = Complex(0.0, 0.0);
    ComplexField a = ifft2(band);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (mask[i] == 0)
            continue;
        const double mag = std::abs(a[i]);
        a[i] = mag > 0.0 ? a[i] * (y[i] / mag) : Complex(y[i], 0.0);
    }
    const ComplexField updated = fft2(a);
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        if (pupil.support[i] != 0)
            spectrum[i] = updated[i];
}

ClassicResult run(const MeasurementSet& m, const IeraConfig& cfg, std::size_t sparsity)
{
    validate(cfg);
    validate(m);
    ComplexField spectrum = initial_spectrum(m, cfg);

    ClassicResult result;
    if (cfg.track_residual)
        result.residual_trace.push_back(measurement_loss(ifft2(spectrum), m));

    const std::size_t n = m.height() * m.width();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t l = 0; l < m.camera_count(); ++l)
            project_camera(spectrum, m.array.pupil(l), m.y[l], m.masks.per_camera[l]);
        if (sparsity < n)
            spectrum = fft2(project_dct_sparse(ifft2(spectrum), sparsity));
        if (cfg.track_residual)
            result.residual_trace.push_back(measurement_loss(ifft2(spectrum), m));
    }
    result.image = clamp(magnitude(ifft2(spectrum)), 0.0, 1.0);
    return result;
}

} // namespace

void validate(const IeraConfig& cfg)
{
    if (cfg.epochs < 1)
        throw ConfigError("iera: epochs must be >= 1");
}

ClassicResult iera_reconstruct(const MeasurementSet& m, const IeraConfig& cfg)
{
    return run(m, cfg, m.height() * m.width());
}

ClassicResult sparse_reconstruct(const MeasurementSet& m, const SparseConfig& cfg)
{
    const std::size_t n = m.height() * m.width();
    if (cfg.sparsity < 1 || cfg.sparsity > n)
        throw ConfigError("sparse: sparsity must lie in [1, " + std::to_string(n) + "]");
    return run(m, cfg.iera, cfg.sparsity);
}

ComplexField project_dct_sparse(const ComplexField& field, std::size_t sparsity)
{
    const std::size_t n = field.size();
    if (sparsity >= n)
        return field;
    ComplexField coeffs = dct2(field);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Ties broken by index so the kept set is deterministic.
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sparsity),
                     order.end(), [&](std::size_t a, std::size_t b) {
                         const double ma = std::norm(coeffs[a]);
                         const double mb = std::norm(coeffs[b]);
                         return ma != mb ? ma > mb : a < b;
                     });
    for (std::size_t k = sparsity; k < n; ++k)
        coeffs[order[k]] = Complex(0.0, 0.0);
    return idct2(coeffs);
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<double>& trace,
                     const char* column)
{
    std::string text = std::string("epoch,") + column + "\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        text += std::to_string(i) + "," + format_double(trace[i]) + "\n";
    write_text_atomic(path, text);
}

} // namespace ptych
