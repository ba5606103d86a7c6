#pragma once

#include "field/image.hpp"
#include "field/pupil.hpp"
#include "field/sampling.hpp"

#include <cstdint>
#include <vector>

namespace ptych {

// A_l = F^-1 P_l F.
ComplexField apply_A(const ComplexField& x, const PupilMask& pupil);
ComplexField apply_A(const RealImage& x, const PupilMask& pupil);

// Self-adjoint: the support is real and binary and the transforms are unitary.
ComplexField apply_A_adjoint(const ComplexField& u, const PupilMask& pupil);

struct MeasurementSet {
    CameraArray array;
    SubsampleMask masks;
    NoiseSpec noise;
    std::vector<RealImage> y; // magnitudes; zero wherever the mask is zero

    std::size_t height() const noexcept { return array.height(); }
    std::size_t width() const noexcept { return array.width(); }
    std::size_t camera_count() const noexcept { return y.size(); }
    // Sum over cameras of ||y_l||^2.
    double energy() const;
    // Mean of all retained magnitudes.
    double retained_mean() const;
};

// Checks the structural invariants (counts, dims, zeros off-mask).
void validate(const MeasurementSet& m);

// y_l = M_l o (|A_l x| + eps_l). Noise is drawn per camera from
// split_seed(noise.seed, l) and added only at retained pixels.
MeasurementSet forward_measure(const RealImage& x, const CameraArray& array,
                               const SubsampleMask& masks, const NoiseSpec& noise);

// sum_l ||y_l - M_l |A_l x|||^2, accumulated per camera in fixed order
// and reduced pairwise.
double measurement_loss(const RealImage& x, const MeasurementSet& m);
double measurement_loss(const ComplexField& x, const MeasurementSet& m);

// Everything needed to regenerate a MeasurementSet from an image.
struct SimulationParams {
    CameraGeometry geometry;
    double ratio = 100.0;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
    bool clip_negative = false;
};

SimulationParams default_simulation(std::size_t height, std::size_t width);

// Derives mask and noise seeds from params.seed and runs forward_measure.
MeasurementSet simulate(const RealImage& x, const SimulationParams& params);

} // namespace ptych
