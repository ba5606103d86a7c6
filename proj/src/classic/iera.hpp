#pragma once

#include "field/image.hpp"
#include "measurement/forward.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace ptych {

enum class IeraInit {
    FlatMagnitude, // constant image at the mean retained magnitude
    Random,        // uniform [0, 2 * mean retained magnitude) image
};

struct IeraConfig {
    std::size_t epochs = 100;
    IeraInit init = IeraInit::FlatMagnitude;
    std::uint64_t seed = 0;
    bool track_residual = true;
    // Overrides `init` with an explicit DC-centered spectrum.
    std::optional<ComplexField> initial_spectrum;
};

struct SparseConfig {
    IeraConfig iera;
    std::size_t sparsity = 0; // retained DCT coefficients; 1 <= s <= n
};

struct ClassicResult {
    RealImage image;
    // Entry 0 is the loss of the initial estimate, entry e the loss after epoch e.
    std::vector<double> residual_trace;
};

void validate(const IeraConfig& cfg);

// Alternating projections: per epoch and per camera in fixed order, the
// band-limited field a = F^-1(P X) takes the measured magnitudes at
// retained pixels (phase kept, phase 0 where |a| = 0) and is written back
// into the spectrum inside the pupil support. Output is |F^-1 X| clamped
// to [0, 1].
ClassicResult iera_reconstruct(const MeasurementSet& m, const IeraConfig& cfg);

// IERA with an extra per-epoch projection of the spatial estimate onto its
// `sparsity` largest-magnitude DCT coefficients.
ClassicResult sparse_reconstruct(const MeasurementSet& m, const SparseConfig& cfg);

// Keeps the s largest-magnitude DCT coefficients; identity for s >= n.
ComplexField project_dct_sparse(const ComplexField& field, std::size_t sparsity);

void write_trace_csv(const std::filesystem::path& path, const std::vector<double>& trace,
                     const char* column = "loss");

} // namespace ptych
