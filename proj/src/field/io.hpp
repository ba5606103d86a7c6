#pragma once

#include "field/image.hpp"

#include <cstdint>
#include <filesystem>

namespace ptych {

// PTYF: 16-byte little-endian header ("PTYF", u32 height, u32 width,
// u32 kind) followed by height*width little-endian f64 values (kind 0) or
// interleaved re/im f64 pairs (kind 1).
enum class PtyfKind : std::uint32_t { Real = 0, Complex = 1 };

struct PtyfHeader {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    PtyfKind kind = PtyfKind::Real;
};

void write_ptyf(const std::filesystem::path& path, const RealImage& img);
void write_ptyf(const std::filesystem::path& path, const ComplexField& field);
PtyfHeader read_ptyf_header(const std::filesystem::path& path);
RealImage read_ptyf_real(const std::filesystem::path& path);
ComplexField read_ptyf_complex(const std::filesystem::path& path);

// 8-bit grayscale PNG. Color inputs are converted to luminance; values
// are scaled to [0, 1]. Writing clamps to [0, 1] and rounds to 8 bits.
RealImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RealImage& img);

// Writes to a sibling temporary file, then renames over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace ptych
