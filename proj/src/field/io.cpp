#include "field/io.hpp"

#include "common/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace ptych {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'T', 'Y', 'F'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffU));
}

void put_f64(std::vector<unsigned char>& out, double v)
{
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xffU));
}

std::uint32_t get_u32(const unsigned char* p)
{
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

double get_f64(const unsigned char* p)
{
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

std::vector<unsigned char> header_bytes(std::size_t h, std::size_t w, PtyfKind kind)
{
    std::vector<unsigned char> out(kMagic.begin(), kMagic.end());
    put_u32(out, static_cast<std::uint32_t>(h));
    put_u32(out, static_cast<std::uint32_t>(w));
    put_u32(out, static_cast<std::uint32_t>(kind));
    return out;
}

void write_bytes_atomic(const std::filesystem::path& path, const std::vector<unsigned char>& bytes)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
        if (!f)
            throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open " + path.string());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(f), {});
}

PtyfHeader parse_header(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
{
    if (bytes.size() < 16 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw IoError(path.string() + ": not a PTYF file");
    PtyfHeader h;
    h.height = get_u32(bytes.data() + 4);
    h.width = get_u32(bytes.data() + 8);
    const std::uint32_t kind = get_u32(bytes.data() + 12);
    if (kind > 1)
        throw IoError(path.string() + ": unknown PTYF kind " + std::to_string(kind));
    h.kind = static_cast<PtyfKind>(kind);
    const std::size_t per = h.kind == PtyfKind::Real ? 8 : 16;
    if (bytes.size() != 16 + per * std::size_t{h.height} * h.width)
        throw IoError(path.string() + ": truncated or oversized PTYF payload");
    return h;
}

} // namespace

void write_ptyf(const std::filesystem::path& path, const RealImage& img)
{
    auto bytes = header_bytes(img.height(), img.width(), PtyfKind::Real);
    bytes.reserve(16 + 8 * img.size());
    for (double v : img.values())
        put_f64(bytes, v);
    write_bytes_atomic(path, bytes);
}

void write_ptyf(const std::filesystem::path& path, const ComplexField& field)
{
    auto bytes = header_bytes(field.height(), field.width(), PtyfKind::Complex);
    bytes.reserve(16 + 16 * field.size());
    for (const Complex& v : field.values()) {
        put_f64(bytes, v.real());
        put_f64(bytes, v.imag());
    }
    write_bytes_atomic(path, bytes);
}

PtyfHeader read_ptyf_header(const std::filesystem::path& path)
{
    return parse_header(read_bytes(path), path);
}

RealImage read_ptyf_real(const std::filesystem::path& path)
{
    const auto bytes = read_bytes(path);
    const auto h = parse_header(bytes, path);
    if (h.kind != PtyfKind::Real)
        throw IoError(path.string() + ": expected a real PTYF dump");
    RealImage img(h.height, h.width);
    for (std::size_t i = 0; i < img.size(); ++i)
        img[i] = get_f64(bytes.data() + 16 + 8 * i);
    return img;
}

ComplexField read_ptyf_complex(const std::filesystem::path& path)
{
    const auto bytes = read_bytes(path);
    const auto h = parse_header(bytes, path);
    ComplexField f(h.height, h.width);
    if (h.kind == PtyfKind::Real) {
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = Complex(get_f64(bytes.data() + 16 + 8 * i), 0.0);
    } else {
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = Complex(get_f64(bytes.data() + 16 + 16 * i), get_f64(bytes.data() + 24 + 16 * i));
    }
    return f;
}

RealImage read_png(const std::filesystem::path& path)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw IoError("cannot read PNG " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_GRAY;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    RealImage img(image.height, image.width);
    for (std::size_t i = 0; i < img.size(); ++i)
        img[i] = static_cast<double>(buffer[i]) / 255.0;
    return img;
}

void write_png(const std::filesystem::path& path, const RealImage& img)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    std::vector<png_byte> buffer(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::isfinite(img[i]) ? std::clamp(img[i], 0.0, 1.0) : 0.0;
        buffer[i] = static_cast<png_byte>(std::lround(v * 255.0));
    }
    auto tmp = path;
    tmp += ".tmp";
    if (!png_image_write_to_file(&image, tmp.c_str(), 0, buffer.data(), 0, nullptr))
        throw IoError("cannot write PNG " + path.string() + ": " + image.message);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text)
{
    write_bytes_atomic(path, std::vector<unsigned char>(text.begin(), text.end()));
}

} // namespace ptych
