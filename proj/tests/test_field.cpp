#include <doctest.h>

#include "common/error.hpp"
#include "common/keyvalue.hpp"
#include "field/fft.hpp"
#include "field/io.hpp"
#include "field/pupil.hpp"
#include "field/sampling.hpp"
#include "oracles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace ptych;

TEST_CASE("fft2 of a unit impulse is flat at 1/sqrt(n)")
{
    ComplexField delta(8, 8);
    delta(0, 0) = 1.0;
    const ComplexField spec = fft2(delta);
    for (const auto& v : spec.values()) {
        CHECK(v.real() == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
        CHECK(std::abs(v.imag()) < 1e-15);
    }
}

TEST_CASE("fft2 matches the direct DFT oracle")
{
    for (auto [h, w] : {std::pair{16, 16}, std::pair{8, 4}, std::pair{1, 8}, std::pair{4, 2}}) {
        const ComplexField x = oracle::random_field(h, w, 17 + h * w);
        CHECK(oracle::max_abs_diff(fft2(x), oracle::direct_dft(x)) < 1e-10);
        CHECK(oracle::max_abs_diff(ifft2(x), oracle::direct_dft(x, true)) < 1e-10);
    }
}

TEST_CASE("fft2 puts DC at the plane center")
{
    ComplexField ones(8, 16, Complex(1.0, 0.0));
    const ComplexField spec = fft2(ones);
    CHECK(std::abs(spec(4, 8) - Complex(std::sqrt(128.0), 0.0)) < 1e-12);
    double rest = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i)
        if (i != 4 * 16 + 8)
            rest = std::max(rest, std::abs(spec[i]));
    CHECK(rest < 1e-12);
}

TEST_CASE("fft round trip and Parseval for power-of-two sizes up to 256")
{
    for (std::size_t n = 1; n <= 256; n *= 2) {
        const ComplexField v = oracle::random_field(n, n, n);
        const ComplexField spec = fft2(v);
        CHECK(oracle::max_abs_diff(ifft2(spec), v) < 1e-12);
        const double nv = oracle::norm2(v);
        CHECK(std::abs(oracle::norm2(spec) - nv) < 1e-10 * nv);
    }
    const ComplexField rect = oracle::random_field(32, 128, 5);
    CHECK(oracle::max_abs_diff(ifft2(fft2(rect)), rect) < 1e-12);
}

TEST_CASE("fft rejects non-power-of-two dims")
{
    CHECK_THROWS_AS(fft2(ComplexField(12, 16)), ConfigError);
    CHECK_THROWS_AS(ifft2(ComplexField(16, 0)), ConfigError);
}

TEST_CASE("pupil support is the rasterized disk, ties included")
{
    const PupilMask p = make_pupil(32, 32, 16.0, 16.0, 5.0);
    for (std::size_t r = 0; r < 32; ++r)
        for (std::size_t c = 0; c < 32; ++c) {
            const double d2 = (r - 16.0) * (r - 16.0) + (c - 16.0) * (c - 16.0);
            CHECK(p.support(r, c) == (d2 <= 25.0 ? 1 : 0));
        }
    CHECK(p.support(16, 21) == 1); // exactly on the boundary
    CHECK(p.support(19, 20) == 1); // 3-4-5 triangle
}

TEST_CASE("single full-aperture camera has all-ones support")
{
    const double half_diagonal = 32.0 * std::numbers::sqrt2;
    const CameraArray array = make_camera_array(64, 64, {1, half_diagonal, 0.0});
    REQUIRE(array.camera_count() == 1);
    CHECK(array.pupil(0).area() == 64 * 64);
}

TEST_CASE("camera grid layout")
{
    const CameraArray array = make_camera_array(256, 256, default_geometry(256, 256));
    CHECK(array.camera_count() == 25);
    // Centers form a 5x5 grid symmetric about the plane center.
    double mean_r = 0.0, mean_c = 0.0;
    for (const auto& p : array.pupils()) {
        mean_r += p.center_row;
        mean_c += p.center_col;
    }
    CHECK(mean_r / 25.0 == doctest::Approx(128.0));
    CHECK(mean_c / 25.0 == doctest::Approx(128.0));
    CHECK(array.pupil(12).center_row == 128.0);
    CHECK(array.pupil(1).center_col - array.pupil(0).center_col ==
          doctest::Approx(array.geometry().spacing));

    // Same inputs, same pupils.
    const CameraArray again = make_camera_array(256, 256, default_geometry(256, 256));
    for (std::size_t l = 0; l < 25; ++l)
        CHECK(again.pupil(l).support == array.pupil(l).support);
}

TEST_CASE("default spacing gives 60 percent area overlap")
{
    const double r = 16.0;
    const double d = spacing_for_overlap(r, 0.6);
    const double lens = 2 * r * r * std::acos(d / (2 * r)) - (d / 2) * std::sqrt(4 * r * r - d * d);
    CHECK(lens / (std::numbers::pi * r * r) == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("adjacent pupil overlap agrees with the circle-circle lens area")
{
    const CameraArray array = make_camera_array(64, 64, {3, 10.0, 12.0});
    const double r = 10.0, d = 12.0;
    const double lens = 2 * r * r * std::acos(d / (2 * r)) - (d / 2) * std::sqrt(4 * r * r - d * d);
    CHECK(lens == doctest::Approx(89.459).epsilon(1e-4));
    const auto& a = array.pupil(4).support; // center camera
    const auto& b = array.pupil(5).support; // right neighbour
    std::size_t both = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        both += a[i] & b[i];
    CHECK(both > 0);
    CHECK(std::abs(static_cast<double>(both) - lens) < 0.05 * lens);
}

TEST_CASE("camera union covers the low-frequency disk")
{
    for (std::size_t n : {64, 128, 256}) {
        const CameraGeometry g = default_geometry(n, n);
        const CameraArray array = make_camera_array(n, n, g);
        const double extent = g.spacing * (g.grid_size - 1) / 2.0;
        // Between two outer pupils the boundary dips to sqrt(r^2 - s^2/4).
        const double covered = extent + std::sqrt(g.radius * g.radius - g.spacing * g.spacing / 4.0);
        const double c = n / 2.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t col = 0; col < n; ++col) {
                const double dist = std::hypot(r - c, col - c);
                if (dist > covered)
                    continue;
                bool hit = false;
                for (const auto& p : array.pupils())
                    hit = hit || p.support(r, col) != 0;
                CHECK(hit);
            }
        // On the axes coverage reaches exactly extent + radius.
        CHECK(array.pupil(array.camera_count() / 2 - 2).support(n / 2, n / 2 - static_cast<std::size_t>(extent + g.radius)) == 1);
    }
}

TEST_CASE("camera array configuration errors")
{
    CHECK_THROWS_AS(make_camera_array(64, 64, {0, 8.0, 5.0}), ConfigError);
    CHECK_THROWS_AS(make_camera_array(64, 64, {3, 0.5, 5.0}), ConfigError);
    CHECK_THROWS_AS(make_camera_array(64, 64, {5, 10.0, 12.0}), ConfigError); // 32 +- 24 +- 10
    CHECK_THROWS_AS(make_camera_array(60, 64, {1, 8.0, 0.0}), ConfigError);
}

TEST_CASE("subsample retained counts are exact over the test grid")
{
    for (std::size_t side : {16, 64, 256})
        for (std::size_t cameras : {1, 9, 25})
            for (double ratio : {1.0, 2.0, 5.0, 10.0, 20.0, 100.0}) {
                const std::size_t n = side * side;
                const auto total = static_cast<std::size_t>(std::llround(ratio / 100.0 * n * cameras));
                const SubsampleMask m = make_subsample_mask(side, side, cameras, ratio, 99);
                CHECK(m.retained_count() == total);
                std::size_t lo = n, hi = 0;
                for (const auto& cam : m.per_camera) {
                    std::size_t k = 0;
                    for (auto v : cam.values())
                        k += v;
                    lo = std::min(lo, k);
                    hi = std::max(hi, k);
                }
                CHECK(hi - lo <= 1);
            }
}

TEST_CASE("subsample mask arithmetic and determinism")
{
    const SubsampleMask m = make_subsample_mask(256, 256, 25, 1.0, 3);
    CHECK(m.retained_count() == 16384);

    const SubsampleMask full = make_subsample_mask(16, 16, 4, 100.0, 3);
    for (const auto& cam : full.per_camera)
        for (auto v : cam.values())
            CHECK(v == 1);

    const SubsampleMask a = make_subsample_mask(64, 64, 9, 5.0, 11);
    const SubsampleMask b = make_subsample_mask(64, 64, 9, 5.0, 11);
    const SubsampleMask c = make_subsample_mask(64, 64, 9, 5.0, 12);
    bool differs = false;
    for (std::size_t l = 0; l < 9; ++l) {
        CHECK(a.per_camera[l] == b.per_camera[l]);
        differs = differs || a.per_camera[l] != c.per_camera[l];
    }
    CHECK(differs);

    // Camera sub-seeds do not depend on the camera count: camera 0 keeps
    // 205 pixels in both layouts and draws the same subset.
    const SubsampleMask more = make_subsample_mask(64, 64, 8, 5.0, 11);
    const SubsampleMask fewer = make_subsample_mask(64, 64, 4, 5.0, 11);
    CHECK(more.per_camera[0] == fewer.per_camera[0]);
    CHECK(more.per_camera[1] == fewer.per_camera[1]);
}

TEST_CASE("subsample configuration errors")
{
    CHECK_THROWS_AS(make_subsample_mask(16, 16, 4, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(make_subsample_mask(16, 16, 4, 101.0, 1), ConfigError);
    CHECK_THROWS_AS(make_subsample_mask(16, 16, 25, 0.1, 1), ConfigError); // 6.4 -> 6 < 25
}

TEST_CASE("noise model")
{
    const RealImage zeros(256, 256);
    CHECK(add_noise(zeros, {0.0, 4}) == zeros);
    CHECK(NoiseSpec{1.0, 0}.sigma() == 0.01);

    const RealImage noisy = add_noise(zeros, {5.0, 4});
    double s = 0.0, s2 = 0.0;
    for (double v : noisy.values()) {
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(noisy.size());
    const double sd = std::sqrt((s2 - s * s / n) / (n - 1));
    CHECK(sd >= 0.0495);
    CHECK(sd <= 0.0505);
    CHECK(add_noise(zeros, {5.0, 4}) == noisy);

    bool negative = false;
    for (double v : noisy.values())
        negative = negative || v < 0.0;
    CHECK(negative); // not clipped by default
    const RealImage clipped = add_noise(zeros, {5.0, 4, true});
    for (double v : clipped.values())
        CHECK(v >= 0.0);

    CHECK_THROWS_AS(add_noise(zeros, {-1.0, 4}), ConfigError);
}

TEST_CASE("PTYF layout and exact round trip")
{
    const auto dir = std::filesystem::temp_directory_path() / "ptych_test_field";
    std::filesystem::create_directories(dir);

    RealImage img(2, 3);
    for (std::size_t i = 0; i < img.size(); ++i)
        img[i] = 0.1 * static_cast<double>(i) - 1.0 / 3.0;
    write_ptyf(dir / "a.ptyf", img);
    std::ifstream f(dir / "a.ptyf", std::ios::binary);
    std::vector<unsigned char> bytes(std::istreambuf_iterator<char>(f), {});
    REQUIRE(bytes.size() == 16 + 6 * 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "PTYF");
    CHECK(bytes[4] == 2);
    CHECK(bytes[8] == 3);
    CHECK(bytes[12] == 0);
    CHECK(read_ptyf_real(dir / "a.ptyf") == img);

    const ComplexField field = oracle::random_field(4, 8, 2);
    write_ptyf(dir / "b.ptyf", field);
    CHECK(read_ptyf_header(dir / "b.ptyf").kind == PtyfKind::Complex);
    CHECK(read_ptyf_complex(dir / "b.ptyf") == field);
    CHECK_THROWS_AS(read_ptyf_real(dir / "b.ptyf"), IoError);

    std::ofstream(dir / "bad.ptyf") << "PTYX0000";
    CHECK_THROWS_AS(read_ptyf_real(dir / "bad.ptyf"), IoError);
}

TEST_CASE("PNG round trip of 8-bit values")
{
    const auto dir = std::filesystem::temp_directory_path() / "ptych_test_field";
    std::filesystem::create_directories(dir);
    RealImage img(16, 8);
    for (std::size_t i = 0; i < img.size(); ++i)
        img[i] = static_cast<double>((i * 37) % 256) / 255.0;
    write_png(dir / "a.png", img);
    CHECK(read_png(dir / "a.png") == img);
    CHECK_THROWS_AS(read_png(dir / "missing.png"), IoError);
}

TEST_CASE("resize by integer factor averages blocks")
{
    RealImage img(4, 4);
    for (std::size_t i = 0; i < 16; ++i)
        img[i] = static_cast<double>(i);
    const RealImage small = resize(img, 2, 2);
    CHECK(small(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK(small(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));
    CHECK(resize(img, 8, 8).height() == 8);
}

TEST_CASE("key-value parsing")
{
    const KeyValue kv = KeyValue::parse("a = 1\n# comment\nb= x, y ,z # trailing\n\nc =true\n");
    CHECK(kv.get_u64("a") == 1);
    CHECK(kv.get_strings("b", {}) == std::vector<std::string>{"x", "y", "z"});
    CHECK(kv.get_bool("c", false));
    CHECK(kv.get_double("missing", 2.5) == 2.5);
    CHECK_THROWS_AS(kv.get_double("b"), ConfigError);
    CHECK_THROWS_AS(KeyValue::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(KeyValue::parse("novalue\n"), ConfigError);
    CHECK_THROWS_AS(kv.require_known({"a", "b"}, "test"), ConfigError);

    KeyValue out;
    out.set("x", 0.1);
    CHECK(KeyValue::parse(out.serialize()).get_double("x") == 0.1);
}
