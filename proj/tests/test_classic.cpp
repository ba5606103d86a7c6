#include <doctest.h>

#include "classic/dct.hpp"
#include "classic/iera.hpp"
#include "common/error.hpp"
#include "field/fft.hpp"
#include "metrics/metrics.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

using namespace ptych;

TEST_CASE("DCT is orthonormal")
{
    const ComplexField x = oracle::random_field(8, 16, 1);
    CHECK(oracle::max_abs_diff(idct2(dct2(x)), x) < 1e-12);
    CHECK(std::abs(oracle::norm2(dct2(x)) - oracle::norm2(x)) < 1e-12 * oracle::norm2(x));
    const RealImage basis = dct_basis(8, 8, 2, 3);
    const RealImage coeffs = dct2(basis);
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        CHECK(std::abs(coeffs[i] - (i == 2 * 8 + 3 ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("sparse projection keeps the largest coefficients")
{
    RealImage coeffs(8, 8);
    coeffs(0, 0) = 3.0;
    coeffs(1, 2) = -2.0;
    coeffs(4, 4) = 0.5;
    const ComplexField field = to_complex(idct2(coeffs));
    const RealImage kept = real_part(dct2(project_dct_sparse(field, 2)));
    CHECK(std::abs(kept(0, 0) - 3.0) < 1e-12);
    CHECK(std::abs(kept(1, 2) + 2.0) < 1e-12);
    CHECK(std::abs(kept(4, 4)) < 1e-12);
    CHECK(project_dct_sparse(field, 64) == field);
}

TEST_CASE("ground-truth initialization is a fixed point")
{
    const RealImage truth = oracle::test_pattern(64, 64);
    const MeasurementSet m = simulate(truth, SimulationParams{{3, 10.0, 12.0}, 100.0, 0.0, 1});
    IeraConfig cfg;
    cfg.epochs = 1;
    cfg.initial_spectrum = fft2(to_complex(truth));
    const ClassicResult r = iera_reconstruct(m, cfg);
    CHECK(psnr(r.image, truth) == kPsnrCapDb);
    REQUIRE(r.residual_trace.size() == 2);
    CHECK(r.residual_trace[1] <= 1e-18);
}

TEST_CASE("all-zero measurements give an all-zero reconstruction")
{
    const MeasurementSet m = simulate(RealImage(32, 32), SimulationParams{{3, 5.0, 4.0}, 50.0, 0.0, 1});
    IeraConfig cfg;
    cfg.epochs = 3;
    const ClassicResult r = iera_reconstruct(m, cfg);
    for (double v : r.image.values())
        CHECK(v == 0.0);
}

TEST_CASE("IERA residual is non-increasing under full noiseless sampling")
{
    const auto t0 = std::chrono::steady_clock::now();
    const RealImage truth = oracle::test_pattern(64, 64);
    const MeasurementSet m = simulate(truth, SimulationParams{{3, 10.0, 12.0}, 100.0, 0.0, 1});
    IeraConfig cfg;
    cfg.epochs = 100;
    const ClassicResult r = iera_reconstruct(m, cfg);
    REQUIRE(r.residual_trace.size() == 101);
    for (std::size_t e = 1; e < r.residual_trace.size(); ++e)
        CHECK(r.residual_trace[e] <= r.residual_trace[e - 1] * (1.0 + 1e-12));
    CHECK(r.residual_trace.back() <= 0.1 * r.residual_trace.front());
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::minutes(1));
}

TEST_CASE("IERA and sparse runs are deterministic")
{
    const RealImage truth = oracle::test_pattern(32, 32);
    const MeasurementSet m = simulate(truth, SimulationParams{{3, 5.0, 4.0}, 10.0, 2.0, 4});
    IeraConfig cfg;
    cfg.epochs = 5;
    cfg.init = IeraInit::Random;
    cfg.seed = 9;
    CHECK(iera_reconstruct(m, cfg).image == iera_reconstruct(m, cfg).image);

    SparseConfig s{cfg, 100};
    CHECK(sparse_reconstruct(m, s).image == sparse_reconstruct(m, s).image);
    s.sparsity = 32 * 32;
    CHECK(sparse_reconstruct(m, s).image == iera_reconstruct(m, cfg).image);
}

TEST_CASE("single DCT basis image is recovered with s = 1")
{
    // The DC basis function scaled into [0, 1].
    RealImage truth = dct_basis(32, 32, 0, 0);
    const double scale = 0.6 / truth[0];
    for (double& v : truth.values())
        v *= scale;
    const MeasurementSet m = simulate(truth, SimulationParams{{3, 5.0, 4.0}, 100.0, 0.0, 2});
    IeraConfig cfg;
    cfg.init = IeraInit::Random;
    cfg.seed = 3;
    const ClassicResult r = sparse_reconstruct(m, SparseConfig{cfg, 1});
    CHECK(psnr(r.image, truth) >= 40.0);
}

TEST_CASE("classic configuration errors")
{
    const MeasurementSet m = simulate(oracle::test_pattern(16, 16), SimulationParams{{1, 4.0, 0.0}, 100.0, 0.0, 0});
    IeraConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(iera_reconstruct(m, cfg), ConfigError);
    cfg.epochs = 1;
    CHECK_THROWS_AS(sparse_reconstruct(m, SparseConfig{cfg, 0}), ConfigError);
    CHECK_THROWS_AS(sparse_reconstruct(m, SparseConfig{cfg, 257}), ConfigError);
}

TEST_CASE("trace CSV")
{
    const auto path = std::filesystem::temp_directory_path() / "ptych_trace.csv";
    write_trace_csv(path, {2.0, 1.0});
    std::ifstream f(path);
    std::string header, first;
    std::getline(f, header);
    std::getline(f, first);
    CHECK(header == "epoch,loss");
    CHECK(first == "0,2");
}
