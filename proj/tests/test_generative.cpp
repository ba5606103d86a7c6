#include <doctest.h>

#include "autodiff/measurement_graph.hpp"
#include "autodiff/ops.hpp"
#include "classic/iera.hpp"
#include "common/error.hpp"
#include "data/synthetic.hpp"
#include "fd_check.hpp"
#include "generative/invertible.hpp"
#include "generative/untrained.hpp"
#include "recon/reconstruct.hpp"

#include <algorithm>
#include <cmath>

using namespace ptych;

namespace {

MeasurementSet identity_measurements(const RealImage& x)
{
    const std::size_t n = x.height();
    const CameraArray array = make_camera_array(n, n, {1, static_cast<double>(n), 0.0});
    return forward_measure(x, array, make_subsample_mask(n, n, 1, 100.0, 0), NoiseSpec{});
}

FlowModel toy_flow(std::size_t side, std::uint64_t seed)
{
    FlowConfig cfg;
    cfg.levels = 2;
    cfg.steps = 2;
    cfg.height = side;
    cfg.width = side;
    cfg.hidden = 8;
    cfg.seed = seed;
    FlowModel model(cfg);
    initialize_actnorm(model, blob_dataset(64, side, side, seed));
    Rng rng(seed + 1);
    for (std::size_t i = 0; i < model.parameters().size(); ++i)
        for (double& v : model.parameters()[i].value)
            v += rng.normal(0.0, 0.05);
    return model;
}

GenReconConfig short_run(std::size_t iterations, double lr)
{
    GenReconConfig cfg;
    cfg.iterations = iterations;
    cfg.lr = lr;
    return cfg;
}

} // namespace

TEST_CASE("untrained decoder fits a clean blob through the identity camera")
{
    Rng rng(21);
    const RealImage truth = blob_image(64, 64, rng);
    const MeasurementSet m = identity_measurements(truth);
    const DecoderConfig dcfg = default_decoder_config(64, 64, {32, 32, 32, 16});
    const ReconResult r = untrained_ptych(m, dcfg, short_run(2000, 0.01), &truth);
    REQUIRE(r.metrics);
    INFO("psnr " << r.metrics->psnr_db);
    CHECK(r.metrics->psnr_db >= 30.0);
    CHECK(r.loss_trace.size() == 2000);
}

TEST_CASE("untrained result keeps the best iterate and is deterministic")
{
    const RealImage truth = synthetic_image("synthetic:scene:3", 16, 16);
    const MeasurementSet m = simulate(truth, SimulationParams{{3, 3.0, 2.5}, 40.0, 2.0, 4});
    const DecoderConfig dcfg = default_decoder_config(16, 16, {8, 8, 8});
    const ReconResult a = untrained_ptych(m, dcfg, short_run(60, 0.02), &truth);
    const ReconResult b = untrained_ptych(m, dcfg, short_run(60, 0.02), &truth);
    CHECK(a.image == b.image);
    CHECK(a.loss_trace == b.loss_trace);
    const auto best = std::min_element(a.loss_trace.begin(), a.loss_trace.end());
    CHECK(*best <= a.loss_trace.front());
    CHECK(a.best_iteration == static_cast<std::size_t>(best - a.loss_trace.begin()));
    for (double v : a.image.values())
        CHECK((v >= 0.0 && v <= 1.0));
    // The best image reproduces the best recorded loss (before clamping it is exact).
    CHECK(measurement_loss(a.image, m) >= 0.0);

    CHECK_THROWS_AS(untrained_ptych(m, default_decoder_config(32, 32, {8}), short_run(1, 0.01)), DimensionError);
}

TEST_CASE("invertible solver recovers an in-range target")
{
    const FlowModel model = toy_flow(16, 3);
    const RealImage target = flow_sample(model, 0.7, 99);
    const MeasurementSet m = simulate(target, default_simulation(16, 16));
    const ReconResult r = invertible_ptych(m, model, short_run(3000, 0.05));
    const double best = *std::min_element(r.loss_trace.begin(), r.loss_trace.end());
    INFO("best " << best << " energy " << m.energy());
    CHECK(best < 1e-4 * m.energy());
}

TEST_CASE("invertible zero init starts at the decoded origin")
{
    const FlowModel model = toy_flow(8, 5);
    const RealImage truth = blob_dataset(1, 8, 8, 50)[0];
    const MeasurementSet m = identity_measurements(truth);
    const ReconResult r = invertible_ptych(m, model, short_run(1, 0.05));
    CHECK(r.image == clamp(model.decode(std::vector<double>(model.latent_size(), 0.0)), 0.0, 1.0));
    CHECK(r.loss_trace.front() == doctest::Approx(measurement_loss(model.decode(std::vector<double>(64, 0.0)), m)).epsilon(1e-12));

    GenReconConfig g = short_run(20, 0.05);
    g.latent_init = LatentInit::Gaussian;
    g.seed = 8;
    const ReconResult a = invertible_ptych(m, model, g), b = invertible_ptych(m, model, g);
    CHECK(a.image == b.image);
    CHECK(a.loss_trace == b.loss_trace);
    CHECK_THROWS_AS(invertible_ptych(simulate(blob_dataset(1, 16, 16, 1)[0], default_simulation(16, 16)), model,
                                     short_run(1, 0.05)),
                    DimensionError);
}

TEST_CASE("latent gradient of the measurement loss matches finite differences")
{
    const FlowModel model = toy_flow(8, 7);
    const RealImage truth = blob_dataset(1, 8, 8, 60)[0];
    const MeasurementSet m = simulate(truth, SimulationParams{{3, 1.5, 1.0}, 50.0, 0.0, 2});
    const oracle::GraphFn fn = [&](ad::Tape& tape, const std::vector<ad::Tensor>& in) {
        const auto weights = ad::bind(tape, model.parameters(), false);
        return ad::measurement_loss(ad::reshape(model.inverse(tape, weights, in[0]), {8, 8}), m);
    };
    Rng rng(12);
    for (std::uint64_t s = 0; s < 6; ++s) {
        const auto r = oracle::directional_check(fn, {{1, 64}}, {oracle::random_values(64, rng, -0.5, 0.5)}, s);
        CHECK(r.rel_error < 1e-4);
    }
}

TEST_CASE("reconstruct dispatch")
{
    const RealImage truth = synthetic_image("synthetic:chart", 32, 32);
    const MeasurementSet m = simulate(truth, SimulationParams{{3, 6.0, 4.5}, 30.0, 1.0, 5});
    MethodSettings settings;
    settings.iera.epochs = 10;

    const ReconResult r = reconstruct(m, Method::Iera, settings, &truth);
    const ClassicResult direct = iera_reconstruct(m, settings.iera);
    CHECK(r.image == direct.image);
    CHECK(r.loss_trace == direct.residual_trace);
    REQUIRE(r.metrics);
    CHECK(r.metrics->psnr_db == psnr(r.image, truth));
    CHECK(r.metrics->ssim == ssim(r.image, truth));

    const ReconResult s = reconstruct(m, Method::Sparse, settings, &truth);
    CHECK(s.image == sparse_reconstruct(m, settings.sparse_for(32, 32)).image);
    CHECK(settings.sparse_for(32, 32).sparsity == 102);

    settings.untrained.iterations = 5;
    settings.decoder_channels = {8, 8, 8};
    const ReconResult u = reconstruct(m, Method::Untrained, settings, &truth);
    CHECK(u.metrics->psnr_db == psnr(u.image, truth));

    CHECK_THROWS_AS(reconstruct(m, Method::Invertible, settings), MissingModelError);
    settings.model_dir = "/nonexistent/flow";
    CHECK_THROWS_AS(reconstruct(m, Method::Invertible, settings), MissingModelError);
    CHECK_THROWS_AS(parse_method("gan"), UnknownMethodError);
    for (Method method : {Method::Iera, Method::Sparse, Method::Untrained, Method::Invertible})
        CHECK(parse_method(method_name(method)) == method);
}

TEST_CASE("config defaults round trip")
{
    const KeyValue kv = default_config();
    check_config_keys(kv);
    const MethodSettings s = parse_methods(kv);
    CHECK(s.iera.epochs == 100);
    CHECK(s.untrained.iterations == 5000);
    CHECK(s.untrained.lr == 0.01);
    CHECK(s.invertible.iterations == 3000);
    CHECK(s.invertible.lr == 0.05);
    CHECK(s.invertible.latent_penalty == 0.0);
    CHECK(s.decoder_channels == kDefaultDecoderChannels);
    CHECK_FALSE(s.decoder_skip);
    const FlowConfig f = parse_flow(kv);
    CHECK(f.levels == 2);
    CHECK(f.steps == 4);

    const SimulationParams p = parse_simulation(kv).resolve(128, 128);
    const SimulationParams d = default_simulation(128, 128);
    CHECK(p.geometry.grid_size == d.geometry.grid_size);
    CHECK(p.geometry.radius == d.geometry.radius);
    CHECK(p.geometry.spacing == d.geometry.spacing);

    KeyValue bad = kv;
    bad.set("untrained.iteratoins", std::uint64_t{3});
    CHECK_THROWS_AS(check_config_keys(bad), ConfigError);
    check_config_keys(bad, {"untrained"});
    bad = kv;
    bad.set("invertible.latent_init", std::string("uniform"));
    CHECK_THROWS_AS(parse_methods(bad), ConfigError);
}

TEST_CASE("synthetic images are deterministic and in range")
{
    for (const char* name : {"synthetic:blobs:4", "synthetic:bars", "synthetic:chart", "synthetic:scene:2"}) {
        const RealImage a = synthetic_image(name, 32, 32), b = synthetic_image(name, 32, 32);
        CHECK(a == b);
        CHECK(a.height() == 32);
        const auto [lo, hi] = std::minmax_element(a.values().begin(), a.values().end());
        CHECK(*lo >= 0.0);
        CHECK(*hi <= 1.0);
        CHECK(*hi > *lo);
        CHECK(is_synthetic_name(name));
    }
    CHECK(synthetic_image("synthetic:blobs:4", 32, 32) != synthetic_image("synthetic:blobs:5", 32, 32));
    CHECK_FALSE(is_synthetic_name("cameraman.png"));
    CHECK_THROWS_AS(synthetic_image("synthetic:unicorn", 32, 32), ConfigError);
    CHECK(blob_dataset(5, 8, 8, 1) == blob_dataset(5, 8, 8, 1));
}
