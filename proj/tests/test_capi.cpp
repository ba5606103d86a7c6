#include <doctest.h>

#include "ptych/ptych.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct ImageHandle {
    ptych_image* p = nullptr;
    ~ImageHandle() { ptych_image_free(p); }
};
struct ConfigHandle {
    ptych_config* p = nullptr;
    ~ConfigHandle() { ptych_config_free(p); }
};
struct MeasurementsHandle {
    ptych_measurements* p = nullptr;
    ~MeasurementsHandle() { ptych_measurements_free(p); }
};
struct ResultHandle {
    ptych_result* p = nullptr;
    ~ResultHandle() { ptych_result_free(p); }
};
struct FlowHandle {
    ptych_flow* p = nullptr;
    ~FlowHandle() { ptych_flow_free(p); }
};

std::vector<double> pixels(const ptych_image* img)
{
    const double* d = ptych_image_data(img);
    return {d, d + ptych_image_height(img) * ptych_image_width(img)};
}

std::string config_value(const ptych_config* cfg, const char* key)
{
    char buf[256];
    REQUIRE(ptych_config_get(cfg, key, buf, sizeof buf, nullptr) == PTYCH_OK);
    return buf;
}

// Full-aperture single camera, every pixel kept.
ptych_sim_params identity_params(std::size_t n)
{
    ptych_sim_params p;
    ptych_sim_params_default(&p);
    p.grid = 1;
    p.radius = static_cast<double>(n);
    p.ratio = 100.0;
    return p;
}

} // namespace

TEST_CASE("status names and NULL arguments")
{
    CHECK(std::string(ptych_version()) == "0.1.0");
    CHECK(std::string(ptych_status_name(PTYCH_OK)) == "ok");
    CHECK(std::string(ptych_status_name(PTYCH_ERR_DIVERGED)) == "diverged");
    CHECK(std::string(ptych_status_name(static_cast<ptych_status>(42))) == "unknown status");

    CHECK(ptych_image_create(4, 4, nullptr, nullptr) == PTYCH_ERR_INVALID_ARGUMENT);
    CHECK(std::string(ptych_last_error()).find("NULL") != std::string::npos);
    ImageHandle img;
    CHECK(ptych_image_create(0, 4, nullptr, &img.p) == PTYCH_ERR_INVALID_ARGUMENT);
    CHECK(img.p == nullptr);
    CHECK(ptych_metrics(nullptr, nullptr, nullptr, nullptr) == PTYCH_ERR_INVALID_ARGUMENT);
    CHECK(ptych_image_height(nullptr) == 0);
    CHECK(ptych_image_data(nullptr) == nullptr);

    // Every _free accepts NULL.
    ptych_image_free(nullptr);
    ptych_config_free(nullptr);
    ptych_measurements_free(nullptr);
    ptych_flow_free(nullptr);
    ptych_result_free(nullptr);
}

TEST_CASE("last error is per thread")
{
    ImageHandle img;
    REQUIRE(ptych_image_load("synthetic:blobs", 0, &img.p) == PTYCH_ERR_CONFIG);
    const std::string mine = ptych_last_error();
    std::string theirs;
    std::thread t([&] {
        ptych_config* cfg = nullptr;
        CHECK(ptych_config_load("/nonexistent/ptych.conf", &cfg) == PTYCH_ERR_IO);
        theirs = ptych_last_error();
    });
    t.join();
    CHECK(theirs != mine);
    CHECK(std::string(ptych_last_error()) == mine);
}

TEST_CASE("images round trip through PTYF and the data pointer")
{
    const std::vector<double> v{0.0, 0.25, 0.5, 1.0, 0.125, 0.75};
    ImageHandle img;
    REQUIRE(ptych_image_create(2, 3, v.data(), &img.p) == PTYCH_OK);
    CHECK(ptych_image_height(img.p) == 2);
    CHECK(ptych_image_width(img.p) == 3);
    CHECK(pixels(img.p) == v);

    const fs::path dir = fs::temp_directory_path() / "ptych_test_capi";
    fs::create_directories(dir);
    REQUIRE(ptych_image_save_ptyf(img.p, (dir / "a.ptyf").c_str()) == PTYCH_OK);
    ImageHandle back;
    REQUIRE(ptych_image_load((dir / "a.ptyf").c_str(), 0, &back.p) == PTYCH_OK);
    CHECK(pixels(back.p) == v);

    ImageHandle zero;
    REQUIRE(ptych_image_create(3, 2, nullptr, &zero.p) == PTYCH_OK);
    for (double x : pixels(zero.p))
        CHECK(x == 0.0);

    ImageHandle missing;
    CHECK(ptych_image_load((dir / "missing.png").c_str(), 0, &missing.p) == PTYCH_ERR_IO);
    CHECK(missing.p == nullptr);
}

TEST_CASE("config get, set, text and load")
{
    ConfigHandle cfg;
    REQUIRE(ptych_config_create(&cfg.p) == PTYCH_OK);
    CHECK(config_value(cfg.p, "iera.epochs") == "100");

    size_t needed = 0;
    REQUIRE(ptych_config_get(cfg.p, "iera.init", nullptr, 0, &needed) == PTYCH_OK);
    CHECK(needed == 5); // "flat" + NUL
    char small[2];
    CHECK(ptych_config_get(cfg.p, "iera.init", small, sizeof small, nullptr) == PTYCH_ERR_INVALID_ARGUMENT);
    CHECK(ptych_config_get(cfg.p, "no.such", small, sizeof small, nullptr) == PTYCH_ERR_CONFIG);

    REQUIRE(ptych_config_set(cfg.p, "iera.epochs", "7") == PTYCH_OK);
    CHECK(config_value(cfg.p, "iera.epochs") == "7");
    // Rejected updates leave the config untouched.
    CHECK(ptych_config_set(cfg.p, "iera.bogus", "1") == PTYCH_ERR_CONFIG);
    CHECK(ptych_config_set(cfg.p, "iera.epochs", "seven") == PTYCH_ERR_CONFIG);
    CHECK(config_value(cfg.p, "iera.epochs") == "7");

    const fs::path dir = fs::temp_directory_path() / "ptych_test_capi";
    fs::create_directories(dir);
    const fs::path path = dir / "cfg.conf";
    REQUIRE(ptych_config_save(cfg.p, path.c_str()) == PTYCH_OK);
    ConfigHandle loaded;
    REQUIRE(ptych_config_load(path.c_str(), &loaded.p) == PTYCH_OK);

    auto text = [](const ptych_config* c) {
        size_t n = 0;
        REQUIRE(ptych_config_text(c, nullptr, 0, &n) == PTYCH_OK);
        std::string s(n, '\0');
        REQUIRE(ptych_config_text(c, s.data(), s.size(), &n) == PTYCH_OK);
        s.resize(n - 1);
        return s;
    };
    CHECK(text(loaded.p) == text(cfg.p));

    // Partial files are overlaid on the defaults.
    std::ofstream(dir / "partial.conf") << "untrained.lr = 0.5\n";
    ConfigHandle partial;
    REQUIRE(ptych_config_load((dir / "partial.conf").c_str(), &partial.p) == PTYCH_OK);
    CHECK(config_value(partial.p, "untrained.lr") == "0.5");
    CHECK(config_value(partial.p, "iera.epochs") == "100");

    std::ofstream(dir / "bad.conf") << "untrained.learning_rate = 0.5\n";
    ConfigHandle bad;
    CHECK(ptych_config_load((dir / "bad.conf").c_str(), &bad.p) == PTYCH_ERR_CONFIG);
    CHECK(std::string(ptych_last_error()).find("learning_rate") != std::string::npos);
}

TEST_CASE("identity camera stores the image bit-exactly")
{
    ImageHandle truth;
    REQUIRE(ptych_image_load("synthetic:chart", 32, &truth.p) == PTYCH_OK);
    const ptych_sim_params p = identity_params(32);
    MeasurementsHandle m;
    REQUIRE(ptych_simulate(truth.p, &p, &m.p) == PTYCH_OK);
    CHECK(ptych_measurements_cameras(m.p) == 1);
    CHECK(ptych_measurements_height(m.p) == 32);

    ImageHandle y;
    REQUIRE(ptych_measurements_camera(m.p, 0, &y.p) == PTYCH_OK);
    CHECK(pixels(y.p) == pixels(truth.p));
    ImageHandle none;
    CHECK(ptych_measurements_camera(m.p, 1, &none.p) == PTYCH_ERR_INVALID_ARGUMENT);

    double loss = -1.0;
    REQUIRE(ptych_measurement_loss(truth.p, m.p, &loss) == PTYCH_OK);
    CHECK(loss < 1e-24);
}

TEST_CASE("measurement sets survive save and load")
{
    ImageHandle truth;
    REQUIRE(ptych_image_load("synthetic:blobs:3", 32, &truth.p) == PTYCH_OK);
    ptych_sim_params p;
    ptych_sim_params_default(&p);
    p.grid = 3;
    p.ratio = 30.0;
    p.noise = 2.0;
    p.seed = 11;
    MeasurementsHandle m;
    REQUIRE(ptych_simulate(truth.p, &p, &m.p) == PTYCH_OK);

    const fs::path dir = fs::temp_directory_path() / "ptych_test_capi" / "meas";
    fs::remove_all(dir);
    REQUIRE(ptych_measurements_save(m.p, dir.c_str(), "synthetic:blobs:3", truth.p) == PTYCH_OK);
    MeasurementsHandle back;
    REQUIRE(ptych_measurements_load(dir.c_str(), &back.p) == PTYCH_OK);
    REQUIRE(ptych_measurements_cameras(back.p) == 9);
    for (size_t k = 0; k < 9; ++k) {
        ImageHandle a, b;
        REQUIRE(ptych_measurements_camera(m.p, k, &a.p) == PTYCH_OK);
        REQUIRE(ptych_measurements_camera(back.p, k, &b.p) == PTYCH_OK);
        CHECK(pixels(a.p) == pixels(b.p));
    }
    double l1 = 0.0, l2 = 0.0;
    REQUIRE(ptych_measurement_loss(truth.p, m.p, &l1) == PTYCH_OK);
    REQUIRE(ptych_measurement_loss(truth.p, back.p, &l2) == PTYCH_OK);
    CHECK(l1 == l2);
    CHECK(l1 > 0.0);

    // Same parameters, same seed: identical measurements.
    MeasurementsHandle again;
    REQUIRE(ptych_simulate(truth.p, &p, &again.p) == PTYCH_OK);
    ImageHandle a, b;
    REQUIRE(ptych_measurements_camera(m.p, 4, &a.p) == PTYCH_OK);
    REQUIRE(ptych_measurements_camera(again.p, 4, &b.p) == PTYCH_OK);
    CHECK(pixels(a.p) == pixels(b.p));

    MeasurementsHandle missing;
    CHECK(ptych_measurements_load((dir / "nope").c_str(), &missing.p) == PTYCH_ERR_IO);
    ptych_sim_params bad = p;
    bad.ratio = 0.0;
    MeasurementsHandle none;
    CHECK(ptych_simulate(truth.p, &bad, &none.p) == PTYCH_ERR_CONFIG);
}

TEST_CASE("reconstruct dispatches and reports errors")
{
    ImageHandle truth;
    REQUIRE(ptych_image_load("synthetic:bars", 32, &truth.p) == PTYCH_OK);
    const ptych_sim_params p = identity_params(32);
    MeasurementsHandle m;
    REQUIRE(ptych_simulate(truth.p, &p, &m.p) == PTYCH_OK);

    ConfigHandle cfg;
    REQUIRE(ptych_config_create(&cfg.p) == PTYCH_OK);
    REQUIRE(ptych_config_set(cfg.p, "iera.epochs", "5") == PTYCH_OK);
    ResultHandle r;
    REQUIRE(ptych_reconstruct(m.p, "iera", cfg.p, truth.p, nullptr, nullptr, nullptr, &r.p) == PTYCH_OK);
    CHECK(ptych_result_trace_length(r.p) == 6);
    double psnr = 0.0, ssim = 0.0;
    REQUIRE(ptych_result_metrics(r.p, &psnr, &ssim) == 1);
    CHECK(psnr == 99.0);
    double psnr2 = 0.0, ssim2 = 0.0;
    REQUIRE(ptych_metrics(ptych_result_image(r.p), truth.p, &psnr2, &ssim2) == PTYCH_OK);
    CHECK(psnr2 == psnr);
    CHECK(ssim2 == ssim);
    CHECK(ptych_result_wall_time(r.p) >= 0.0);

    ResultHandle blind;
    REQUIRE(ptych_reconstruct(m.p, "iera", cfg.p, nullptr, nullptr, nullptr, nullptr, &blind.p) == PTYCH_OK);
    CHECK(ptych_result_metrics(blind.p, &psnr, &ssim) == 0);

    ResultHandle none;
    CHECK(ptych_reconstruct(m.p, "gerchberg", cfg.p, nullptr, nullptr, nullptr, nullptr, &none.p) ==
          PTYCH_ERR_UNKNOWN_METHOD);
    CHECK(ptych_reconstruct(m.p, "invertible", cfg.p, nullptr, nullptr, nullptr, nullptr, &none.p) ==
          PTYCH_ERR_MISSING_MODEL);
    ImageHandle wrong;
    REQUIRE(ptych_image_create(16, 16, nullptr, &wrong.p) == PTYCH_OK);
    CHECK(ptych_reconstruct(m.p, "iera", cfg.p, wrong.p, nullptr, nullptr, nullptr, &none.p) == PTYCH_ERR_DIMENSION);
    CHECK(none.p == nullptr);
}

TEST_CASE("untrained progress callback and divergence status")
{
    ImageHandle truth;
    REQUIRE(ptych_image_load("synthetic:blobs", 16, &truth.p) == PTYCH_OK);
    const ptych_sim_params p = identity_params(16);
    MeasurementsHandle m;
    REQUIRE(ptych_simulate(truth.p, &p, &m.p) == PTYCH_OK);

    ConfigHandle cfg;
    REQUIRE(ptych_config_create(&cfg.p) == PTYCH_OK);
    REQUIRE(ptych_config_set(cfg.p, "decoder.channels", "8,8,4") == PTYCH_OK);
    REQUIRE(ptych_config_set(cfg.p, "untrained.iterations", "20") == PTYCH_OK);
    REQUIRE(ptych_config_set(cfg.p, "untrained.log_every", "5") == PTYCH_OK);

    std::vector<size_t> seen;
    auto on_progress = [](size_t iteration, double loss, void* user) {
        CHECK(std::isfinite(loss));
        static_cast<std::vector<size_t>*>(user)->push_back(iteration);
    };
    ResultHandle r;
    REQUIRE(ptych_reconstruct(m.p, "untrained", cfg.p, nullptr, nullptr, on_progress, &seen, &r.p) == PTYCH_OK);
    CHECK(ptych_result_trace_length(r.p) == 20);
    CHECK_FALSE(seen.empty());
    CHECK(ptych_result_best_iteration(r.p) < 20);

    REQUIRE(ptych_config_set(cfg.p, "untrained.lr", "1e300") == PTYCH_OK);
    ResultHandle bad;
    CHECK(ptych_reconstruct(m.p, "untrained", cfg.p, nullptr, nullptr, nullptr, nullptr, &bad.p) ==
          PTYCH_ERR_DIVERGED);
}

TEST_CASE("flow train, save, load and sample")
{
    ConfigHandle cfg;
    REQUIRE(ptych_config_create(&cfg.p) == PTYCH_OK);
    REQUIRE(ptych_config_set(cfg.p, "flow.hidden", "8") == PTYCH_OK);
    REQUIRE(ptych_config_set(cfg.p, "flow.epochs", "2") == PTYCH_OK);
    REQUIRE(ptych_config_set(cfg.p, "flow.batch_size", "4") == PTYCH_OK);

    std::vector<ImageHandle> owned(12);
    std::vector<const ptych_image*> images;
    for (size_t i = 0; i < owned.size(); ++i) {
        const std::string src = "synthetic:blobs:" + std::to_string(i);
        REQUIRE(ptych_image_load(src.c_str(), 8, &owned[i].p) == PTYCH_OK);
        images.push_back(owned[i].p);
    }
    FlowHandle flow;
    REQUIRE(ptych_flow_train(cfg.p, images.data(), images.size(), &flow.p) == PTYCH_OK);
    CHECK(ptych_flow_trace_length(flow.p) == 2);

    const fs::path dir = fs::temp_directory_path() / "ptych_test_capi" / "flow";
    fs::remove_all(dir);
    REQUIRE(ptych_flow_save(flow.p, dir.c_str()) == PTYCH_OK);
    FlowHandle back;
    REQUIRE(ptych_flow_load(dir.c_str(), &back.p) == PTYCH_OK);
    CHECK(ptych_flow_trace_length(back.p) == 0);

    ImageHandle a, b;
    REQUIRE(ptych_flow_sample(flow.p, 0.7, 5, &a.p) == PTYCH_OK);
    REQUIRE(ptych_flow_sample(back.p, 0.7, 5, &b.p) == PTYCH_OK);
    CHECK(ptych_image_height(a.p) == 8);
    CHECK(pixels(a.p) == pixels(b.p));

    FlowHandle none;
    CHECK(ptych_flow_load((dir / "absent").c_str(), &none.p) == PTYCH_ERR_MISSING_MODEL);
    CHECK(ptych_flow_train(cfg.p, images.data(), 0, &none.p) == PTYCH_ERR_INVALID_ARGUMENT);
}
