// Command-line front end. Uses only the public C API.
#include "ptych/ptych.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Image = std::unique_ptr<ptych_image, Deleter<ptych_image, ptych_image_free>>;
using Config = std::unique_ptr<ptych_config, Deleter<ptych_config, ptych_config_free>>;
using Measurements = std::unique_ptr<ptych_measurements, Deleter<ptych_measurements, ptych_measurements_free>>;
using Flow = std::unique_ptr<ptych_flow, Deleter<ptych_flow, ptych_flow_free>>;
using Result = std::unique_ptr<ptych_result, Deleter<ptych_result, ptych_result_free>>;

struct Failure {
    int code;
};

void check(ptych_status status, const char* what)
{
    if (status == PTYCH_OK)
        return;
    std::fprintf(stderr, "ptych: %s: %s (%s)\n", what, ptych_last_error(), ptych_status_name(status));
    throw Failure{kExitFailure};
}

Image load_image(const std::string& source, std::size_t size = 0)
{
    ptych_image* img = nullptr;
    check(ptych_image_load(source.c_str(), size, &img), "loading image");
    return Image(img);
}

// Truth images are matched to the estimate grid the same way simulate prepares them.
std::size_t square_side(std::size_t height, std::size_t width) { return height == width ? height : 0; }

Config load_config(const std::string& path)
{
    ptych_config* cfg = nullptr;
    if (path.empty())
        check(ptych_config_create(&cfg), "creating config");
    else
        check(ptych_config_load(path.c_str(), &cfg), "loading config");
    return Config(cfg);
}

std::string config_value(const ptych_config* cfg, const char* key)
{
    std::size_t needed = 0;
    check(ptych_config_get(cfg, key, nullptr, 0, &needed), "reading config");
    std::string value(needed, '\0');
    check(ptych_config_get(cfg, key, value.data(), value.size(), nullptr), "reading config");
    value.pop_back();
    return value;
}

void write_text(const fs::path& path, const std::string& text)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << text;
        if (!out) {
            std::fprintf(stderr, "ptych: cannot write %s\n", path.c_str());
            throw Failure{kExitFailure};
        }
    }
    fs::rename(tmp, path);
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::fprintf(stderr, "ptych: cannot create %s: %s\n", dir.c_str(), ec.message().c_str());
        throw Failure{kExitFailure};
    }
}

std::string metrics_text(double psnr, double ssim)
{
    return "psnr_db = " + fmt(psnr) + "\nssim = " + fmt(ssim) + "\n";
}

// ---- simulate ----

struct SimulateArgs {
    std::string image;
    std::size_t size = 0;
    ptych_sim_params params{};
    bool clip = false;
    std::string out;
};

int run_simulate(const SimulateArgs& a)
{
    const Image truth = load_image(a.image, a.size);
    ptych_sim_params p = a.params;
    p.clip_negative = a.clip ? 1 : 0;
    ptych_measurements* raw = nullptr;
    check(ptych_simulate(truth.get(), &p, &raw), "simulating");
    const Measurements m(raw);
    check(ptych_measurements_save(m.get(), a.out.c_str(), a.image.c_str(), truth.get()), "saving measurements");
    // Extra provenance so the set can be regenerated from the manifest alone.
    write_text(fs::path(a.out) / "simulate.txt",
               "image = " + a.image + "\nsize = " + std::to_string(a.size) + "\ngrid = " + std::to_string(p.grid) +
                   "\nradius = " + fmt(p.radius) + "\nspacing = " + fmt(p.spacing) + "\nratio = " + fmt(p.ratio) +
                   "\nnoise = " + fmt(p.noise) + "\nseed = " + std::to_string(p.seed) +
                   "\nclip_negative = " + (a.clip ? "true" : "false") + "\n");
    std::printf("simulated %zux%zu, %zu cameras, ratio %g%%, noise %g%% -> %s\n", ptych_measurements_height(m.get()),
                ptych_measurements_width(m.get()), ptych_measurements_cameras(m.get()), p.ratio, p.noise,
                a.out.c_str());
    return 0;
}

// ---- reconstruct ----

struct ReconstructArgs {
    std::string measurements;
    std::string method;
    std::string model;
    std::string config;
    std::string truth;
    std::string out;
    bool verbose = false;
};

void print_progress(std::size_t iteration, double loss, void*)
{
    std::fprintf(stderr, "iteration %zu loss %.6g\n", iteration, loss);
}

int run_reconstruct(const ReconstructArgs& a)
{
    const Config cfg = load_config(a.config);
    ptych_measurements* raw = nullptr;
    check(ptych_measurements_load(a.measurements.c_str(), &raw), "loading measurements");
    const Measurements m(raw);
    Image truth;
    if (!a.truth.empty())
        truth = load_image(a.truth, square_side(ptych_measurements_height(m.get()), ptych_measurements_width(m.get())));
    Flow flow;
    if (!a.model.empty()) {
        ptych_flow* f = nullptr;
        check(ptych_flow_load(a.model.c_str(), &f), "loading flow checkpoint");
        flow.reset(f);
    }
    ptych_result* res = nullptr;
    check(ptych_reconstruct(m.get(), a.method.c_str(), cfg.get(), truth.get(), flow.get(),
                            a.verbose ? print_progress : nullptr, nullptr, &res),
          "reconstructing");
    const Result result(res);

    const fs::path out(a.out);
    make_dir(out);
    const ptych_image* image = ptych_result_image(result.get());
    check(ptych_image_save_png(image, (out / "reconstruction.png").c_str()), "writing PNG");
    check(ptych_image_save_ptyf(image, (out / "reconstruction.ptyf").c_str()), "writing PTYF");

    std::string trace = "iteration,loss\n";
    const double* values = ptych_result_trace(result.get());
    for (std::size_t i = 0; i < ptych_result_trace_length(result.get()); ++i)
        trace += std::to_string(i) + "," + fmt(values[i]) + "\n";
    write_text(out / "loss.csv", trace);

    std::string manifest = "measurements = " + a.measurements + "\nmethod = " + a.method + "\n";
    if (!a.model.empty())
        manifest += "model = " + a.model + "\n";
    if (!a.truth.empty())
        manifest += "truth = " + a.truth + "\n";
    manifest += "best_iteration = " + std::to_string(ptych_result_best_iteration(result.get())) +
                "\nwall_time_s = " + fmt(ptych_result_wall_time(result.get())) + "\n";
    write_text(out / "run.txt", manifest);
    check(ptych_config_save(cfg.get(), (out / "config.txt").c_str()), "writing config");

    double psnr = 0.0, ssim = 0.0;
    if (ptych_result_metrics(result.get(), &psnr, &ssim)) {
        write_text(out / "metrics.txt", metrics_text(psnr, ssim));
        std::printf("%s: psnr %.2f dB, ssim %.4f, %.1f s\n", a.method.c_str(), psnr, ssim,
                    ptych_result_wall_time(result.get()));
    } else {
        std::printf("%s: done in %.1f s\n", a.method.c_str(), ptych_result_wall_time(result.get()));
    }
    return 0;
}

// ---- metrics ----

int run_metrics(const std::string& estimate, const std::string& truth_path, const std::string& out)
{
    const Image est = load_image(estimate);
    const Image truth =
        load_image(truth_path, square_side(ptych_image_height(est.get()), ptych_image_width(est.get())));
    double psnr = 0.0, ssim = 0.0;
    check(ptych_metrics(est.get(), truth.get(), &psnr, &ssim), "computing metrics");
    const std::string text = metrics_text(psnr, ssim);
    if (!out.empty())
        write_text(out, text);
    std::fputs(text.c_str(), stdout);
    return 0;
}

// ---- bench ----

void print_cell(const char* cell, int ok, std::size_t done, std::size_t total, void*)
{
    std::fprintf(stderr, "[%zu/%zu] %s %s\n", done, total, cell, ok ? "ok" : "FAILED");
}

int run_bench(const std::string& spec, const std::string& out, std::size_t threads, bool quiet)
{
    std::size_t executed = 0, failed = 0;
    check(ptych_bench_run(spec.c_str(), out.empty() ? nullptr : out.c_str(), threads, quiet ? nullptr : print_cell,
                          nullptr, &executed, &failed),
          "bench");
    std::printf("bench: %zu cells run, %zu failed\n", executed, failed);
    return failed == 0 ? 0 : kExitFailure;
}

// ---- train-flow ----

int run_train_flow(const std::string& config, const std::string& data, const std::string& out)
{
    const Config cfg = load_config(config);
    const std::size_t size = std::stoul(config_value(cfg.get(), "flow.size"));
    std::vector<Image> images;
    if (data.rfind("synthetic:", 0) == 0) {
        // synthetic:<kind>[:seed] names one image; image i uses seed + i.
        std::string base = data;
        std::uint64_t seed = 0;
        const auto colon = data.find(':', 10);
        if (colon != std::string::npos) {
            seed = std::stoull(data.substr(colon + 1));
            base = data.substr(0, colon);
        }
        const std::size_t count = std::stoul(config_value(cfg.get(), "flow.data_count"));
        for (std::size_t i = 0; i < count; ++i)
            images.push_back(load_image(base + ":" + std::to_string(seed + i), size));
    } else {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(data)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".png" || ext == ".ptyf"))
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files)
            images.push_back(load_image(f.string(), size));
    }
    if (images.empty()) {
        std::fprintf(stderr, "ptych: no training images in %s\n", data.c_str());
        return kExitFailure;
    }
    std::vector<const ptych_image*> ptrs;
    for (const Image& img : images)
        ptrs.push_back(img.get());
    ptych_flow* raw = nullptr;
    check(ptych_flow_train(cfg.get(), ptrs.data(), ptrs.size(), &raw), "training flow");
    const Flow flow(raw);
    check(ptych_flow_save(flow.get(), out.c_str()), "saving flow");
    std::string trace = "epoch,nll\n";
    const double* nll = ptych_flow_trace(flow.get());
    for (std::size_t e = 0; e < ptych_flow_trace_length(flow.get()); ++e) {
        trace += std::to_string(e) + "," + fmt(nll[e]) + "\n";
        std::printf("epoch %zu nll %.3f\n", e, nll[e]);
    }
    write_text(fs::path(out) / "nll.csv", trace);
    check(ptych_config_save(cfg.get(), (fs::path(out) / "config.txt").c_str()), "writing config");
    return 0;
}

int dump_config(const std::string& out)
{
    const Config cfg = load_config("");
    if (out.empty()) {
        std::size_t needed = 0;
        check(ptych_config_text(cfg.get(), nullptr, 0, &needed), "formatting config");
        std::string text(needed, '\0');
        check(ptych_config_text(cfg.get(), text.data(), text.size(), &needed), "formatting config");
        std::fputs(text.c_str(), stdout);
    } else {
        check(ptych_config_save(cfg.get(), out.c_str()), "writing config");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Subsampled Fourier ptychography: simulation, reconstruction and benchmarks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ptych_version());

    SimulateArgs sim;
    ptych_sim_params_default(&sim.params);
    auto* simulate = app.add_subcommand("simulate", "Simulate subsampled multi-camera measurements");
    simulate->add_option("--image", sim.image, "PNG/PTYF path or synthetic:<kind>[:seed]")->required();
    simulate->add_option("--size", sim.size, "Resize to size x size (required for synthetic images)");
    simulate->add_option("--grid", sim.params.grid, "Cameras per side")->capture_default_str();
    simulate->add_option("--radius", sim.params.radius, "Pupil radius in pixels (0: n/8)")->capture_default_str();
    simulate->add_option("--spacing", sim.params.spacing, "Pupil spacing (0: 60% overlap)")->capture_default_str();
    simulate->add_option("--ratio", sim.params.ratio, "Retained pixel percentage")->capture_default_str();
    simulate->add_option("--noise", sim.params.noise, "Noise level in percent")->capture_default_str();
    simulate->add_option("--seed", sim.params.seed, "Master seed")->capture_default_str();
    simulate->add_flag("--clip-negative", sim.clip, "Clip noisy magnitudes at zero");
    simulate->add_option("--out", sim.out, "Output directory")->required();

    ReconstructArgs rec;
    auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct an image from a measurement directory");
    reconstruct->add_option("--measurements", rec.measurements, "Measurement directory")->required();
    reconstruct->add_option("--method", rec.method, "iera, sparse, untrained or invertible")->required();
    reconstruct->add_option("--model", rec.model, "Flow checkpoint directory (invertible)");
    reconstruct->add_option("--config", rec.config, "Config file (defaults when omitted)");
    reconstruct->add_option("--truth", rec.truth, "Ground truth PNG/PTYF for metrics");
    reconstruct->add_option("--out", rec.out, "Output directory")->required();
    reconstruct->add_flag("--verbose", rec.verbose, "Print optimizer progress (untrained.log_every)");

    std::string est, truth, metrics_out;
    auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM of an estimate against ground truth");
    metrics->add_option("--estimate", est, "Estimate PNG/PTYF")->required();
    metrics->add_option("--truth", truth, "Ground truth PNG/PTYF")->required();
    metrics->add_option("--out", metrics_out, "Also write the report to this file");

    std::string spec, bench_out;
    std::size_t threads = 0;
    bool quiet = false;
    auto* bench = app.add_subcommand("bench", "Run a benchmark grid (resumable)");
    bench->add_option("--spec", spec, "Bench spec file")->required();
    bench->add_option("--out", bench_out, "Output directory (overrides bench.output_dir)");
    bench->add_option("--threads", threads, "Workers (0: PTYCH_THREADS or all cores)");
    bench->add_flag("--quiet", quiet, "No per-cell progress");

    std::string flow_config, flow_data, flow_out;
    auto* train = app.add_subcommand("train-flow", "Train a normalizing flow checkpoint");
    train->add_option("--config", flow_config, "Config file (flow.* keys)");
    train->add_option("--data", flow_data, "Directory of PNG/PTYF images or synthetic:<kind>[:seed]")->required();
    train->add_option("--out", flow_out, "Checkpoint directory")->required();

    std::string config_out;
    auto* config = app.add_subcommand("config", "Print or write the default config");
    config->add_option("--out", config_out, "Write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : kExitUsage;
    }

    try {
        if (*simulate)
            return run_simulate(sim);
        if (*reconstruct) {
            static const char* const methods[] = {"iera", "sparse", "untrained", "invertible"};
            if (std::find(std::begin(methods), std::end(methods), rec.method) == std::end(methods)) {
                std::fprintf(stderr, "ptych: unknown method '%s'\n\n%s", rec.method.c_str(),
                             reconstruct->help().c_str());
                return kExitUsage;
            }
            return run_reconstruct(rec);
        }
        if (*metrics)
            return run_metrics(est, truth, metrics_out);
        if (*bench)
            return run_bench(spec, bench_out, threads, quiet);
        if (*train)
            return run_train_flow(flow_config, flow_data, flow_out);
        if (*config)
            return dump_config(config_out);
    } catch (const Failure& f) {
        return f.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ptych: %s\n", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}
