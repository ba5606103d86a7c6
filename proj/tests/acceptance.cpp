// Acceptance report: one PASS/FAIL/SKIP line per criterion. Exits 0 once the
// report is complete; --strict turns any FAIL into a nonzero exit.

#include "bench/bench.hpp"
#include "classic/iera.hpp"
#include "common/error.hpp"
#include "common/keyvalue.hpp"
#include "data/synthetic.hpp"
#include "field/fft.hpp"
#include "generative/flow.hpp"
#include "generative/invertible.hpp"
#include "metrics/metrics.hpp"
#include "recon/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ptych;
namespace fs = std::filesystem;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format(const char* fmt, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty())
            out.push_back(item);
    return out;
}

// Fetched PNGs in name order, or the synthetic set when none are present.
std::vector<std::string> standard_images(const fs::path& dir, std::size_t count)
{
    std::vector<std::string> found;
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".png")
                found.push_back(e.path().string());
    std::sort(found.begin(), found.end());
    if (found.size() < count)
        found = {"synthetic:scene", "synthetic:chart", "synthetic:bars", "synthetic:blobs"};
    found.resize(std::min(count, found.size()));
    return found;
}

std::string labels(const std::vector<std::string>& images)
{
    std::string out;
    for (const auto& im : images)
        out += (out.empty() ? "" : ",") + image_label(im);
    return out;
}

struct Context {
    fs::path source_dir;
    fs::path data_dir;
    fs::path bench_dir;
    bool run_bench = false;
};

// ---- 1 ----

Outcome criterion_suites(const Context&)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::string failed;
    const auto suites = split(PTYCH_SUITES, ';');
    for (const std::string& exe : suites) {
        const std::string cmd = exe + " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0)
            failed += " " + fs::path(exe).filename().string();
    }
    const double t = seconds_since(t0);
    const bool ok = failed.empty() && t < 300.0;
    return {ok ? Verdict::Pass : Verdict::Fail,
            format("%zu suites in %.0f s (limit 300 s)%s%s", suites.size(), t, failed.empty() ? "" : "; failing:",
                   failed.c_str())};
}

// ---- 2 ----

Outcome criterion_iera_sanity(const Context& ctx)
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::string source = standard_images(ctx.data_dir, 1).front();
    const RealImage truth = load_test_image(source, 64);
    SimulationParams p = default_simulation(64, 64);
    p.geometry.grid_size = 3;
    p.ratio = 100.0;
    const MeasurementSet m = simulate(truth, p);

    const ClassicResult r = iera_reconstruct(m, IeraConfig{});
    const auto& trace = r.residual_trace;
    std::size_t increases = 0;
    for (std::size_t e = 1; e < trace.size(); ++e)
        increases += trace[e] > trace[e - 1] * (1.0 + 1e-12);
    const double ratio = trace.back() / trace.front();

    IeraConfig fixed;
    fixed.initial_spectrum = fft2(to_complex(truth));
    const double fixed_psnr = psnr(iera_reconstruct(m, fixed).image, truth);

    const double t = seconds_since(t0);
    const bool ok = increases == 0 && ratio <= 0.1 && fixed_psnr >= 99.0 && t < 60.0;
    return {ok ? Verdict::Pass : Verdict::Fail,
            format("%s 64x64 g=3: %zu trace increases, final/initial residual %.3g, truth-init PSNR %.2f dB, %.1f s",
                   image_label(source).c_str(), increases, ratio, fixed_psnr, t)};
}

// ---- 3, 4 ----

BenchSpec full_grid_spec(const Context& ctx, const std::vector<std::string>& images)
{
    KeyValue kv = KeyValue::load(ctx.source_dir / "configs" / "bench_full.conf");
    std::string list;
    for (const auto& im : images)
        list += (list.empty() ? "" : ",") + im;
    kv.set("bench.images", list);
    return parse_bench_spec(kv);
}

struct Comparison {
    std::vector<BenchRow> iera, untrained;
    double seconds = 0.0;
};

Comparison compare_methods(const BenchSpec& spec, double ratio, double noise)
{
    const auto t0 = std::chrono::steady_clock::now();
    Comparison c;
    for (const std::string& image : spec.images) {
        c.iera.push_back(run_cell(spec, {image, Method::Iera, ratio, noise, 0}));
        c.untrained.push_back(run_cell(spec, {image, Method::Untrained, ratio, noise, 0}));
        for (const BenchRow* row : {&c.iera.back(), &c.untrained.back()})
            if (!row->ok)
                throw NumericError(row->cell.id() + ": " + row->error);
        std::printf("    %s: iera %.2f dB / %.4f, untrained %.2f dB / %.4f\n", image_label(image).c_str(),
                    c.iera.back().psnr_db, c.iera.back().ssim, c.untrained.back().psnr_db, c.untrained.back().ssim);
        std::fflush(stdout);
    }
    c.seconds = seconds_since(t0);
    return c;
}

double mean_psnr(const std::vector<BenchRow>& rows)
{
    double s = 0.0;
    for (const auto& r : rows)
        s += r.psnr_db;
    return s / static_cast<double>(rows.size());
}

Outcome criterion_subsampling(const Context& ctx)
{
    const auto images = standard_images(ctx.data_dir, 3);
    const Comparison c = compare_methods(full_grid_spec(ctx, images), 2.0, 0.0);
    const double iera = mean_psnr(c.iera), untrained = mean_psnr(c.untrained);
    const bool ok = untrained - iera >= 8.0 && c.seconds <= 1800.0;
    return {ok ? Verdict::Pass : Verdict::Fail,
            format("%s 128x128 g=5 ratio 2%%: untrained %.2f dB - iera %.2f dB = %+.2f dB (need >= 8), %.0f s",
                   labels(images).c_str(), untrained, iera, untrained - iera, c.seconds)};
}

Outcome criterion_noise(const Context& ctx)
{
    const auto images = standard_images(ctx.data_dir, 3);
    const Comparison c = compare_methods(full_grid_spec(ctx, images), 20.0, 5.0);
    const double iera = mean_psnr(c.iera), untrained = mean_psnr(c.untrained);
    std::size_t ssim_wins = 0;
    for (std::size_t i = 0; i < images.size(); ++i)
        ssim_wins += c.untrained[i].ssim > c.iera[i].ssim;
    const bool ok = untrained - iera >= 10.0 && ssim_wins == images.size();
    return {ok ? Verdict::Pass : Verdict::Fail,
            format("%s ratio 20%% noise 5%%: untrained %.2f dB - iera %.2f dB = %+.2f dB (need >= 10); "
                   "untrained SSIM higher on %zu/%zu images, %.0f s",
                   labels(images).c_str(), untrained, iera, untrained - iera, ssim_wins, images.size(), c.seconds)};
}

// ---- 5 ----

struct ToyFlow {
    std::optional<FlowModel> model;
    FlowTrainResult training;
    GenReconConfig inversion;
    std::size_t size = 16;
    std::string error;
};

ToyFlow& toy_flow(const Context& ctx)
{
    static ToyFlow toy;
    if (toy.model || !toy.error.empty())
        return toy;
    try {
        KeyValue kv = default_config();
        kv.merge(KeyValue::load(ctx.source_dir / "configs" / "flow_toy.conf"));
        FlowConfig cfg = parse_flow(kv);
        toy.size = kv.get_u64("flow.size");
        cfg.height = cfg.width = toy.size;
        toy.inversion = parse_methods(kv).invertible;
        std::vector<RealImage> data;
        for (std::size_t i = 0; i < kv.get_u64("flow.data_count"); ++i)
            data.push_back(synthetic_image("synthetic:blobs:" + std::to_string(i), toy.size, toy.size));
        toy.model.emplace(cfg);
        toy.training = train_flow(*toy.model, data);
    } catch (const std::exception& e) {
        toy.error = e.what();
    }
    return toy;
}

Outcome criterion_flow_training(const Context& ctx)
{
    const ToyFlow& toy = toy_flow(ctx);
    if (!toy.model)
        return {Verdict::Fail, "training failed: " + toy.error};
    const auto& nll = toy.training.nll_trace;
    const FlowConfig& cfg = toy.model->config();
    const bool ok = nll.back() < nll.front() && toy.training.wall_time_s < 900.0;
    return {ok ? Verdict::Pass : Verdict::Fail,
            format("%zux%zu levels=%zu K=%zu, 500 images, %zu epochs: NLL %.1f -> %.1f nats, %.0f s (limit 900 s)",
                   cfg.height, cfg.width, cfg.levels, cfg.steps, nll.size(), nll.front(), nll.back(),
                   toy.training.wall_time_s)};
}

Outcome criterion_flow_inversion(const Context& ctx)
{
    const ToyFlow& toy = toy_flow(ctx);
    if (!toy.model)
        return {Verdict::Fail, "no trained flow: " + toy.error};
    const RealImage target = flow_sample(*toy.model, 0.7, 2024);
    SimulationParams p = default_simulation(toy.size, toy.size);
    p.ratio = 100.0;
    const MeasurementSet m = simulate(target, p);
    double energy = 0.0;
    for (const RealImage& y : m.y)
        for (double v : y.values())
            energy += v * v;
    const ReconResult r = invertible_ptych(m, *toy.model, toy.inversion);
    const double best = *std::min_element(r.loss_trace.begin(), r.loss_trace.end());
    const bool ok = best < 1e-4 * energy;
    return {ok ? Verdict::Pass : Verdict::Fail,
            format("flow sample (T=0.7), full noiseless measurements: best loss %.3g vs 1e-4 * sum|y|^2 = %.3g, "
                   "%zu iterations",
                   best, 1e-4 * energy, r.loss_trace.size())};
}

Outcome criterion_flow_advantage(const Context& ctx)
{
    const ToyFlow& toy = toy_flow(ctx);
    if (!toy.model)
        return {Verdict::Fail, "no trained flow: " + toy.error};
    const std::size_t count = 10;
    double iera = 0.0, inv = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        // Held out: training used seeds 0 .. data_count - 1.
        const RealImage truth = synthetic_image("synthetic:blobs:" + std::to_string(100000 + i), toy.size, toy.size);
        SimulationParams p = default_simulation(toy.size, toy.size);
        p.ratio = 5.0;
        p.seed = i;
        const MeasurementSet m = simulate(truth, p);
        iera += psnr(iera_reconstruct(m, IeraConfig{}).image, truth);
        inv += invertible_ptych(m, *toy.model, toy.inversion, &truth).metrics->psnr_db;
    }
    iera /= count;
    inv /= count;
    const bool ok = inv - iera >= 5.0;
    return {ok ? Verdict::Pass : Verdict::Fail,
            format("%zu held-out blobs at ratio 5%%: invertible %.2f dB - iera %.2f dB = %+.2f dB (need >= 5)", count,
                   inv, iera, inv - iera)};
}

// ---- 6 ----

Outcome criterion_bench(const Context& ctx)
{
    const fs::path spec_path = ctx.source_dir / "configs" / "bench_full.conf";
    BenchSpec spec = load_bench_spec(spec_path);
    spec.output_dir = ctx.bench_dir;
    if (ctx.run_bench) {
        const fs::path cwd = fs::current_path();
        fs::current_path(ctx.source_dir); // image paths are relative to the repository
        run_bench(spec, 0, [](const BenchRow& row, std::size_t done, std::size_t total) {
            std::printf("    [%zu/%zu] %s %s\n", done, total, row.cell.id().c_str(), row.ok ? "ok" : "FAILED");
            std::fflush(stdout);
        });
        fs::current_path(cwd);
    }
    if (!fs::exists(spec.output_dir / "rows.csv"))
        return {Verdict::Skip, "no bench output in " + spec.output_dir.string() +
                                   "; run `ptych bench --spec configs/bench_full.conf` (about 3 h)"};

    // Resuming a complete run must execute nothing and leave the rows intact.
    auto read = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string rows_before = read(spec.output_dir / "rows.csv");
    const BenchReport report = run_bench(spec, 1);
    const bool resumed = report.executed == 0 && read(spec.output_dir / "rows.csv") == rows_before;

    double cpu = 0.0;
    for (const BenchRow& row : report.rows)
        cpu += row.wall_time_s;
    std::set<std::string> images;
    for (const BenchRow& row : report.rows)
        images.insert(row.cell.image);
    const auto table = split(read(spec.output_dir / "table_psnr.csv"), '\n');
    const auto curves = split(read(spec.output_dir / "ssim_curves.csv"), '\n');
    const bool shaped = table.size() == 1 + spec.methods.size() && split(table[0], ',').size() == 11 &&
                        curves.size() == 1 + spec.methods.size() * 10;
    const bool ok = report.failed == 0 && report.rows.size() == 150 && images.size() == 5 && spec.size == 128 &&
                    shaped && resumed && cpu <= 4 * 3600.0;
    return {ok ? Verdict::Pass : Verdict::Fail,
            format("%zu cells (%zu failed), %zu images at %zux%zu, table %zux%zu, %zu SSIM points, "
                   "resume ran %zu cells, %.2f h of solver time",
                   report.rows.size(), report.failed, images.size(), spec.size, spec.size, table.size() - 1,
                   table.empty() ? 0 : split(table[0], ',').size() - 1, curves.size() - 1, report.executed,
                   cpu / 3600.0)};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance report"};
    Context ctx;
    ctx.source_dir = PTYCH_SOURCE_DIR;
    std::string only;
    bool strict = false;
    app.add_option("--only", only, "Comma-separated criteria, e.g. 2,5a");
    app.add_flag("--strict", strict, "Exit nonzero when any criterion fails");
    app.add_option("--data", ctx.data_dir, "Directory of standard test PNGs");
    app.add_option("--bench-dir", ctx.bench_dir, "Output directory of the full bench run");
    app.add_flag("--run-bench", ctx.run_bench, "Run (or resume) the full bench before checking it");
    CLI11_PARSE(app, argc, argv);
    if (ctx.data_dir.empty())
        ctx.data_dir = ctx.source_dir / "data" / "images";
    if (ctx.bench_dir.empty())
        ctx.bench_dir = ctx.source_dir / "results" / "bench_full";

    const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
        {"1", criterion_suites},         {"2", criterion_iera_sanity},      {"3", criterion_subsampling},
        {"4", criterion_noise},          {"5a", criterion_flow_training},   {"5b", criterion_flow_inversion},
        {"5c", criterion_flow_advantage}, {"6", criterion_bench},
    };
    const auto selected = split(only, ',');
    std::size_t failures = 0;
    for (const auto& [id, check] : criteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end())
            continue;
        std::printf("criterion %s: running\n", id.c_str());
        std::fflush(stdout);
        Outcome o;
        try {
            o = check(ctx);
        } catch (const std::exception& e) {
            o = {Verdict::Fail, std::string("error: ") + e.what()};
        }
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        failures += o.verdict == Verdict::Fail;
        std::printf("%s criterion %s: %s\n", tag, id.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %zu failing\n", failures);
    return strict && failures > 0 ? 1 : 0;
}
