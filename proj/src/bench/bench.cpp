#include "bench/bench.hpp"

#include "common/error.hpp"
#include "data/synthetic.hpp"
#include "field/io.hpp"
#include "recon/reconstruct.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

namespace ptych {

namespace {

const std::vector<std::string> kBenchKeys{"images", "size",  "ratios", "noise_levels", "noise_ratio",
                                          "methods", "seeds", "layout", "output_dir"};

std::string format_pct(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? "," : "") + format_pct(values[i]);
    return out;
}

std::string hex8(std::uint64_t v)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08llx", static_cast<unsigned long long>(v & 0xffffffffULL));
    return buf;
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string sanitize(const std::string& s)
{
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.')
            c = '_';
    return out;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string condition_label(const BenchSpec& spec, double ratio, double noise)
{
    if (spec.layout == BenchLayout::Product)
        return "r" + format_pct(ratio) + "_n" + format_pct(noise);
    return noise == 0.0 ? "ratio_" + format_pct(ratio) : "noise_" + format_pct(noise);
}

KeyValue row_record(const BenchRow& row)
{
    KeyValue kv;
    kv.set("image", row.cell.image);
    kv.set("method", std::string(method_name(row.cell.method)));
    kv.set("ratio_pct", row.cell.ratio_pct);
    kv.set("noise_pct", row.cell.noise_pct);
    kv.set("seed", row.cell.seed);
    kv.set("status", std::string(row.ok ? "ok" : "failed"));
    kv.set("psnr_db", row.psnr_db);
    kv.set("ssim", row.ssim);
    kv.set("wall_time_s", row.wall_time_s);
    if (!row.ok) {
        std::string msg = row.error;
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::replace(msg.begin(), msg.end(), '#', ' ');
        kv.set("error", msg);
    }
    return kv;
}

// A stored successful result for `cell`, if any.
std::optional<BenchRow> stored_row(const std::filesystem::path& file, const BenchCell& cell)
{
    if (!std::filesystem::exists(file))
        return std::nullopt;
    try {
        const KeyValue kv = KeyValue::load(file);
        if (kv.get_string("status", "") != "ok" || kv.get_string("image", "") != cell.image ||
            kv.get_string("method", "") != method_name(cell.method) || kv.get_double("ratio_pct") != cell.ratio_pct ||
            kv.get_double("noise_pct") != cell.noise_pct || kv.get_u64("seed") != cell.seed)
            return std::nullopt;
        BenchRow row{cell, true, kv.get_double("psnr_db"), kv.get_double("ssim"), kv.get_double("wall_time_s"), {}};
        return row;
    } catch (const Error&) {
        return std::nullopt; // unreadable: run again
    }
}

// Stored cells are only reused by a run with the same settings.
void check_resumable(const std::filesystem::path& manifest_path, const KeyValue& manifest)
{
    if (!std::filesystem::exists(manifest_path))
        return;
    auto comparable = [](KeyValue kv) {
        auto entries = kv.entries();
        entries.erase("bench.output_dir");
        return entries;
    };
    if (comparable(KeyValue::load(manifest_path)) != comparable(manifest))
        throw ConfigError("bench: " + manifest_path.parent_path().string() +
                          " holds results for different settings; use a fresh output directory");
}

BenchRow run_cell_with(const BenchSpec& spec, const BenchCell& cell, const RealImage& truth, const FlowModel* model)
{
    BenchRow row{cell, false, 0.0, 0.0, 0.0, {}};
    try {
        SimulationSettings sim = spec.simulation;
        sim.ratio = cell.ratio_pct;
        sim.noise = cell.noise_pct;
        sim.seed = cell.seed;
        const MeasurementSet m = simulate(truth, sim.resolve(truth.height(), truth.width()));
        MethodSettings settings = spec.settings;
        settings.iera.seed = cell.seed;
        settings.decoder_seed = cell.seed;
        settings.untrained.seed = cell.seed;
        settings.invertible.seed = cell.seed;
        const ReconResult r = reconstruct(m, cell.method, settings, &truth, model);
        row.ok = true;
        row.psnr_db = r.metrics->psnr_db;
        row.ssim = r.metrics->ssim;
        row.wall_time_s = r.wall_time_s;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

std::string rows_csv(const std::vector<BenchRow>& rows)
{
    std::string text = std::string(kRowsHeader) + "\n";
    for (const BenchRow& row : rows) {
        text += csv_field(image_label(row.cell.image)) + "," + method_name(row.cell.method) + "," +
                format_pct(row.cell.ratio_pct) + "," + format_pct(row.cell.noise_pct) + "," +
                std::to_string(row.cell.seed) + ",";
        if (row.ok)
            text += format_double(row.psnr_db) + "," + format_double(row.ssim) + ",";
        else
            text += "nan,nan,";
        text += format_double(row.wall_time_s) + "\n";
    }
    return text;
}

std::string aggregate_csv(const std::vector<BenchAggregate>& aggregates)
{
    std::string text = "method,ratio_pct,noise_pct,count,mean_psnr_db,mean_ssim\n";
    for (const BenchAggregate& a : aggregates)
        text += std::string(method_name(a.method)) + "," + format_pct(a.ratio_pct) + "," + format_pct(a.noise_pct) +
                "," + std::to_string(a.count) + "," + format_double(a.mean_psnr_db) + "," +
                format_double(a.mean_ssim) + "\n";
    return text;
}

// Methods x conditions, one mean per cell.
std::string table_csv(const BenchSpec& spec, const std::vector<BenchAggregate>& aggregates, bool use_ssim)
{
    const auto conditions = bench_conditions(spec);
    std::string text = "method";
    for (const auto& [ratio, noise] : conditions)
        text += "," + condition_label(spec, ratio, noise);
    text += "\n";
    for (Method method : spec.methods) {
        text += method_name(method);
        for (const auto& [ratio, noise] : conditions) {
            text += ",";
            for (const BenchAggregate& a : aggregates)
                if (a.method == method && a.ratio_pct == ratio && a.noise_pct == noise && a.count > 0) {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, use_ssim ? "%.4f" : "%.2f", use_ssim ? a.mean_ssim : a.mean_psnr_db);
                    text += buf;
                }
        }
        text += "\n";
    }
    return text;
}

std::string ssim_curves_csv(const BenchSpec& spec, const std::vector<BenchAggregate>& aggregates)
{
    std::string text = "method,sweep,ratio_pct,noise_pct,mean_ssim\n";
    for (const BenchAggregate& a : aggregates) {
        if (a.count == 0)
            continue;
        const char* sweep = spec.layout == BenchLayout::Product ? "grid" : (a.noise_pct == 0.0 ? "ratio" : "noise");
        text += std::string(method_name(a.method)) + "," + sweep + "," + format_pct(a.ratio_pct) + "," +
                format_pct(a.noise_pct) + "," + format_double(a.mean_ssim) + "\n";
    }
    return text;
}

} // namespace

std::string BenchCell::id() const
{
    return sanitize(image_label(image)) + "-" + hex8(fnv1a(image)) + "__" + method_name(method) + "__r" +
           format_pct(ratio_pct) + "__n" + format_pct(noise_pct) + "__s" + std::to_string(seed);
}

BenchSpec parse_bench_spec(const KeyValue& kv)
{
    check_config_keys(kv, {"bench"});
    kv.section("bench").require_known(kBenchKeys, "bench");
    BenchSpec spec;
    spec.images = kv.get_strings("bench.images", {});
    spec.size = kv.get_u64("bench.size", spec.size);
    spec.ratios = kv.get_doubles("bench.ratios", spec.ratios);
    spec.noise_levels = kv.get_doubles("bench.noise_levels", spec.noise_levels);
    spec.noise_ratio = kv.get_double("bench.noise_ratio", spec.noise_ratio);
    const std::string layout = kv.get_string("bench.layout", "sweeps");
    if (layout == "sweeps")
        spec.layout = BenchLayout::Sweeps;
    else if (layout == "product")
        spec.layout = BenchLayout::Product;
    else
        throw ConfigError("bench.layout: expected sweeps or product, got '" + layout + "'");
    if (kv.contains("bench.methods")) {
        spec.methods.clear();
        for (const std::string& name : kv.get_strings("bench.methods", {}))
            spec.methods.push_back(parse_method(name));
    }
    spec.seeds = kv.get_u64s("bench.seeds", spec.seeds);
    if (const auto out = kv.find("bench.output_dir"))
        spec.output_dir = *out;
    spec.simulation = parse_simulation(kv);
    spec.settings = parse_methods(kv);
    spec.source = kv;
    validate(spec);
    return spec;
}

BenchSpec load_bench_spec(const std::filesystem::path& path)
{
    return parse_bench_spec(KeyValue::load(path));
}

void validate(const BenchSpec& spec)
{
    if (spec.images.empty() || spec.methods.empty() || spec.seeds.empty() || spec.ratios.empty())
        throw ConfigError("bench: images, methods, seeds and ratios must be non-empty");
    if (spec.layout == BenchLayout::Product && spec.noise_levels.empty())
        throw ConfigError("bench: product layout needs at least one noise level");
    if (!is_power_of_two(spec.size))
        throw ConfigError("bench.size must be a power of two");
    for (double r : spec.ratios)
        if (!(r > 0.0 && r <= 100.0))
            throw ConfigError("bench.ratios must lie in (0, 100]");
    if (!(spec.noise_ratio > 0.0 && spec.noise_ratio <= 100.0))
        throw ConfigError("bench.noise_ratio must lie in (0, 100]");
    for (double q : spec.noise_levels) {
        if (!(q >= 0.0))
            throw ConfigError("bench.noise_levels must be non-negative");
        if (spec.layout == BenchLayout::Sweeps && q == 0.0)
            throw ConfigError("bench.noise_levels must be positive in the sweeps layout (the ratio sweep is noise-free)");
    }
}

KeyValue bench_spec_config(const BenchSpec& spec)
{
    KeyValue kv = default_config();
    kv.merge(spec.source);
    std::vector<std::string> methods;
    std::string images, method_list, seeds;
    for (std::size_t i = 0; i < spec.images.size(); ++i)
        images += (i ? "," : "") + spec.images[i];
    for (std::size_t i = 0; i < spec.methods.size(); ++i)
        method_list += std::string(i ? "," : "") + method_name(spec.methods[i]);
    for (std::size_t i = 0; i < spec.seeds.size(); ++i)
        seeds += (i ? "," : "") + std::to_string(spec.seeds[i]);
    kv.set("bench.images", images);
    kv.set("bench.size", static_cast<std::uint64_t>(spec.size));
    kv.set("bench.ratios", join_doubles(spec.ratios));
    kv.set("bench.noise_levels", join_doubles(spec.noise_levels));
    kv.set("bench.noise_ratio", spec.noise_ratio);
    kv.set("bench.layout", std::string(spec.layout == BenchLayout::Sweeps ? "sweeps" : "product"));
    kv.set("bench.methods", method_list);
    kv.set("bench.seeds", seeds);
    if (!spec.output_dir.empty())
        kv.set("bench.output_dir", spec.output_dir.string());
    return kv;
}

std::vector<std::pair<double, double>> bench_conditions(const BenchSpec& spec)
{
    std::vector<std::pair<double, double>> out;
    if (spec.layout == BenchLayout::Product) {
        for (double r : spec.ratios)
            for (double q : spec.noise_levels)
                out.emplace_back(r, q);
        return out;
    }
    for (double r : spec.ratios)
        out.emplace_back(r, 0.0);
    for (double q : spec.noise_levels)
        out.emplace_back(spec.noise_ratio, q);
    return out;
}

std::vector<BenchCell> bench_cells(const BenchSpec& spec)
{
    std::vector<BenchCell> cells;
    const auto conditions = bench_conditions(spec);
    for (const std::string& image : spec.images)
        for (Method method : spec.methods)
            for (const auto& [ratio, noise] : conditions)
                for (std::uint64_t seed : spec.seeds)
                    cells.push_back({image, method, ratio, noise, seed});
    return cells;
}

BenchRow run_cell(const BenchSpec& spec, const BenchCell& cell)
{
    try {
        const RealImage truth = load_test_image(cell.image, spec.size);
        return run_cell_with(spec, cell, truth, nullptr);
    } catch (const std::exception& e) {
        return BenchRow{cell, false, 0.0, 0.0, 0.0, e.what()};
    }
}

std::vector<BenchAggregate> aggregate_rows(const BenchSpec& spec, const std::vector<BenchRow>& rows)
{
    std::vector<BenchAggregate> out;
    for (Method method : spec.methods)
        for (const auto& [ratio, noise] : bench_conditions(spec)) {
            BenchAggregate a{method, ratio, noise, 0, 0.0, 0.0};
            double psnr_sum = 0.0, ssim_sum = 0.0;
            for (const BenchRow& row : rows)
                if (row.ok && row.cell.method == method && row.cell.ratio_pct == ratio && row.cell.noise_pct == noise) {
                    ++a.count;
                    psnr_sum += row.psnr_db;
                    ssim_sum += row.ssim;
                }
            if (a.count > 0) {
                a.mean_psnr_db = psnr_sum / static_cast<double>(a.count);
                a.mean_ssim = ssim_sum / static_cast<double>(a.count);
            }
            out.push_back(a);
        }
    return out;
}

std::size_t default_thread_count()
{
    if (const char* env = std::getenv("PTYCH_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

BenchReport run_bench(const BenchSpec& spec, std::size_t threads, const BenchProgress& progress)
{
    validate(spec);
    if (spec.output_dir.empty())
        throw ConfigError("bench: output directory not set");
    const std::filesystem::path cell_dir = spec.output_dir / "cells";
    const KeyValue manifest = bench_spec_config(spec);
    check_resumable(spec.output_dir / "manifest.txt", manifest);
    std::filesystem::create_directories(cell_dir);
    write_text_atomic(spec.output_dir / "manifest.txt", manifest.serialize());

    const std::vector<BenchCell> cells = bench_cells(spec);
    BenchReport report;
    report.rows.resize(cells.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (auto row = stored_row(cell_dir / (cells[i].id() + ".txt"), cells[i]))
            report.rows[i] = *row;
        else
            pending.push_back(i);
    }

    // Inputs shared read-only by the workers.
    std::map<std::string, RealImage> truths;
    std::map<std::string, std::string> load_errors;
    for (std::size_t i : pending)
        if (!truths.count(cells[i].image) && !load_errors.count(cells[i].image)) {
            try {
                truths.emplace(cells[i].image, load_test_image(cells[i].image, spec.size));
            } catch (const std::exception& e) {
                load_errors.emplace(cells[i].image, e.what());
            }
        }
    std::optional<FlowModel> model;
    std::string model_error;
    const bool needs_model = std::any_of(pending.begin(), pending.end(),
                                         [&](std::size_t i) { return cells[i].method == Method::Invertible; });
    if (needs_model && !spec.settings.model_dir.empty()) {
        try {
            model.emplace(load_flow(spec.settings.model_dir));
        } catch (const std::exception& e) {
            model_error = e.what();
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::size_t done = cells.size() - pending.size();
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size())
                return;
            const BenchCell& cell = cells[pending[k]];
            BenchRow row;
            if (auto err = load_errors.find(cell.image); err != load_errors.end())
                row = BenchRow{cell, false, 0.0, 0.0, 0.0, err->second};
            else if (cell.method == Method::Invertible && !model_error.empty())
                row = BenchRow{cell, false, 0.0, 0.0, 0.0, model_error};
            else
                row = run_cell_with(spec, cell, truths.at(cell.image), model ? &*model : nullptr);
            write_text_atomic(cell_dir / (cell.id() + ".txt"), row_record(row).serialize());
            std::lock_guard lock(mutex);
            report.rows[pending[k]] = row;
            ++done;
            if (progress)
                progress(row, done, cells.size());
        }
    };
    const std::size_t count = std::min(threads == 0 ? default_thread_count() : threads, pending.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (std::thread& t : pool)
        t.join();

    report.executed = pending.size();
    for (const BenchRow& row : report.rows)
        report.failed += row.ok ? 0 : 1;
    report.aggregates = aggregate_rows(spec, report.rows);

    write_text_atomic(spec.output_dir / "rows.csv", rows_csv(report.rows));
    write_text_atomic(spec.output_dir / "aggregate.csv", aggregate_csv(report.aggregates));
    write_text_atomic(spec.output_dir / "table_psnr.csv", table_csv(spec, report.aggregates, false));
    write_text_atomic(spec.output_dir / "table_ssim.csv", table_csv(spec, report.aggregates, true));
    write_text_atomic(spec.output_dir / "ssim_curves.csv", ssim_curves_csv(spec, report.aggregates));
    return report;
}

} // namespace ptych
