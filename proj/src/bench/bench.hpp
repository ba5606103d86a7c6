#pragma once

#include "common/keyvalue.hpp"
#include "recon/config.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ptych {

enum class BenchLayout {
    Sweeps,  // ratios at noise 0, then noise_levels at noise_ratio
    Product, // every (ratio, noise) pair
};

// Grid of (image, method, ratio, noise, seed) cells.
struct BenchSpec {
    std::vector<std::string> images; // paths or synthetic names
    std::size_t size = 128;
    std::vector<double> ratios{1, 2, 3, 5, 10};
    std::vector<double> noise_levels{1, 2.5, 5, 7.5, 10};
    double noise_ratio = 20.0;
    BenchLayout layout = BenchLayout::Sweeps;
    std::vector<Method> methods{Method::Iera, Method::Sparse, Method::Untrained};
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path output_dir;
    SimulationSettings simulation; // ratio, noise and seed are set per cell
    MethodSettings settings;       // seeds are set per cell
    KeyValue source;               // the parsed file, echoed into the manifest
};

// `bench.*` keys plus the shared method and simulation sections.
BenchSpec parse_bench_spec(const KeyValue& kv);
BenchSpec load_bench_spec(const std::filesystem::path& path);
void validate(const BenchSpec& spec);

struct BenchCell {
    std::string image; // source as listed in the spec
    Method method;
    double ratio_pct;
    double noise_pct;
    std::uint64_t seed;

    std::string id() const;
};

struct BenchRow {
    BenchCell cell;
    bool ok = false;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double wall_time_s = 0.0;
    std::string error;
};

struct BenchAggregate {
    Method method;
    double ratio_pct;
    double noise_pct;
    std::size_t count = 0;
    double mean_psnr_db = 0.0;
    double mean_ssim = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows; // grid order
    std::vector<BenchAggregate> aggregates;
    std::size_t executed = 0; // cells run in this invocation (others resumed)
    std::size_t failed = 0;
};

// Fully resolved config (defaults filled in); parses back to the same spec.
KeyValue bench_spec_config(const BenchSpec& spec);

// (ratio, noise) pairs in grid order.
std::vector<std::pair<double, double>> bench_conditions(const BenchSpec& spec);

// Cells in grid order: image, method, condition, seed.
std::vector<BenchCell> bench_cells(const BenchSpec& spec);

// Runs a single cell (no files written).
BenchRow run_cell(const BenchSpec& spec, const BenchCell& cell);

// Mean over successful rows per (method, ratio, noise), grid order.
std::vector<BenchAggregate> aggregate_rows(const BenchSpec& spec, const std::vector<BenchRow>& rows);

using BenchProgress = std::function<void(const BenchRow& row, std::size_t done, std::size_t total)>;

// Runs every cell without a successful result file under
// output_dir/cells, in a pool of `threads` workers (0: PTYCH_THREADS or the
// hardware concurrency). Writes rows.csv, aggregate.csv, table_psnr.csv,
// table_ssim.csv, ssim_curves.csv and manifest.txt. Every file is written
// atomically.
BenchReport run_bench(const BenchSpec& spec, std::size_t threads = 0, const BenchProgress& progress = {});

// Worker count from PTYCH_THREADS, else hardware concurrency (at least 1).
std::size_t default_thread_count();

inline constexpr const char* kRowsHeader = "image,method,ratio_pct,noise_pct,seed,psnr_db,ssim,wall_time_s";

} // namespace ptych
