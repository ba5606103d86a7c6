#include "ptych/ptych.h"

#include "bench/bench.hpp"
#include "common/error.hpp"
#include "data/synthetic.hpp"
#include "field/io.hpp"
#include "generative/flow.hpp"
#include "measurement/storage.hpp"
#include "metrics/metrics.hpp"
#include "recon/reconstruct.hpp"

#include <cstring>
#include <optional>
#include <string>

struct ptych_image {
    ptych::RealImage image;
};

struct ptych_config {
    ptych::KeyValue kv;
};

struct ptych_measurements {
    ptych::MeasurementSet m;
};

struct ptych_flow {
    ptych::FlowModel model;
    std::vector<double> trace;
};

struct ptych_result {
    ptych_image image;
    ptych::ReconResult result;
};

namespace {

thread_local std::string g_last_error;

ptych_status fail(ptych_status status, const std::string& message)
{
    g_last_error = message;
    return status;
}

// Maps the C++ exception in flight to a status code.
ptych_status translate()
{
    try {
        throw;
    } catch (const ptych::DivergenceError& e) {
        return fail(PTYCH_ERR_DIVERGED, e.what());
    } catch (const ptych::ConfigError& e) {
        return fail(PTYCH_ERR_CONFIG, e.what());
    } catch (const ptych::DimensionError& e) {
        return fail(PTYCH_ERR_DIMENSION, e.what());
    } catch (const ptych::NumericError& e) {
        return fail(PTYCH_ERR_NUMERIC, e.what());
    } catch (const ptych::IoError& e) {
        return fail(PTYCH_ERR_IO, e.what());
    } catch (const ptych::MissingModelError& e) {
        return fail(PTYCH_ERR_MISSING_MODEL, e.what());
    } catch (const ptych::UnknownMethodError& e) {
        return fail(PTYCH_ERR_UNKNOWN_METHOD, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PTYCH_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PTYCH_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PTYCH_ERR_INTERNAL, "unknown error");
    }
}

template <typename Fn>
ptych_status guarded(Fn&& fn)
{
    try {
        fn();
        return PTYCH_OK;
    } catch (...) {
        return translate();
    }
}

#define PTYCH_REQUIRE(cond, what)                                                                                      \
    do {                                                                                                               \
        if (!(cond))                                                                                                   \
            return fail(PTYCH_ERR_INVALID_ARGUMENT, what);                                                             \
    } while (0)

ptych::KeyValue config_or_defaults(const ptych_config* config)
{
    return config ? config->kv : ptych::default_config();
}

} // namespace

extern "C" {

const char* ptych_version(void) { return "0.1.0"; }

const char* ptych_status_name(ptych_status status)
{
    switch (status) {
    case PTYCH_OK:
        return "ok";
    case PTYCH_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case PTYCH_ERR_CONFIG:
        return "config error";
    case PTYCH_ERR_DIMENSION:
        return "dimension error";
    case PTYCH_ERR_NUMERIC:
        return "numeric error";
    case PTYCH_ERR_IO:
        return "i/o error";
    case PTYCH_ERR_MISSING_MODEL:
        return "missing model";
    case PTYCH_ERR_UNKNOWN_METHOD:
        return "unknown method";
    case PTYCH_ERR_DIVERGED:
        return "diverged";
    case PTYCH_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

const char* ptych_last_error(void) { return g_last_error.c_str(); }

ptych_status ptych_image_create(size_t height, size_t width, const double* values, ptych_image** out)
{
    PTYCH_REQUIRE(out, "image_create: out is NULL");
    PTYCH_REQUIRE(height > 0 && width > 0, "image_create: dims must be positive");
    return guarded([&] {
        auto img = std::make_unique<ptych_image>();
        img->image = ptych::RealImage(height, width, 0.0);
        if (values)
            std::memcpy(img->image.storage().data(), values, height * width * sizeof(double));
        *out = img.release();
    });
}

ptych_status ptych_image_load(const char* source, size_t size, ptych_image** out)
{
    PTYCH_REQUIRE(source && out, "image_load: NULL argument");
    return guarded([&] {
        auto img = std::make_unique<ptych_image>();
        const std::string src(source);
        if (size > 0) {
            img->image = ptych::load_test_image(src, size);
        } else if (ptych::is_synthetic_name(src)) {
            throw ptych::ConfigError("image_load: synthetic sources need a size");
        } else {
            const std::filesystem::path path(src);
            img->image = path.extension() == ".ptyf" ? ptych::read_ptyf_real(path) : ptych::read_png(path);
        }
        *out = img.release();
    });
}

ptych_status ptych_image_save_png(const ptych_image* image, const char* path)
{
    PTYCH_REQUIRE(image && path, "image_save_png: NULL argument");
    return guarded([&] { ptych::write_png(path, image->image); });
}

ptych_status ptych_image_save_ptyf(const ptych_image* image, const char* path)
{
    PTYCH_REQUIRE(image && path, "image_save_ptyf: NULL argument");
    return guarded([&] { ptych::write_ptyf(path, image->image); });
}

size_t ptych_image_height(const ptych_image* image) { return image ? image->image.height() : 0; }
size_t ptych_image_width(const ptych_image* image) { return image ? image->image.width() : 0; }
const double* ptych_image_data(const ptych_image* image) { return image ? image->image.storage().data() : nullptr; }
void ptych_image_free(ptych_image* image) { delete image; }

ptych_status ptych_metrics(const ptych_image* estimate, const ptych_image* truth, double* psnr_db, double* ssim)
{
    PTYCH_REQUIRE(estimate && truth, "metrics: NULL image");
    return guarded([&] {
        const ptych::MetricReport r = ptych::evaluate(estimate->image, truth->image);
        if (psnr_db)
            *psnr_db = r.psnr_db;
        if (ssim)
            *ssim = r.ssim;
    });
}

ptych_status ptych_config_create(ptych_config** out)
{
    PTYCH_REQUIRE(out, "config_create: out is NULL");
    return guarded([&] { *out = new ptych_config{ptych::default_config()}; });
}

ptych_status ptych_config_load(const char* path, ptych_config** out)
{
    PTYCH_REQUIRE(path && out, "config_load: NULL argument");
    return guarded([&] {
        const ptych::KeyValue file = ptych::KeyValue::load(path);
        ptych::check_config_keys(file, {"bench"});
        ptych::KeyValue kv = ptych::default_config();
        kv.merge(file);
        // Parse once so malformed values fail here rather than at use.
        ptych::parse_simulation(kv);
        ptych::parse_methods(kv);
        ptych::parse_flow(kv);
        *out = new ptych_config{std::move(kv)};
    });
}

ptych_status ptych_config_set(ptych_config* config, const char* key, const char* value)
{
    PTYCH_REQUIRE(config && key && value, "config_set: NULL argument");
    return guarded([&] {
        ptych::KeyValue next = config->kv;
        next.set(key, std::string(value));
        ptych::check_config_keys(next, {"bench"});
        ptych::parse_simulation(next);
        ptych::parse_methods(next);
        ptych::parse_flow(next);
        config->kv = std::move(next);
    });
}

namespace {

ptych_status copy_out(const std::string& text, char* buffer, size_t capacity, size_t* needed)
{
    if (needed)
        *needed = text.size() + 1;
    if (!buffer)
        return PTYCH_OK;
    if (capacity < text.size() + 1)
        return fail(PTYCH_ERR_INVALID_ARGUMENT, "buffer too small");
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    return PTYCH_OK;
}

} // namespace

ptych_status ptych_config_get(const ptych_config* config, const char* key, char* buffer, size_t capacity,
                              size_t* needed)
{
    PTYCH_REQUIRE(config && key, "config_get: NULL argument");
    const auto value = config->kv.find(key);
    if (!value)
        return fail(PTYCH_ERR_CONFIG, std::string("config_get: no key '") + key + "'");
    return copy_out(*value, buffer, capacity, needed);
}

ptych_status ptych_config_text(const ptych_config* config, char* buffer, size_t capacity, size_t* needed)
{
    PTYCH_REQUIRE(config, "config_text: NULL config");
    return copy_out(config->kv.serialize(), buffer, capacity, needed);
}

ptych_status ptych_config_save(const ptych_config* config, const char* path)
{
    PTYCH_REQUIRE(config && path, "config_save: NULL argument");
    return guarded([&] { ptych::write_text_atomic(path, config->kv.serialize()); });
}

void ptych_config_free(ptych_config* config) { delete config; }

void ptych_sim_params_default(ptych_sim_params* params)
{
    if (!params)
        return;
    const ptych::SimulationSettings s;
    *params = ptych_sim_params{s.grid, s.radius, s.spacing, s.ratio, s.noise, s.seed, s.clip_negative ? 1 : 0};
}

ptych_status ptych_simulate(const ptych_image* truth, const ptych_sim_params* params, ptych_measurements** out)
{
    PTYCH_REQUIRE(truth && params && out, "simulate: NULL argument");
    return guarded([&] {
        ptych::SimulationSettings s;
        s.grid = params->grid;
        s.radius = params->radius;
        s.spacing = params->spacing;
        s.ratio = params->ratio;
        s.noise = params->noise;
        s.seed = params->seed;
        s.clip_negative = params->clip_negative != 0;
        if (s.radius < 0.0 || s.spacing < 0.0)
            throw ptych::ConfigError("simulate: radius and spacing must be non-negative");
        const auto& img = truth->image;
        *out = new ptych_measurements{ptych::simulate(img, s.resolve(img.height(), img.width()))};
    });
}

ptych_status ptych_measurements_save(const ptych_measurements* m, const char* dir, const char* source,
                                     const ptych_image* truth)
{
    PTYCH_REQUIRE(m && dir, "measurements_save: NULL argument");
    return guarded([&] {
        ptych::KeyValue extra;
        if (source)
            extra.set("source", std::string(source));
        if (truth) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%016llx",
                          static_cast<unsigned long long>(ptych::fingerprint(truth->image)));
            extra.set("source_fingerprint", std::string(buf));
        }
        ptych::save_measurements(dir, m->m, extra);
    });
}

ptych_status ptych_measurements_load(const char* dir, ptych_measurements** out)
{
    PTYCH_REQUIRE(dir && out, "measurements_load: NULL argument");
    return guarded([&] { *out = new ptych_measurements{ptych::load_measurements(dir)}; });
}

size_t ptych_measurements_height(const ptych_measurements* m) { return m ? m->m.height() : 0; }
size_t ptych_measurements_width(const ptych_measurements* m) { return m ? m->m.width() : 0; }
size_t ptych_measurements_cameras(const ptych_measurements* m) { return m ? m->m.camera_count() : 0; }

ptych_status ptych_measurements_camera(const ptych_measurements* m, size_t camera, ptych_image** out)
{
    PTYCH_REQUIRE(m && out, "measurements_camera: NULL argument");
    PTYCH_REQUIRE(camera < m->m.camera_count(), "measurements_camera: camera index out of range");
    return guarded([&] { *out = new ptych_image{m->m.y[camera]}; });
}

ptych_status ptych_measurement_loss(const ptych_image* estimate, const ptych_measurements* m, double* loss)
{
    PTYCH_REQUIRE(estimate && m && loss, "measurement_loss: NULL argument");
    return guarded([&] { *loss = ptych::measurement_loss(estimate->image, m->m); });
}

void ptych_measurements_free(ptych_measurements* m) { delete m; }

ptych_status ptych_flow_train(const ptych_config* config, const ptych_image* const* images, size_t count,
                              ptych_flow** out)
{
    PTYCH_REQUIRE(images && out, "flow_train: NULL argument");
    PTYCH_REQUIRE(count > 0, "flow_train: no training images");
    return guarded([&] {
        std::vector<ptych::RealImage> data;
        data.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            if (!images[i])
                throw ptych::ConfigError("flow_train: NULL training image");
            data.push_back(images[i]->image);
        }
        ptych::FlowConfig cfg = ptych::parse_flow(config_or_defaults(config));
        cfg.height = data.front().height();
        cfg.width = data.front().width();
        ptych::FlowModel model(cfg);
        auto trained = ptych::train_flow(model, data);
        *out = new ptych_flow{std::move(model), std::move(trained.nll_trace)};
    });
}

ptych_status ptych_flow_save(const ptych_flow* flow, const char* dir)
{
    PTYCH_REQUIRE(flow && dir, "flow_save: NULL argument");
    return guarded([&] { ptych::save_flow(dir, flow->model); });
}

ptych_status ptych_flow_load(const char* dir, ptych_flow** out)
{
    PTYCH_REQUIRE(dir && out, "flow_load: NULL argument");
    return guarded([&] { *out = new ptych_flow{ptych::load_flow(dir), {}}; });
}

size_t ptych_flow_trace_length(const ptych_flow* flow) { return flow ? flow->trace.size() : 0; }
const double* ptych_flow_trace(const ptych_flow* flow) { return flow ? flow->trace.data() : nullptr; }

ptych_status ptych_flow_sample(const ptych_flow* flow, double temperature, uint64_t seed, ptych_image** out)
{
    PTYCH_REQUIRE(flow && out, "flow_sample: NULL argument");
    return guarded([&] { *out = new ptych_image{ptych::flow_sample(flow->model, temperature, seed)}; });
}

void ptych_flow_free(ptych_flow* flow) { delete flow; }

ptych_status ptych_reconstruct(const ptych_measurements* m, const char* method, const ptych_config* config,
                               const ptych_image* truth, const ptych_flow* flow, ptych_progress_fn progress,
                               void* user, ptych_result** out)
{
    PTYCH_REQUIRE(m && method && out, "reconstruct: NULL argument");
    return guarded([&] {
        const ptych::Method which = ptych::parse_method(method);
        ptych::MethodSettings settings = ptych::parse_methods(config_or_defaults(config));
        if (progress) {
            auto fn = [progress, user](std::size_t it, double loss) { progress(it, loss, user); };
            settings.untrained.progress = fn;
            settings.invertible.progress = fn;
        }
        auto r = std::make_unique<ptych_result>();
        r->result = ptych::reconstruct(m->m, which, settings, truth ? &truth->image : nullptr,
                                       flow ? &flow->model : nullptr);
        r->image.image = r->result.image;
        *out = r.release();
    });
}

const ptych_image* ptych_result_image(const ptych_result* result) { return result ? &result->image : nullptr; }
size_t ptych_result_trace_length(const ptych_result* result) { return result ? result->result.loss_trace.size() : 0; }
const double* ptych_result_trace(const ptych_result* result)
{
    return result ? result->result.loss_trace.data() : nullptr;
}
size_t ptych_result_best_iteration(const ptych_result* result) { return result ? result->result.best_iteration : 0; }
double ptych_result_wall_time(const ptych_result* result) { return result ? result->result.wall_time_s : 0.0; }

int ptych_result_metrics(const ptych_result* result, double* psnr_db, double* ssim)
{
    if (!result || !result->result.metrics)
        return 0;
    if (psnr_db)
        *psnr_db = result->result.metrics->psnr_db;
    if (ssim)
        *ssim = result->result.metrics->ssim;
    return 1;
}

void ptych_result_free(ptych_result* result) { delete result; }

ptych_status ptych_bench_run(const char* spec_path, const char* out_dir, size_t threads,
                             ptych_bench_progress_fn progress, void* user, size_t* executed, size_t* failed)
{
    PTYCH_REQUIRE(spec_path, "bench_run: spec path is NULL");
    return guarded([&] {
        ptych::BenchSpec spec = ptych::load_bench_spec(spec_path);
        if (out_dir)
            spec.output_dir = out_dir;
        ptych::BenchProgress cb;
        if (progress)
            cb = [progress, user](const ptych::BenchRow& row, std::size_t done, std::size_t total) {
                progress(row.cell.id().c_str(), row.ok ? 1 : 0, done, total, user);
            };
        const ptych::BenchReport report = ptych::run_bench(spec, threads, cb);
        if (executed)
            *executed = report.executed;
        if (failed)
            *failed = report.failed;
    });
}

} // extern "C"
