#ifndef PTYCH_PTYCH_H
#define PTYCH_PTYCH_H

/* C interface to the ptych toolkit. Every object is an opaque handle
 * released by its _free function (NULL is accepted). Functions return a
 * ptych_status; on failure ptych_last_error() describes the problem. The
 * message is per thread and stays valid until the next failing call on that
 * thread. Handles are not shared between threads unless noted. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PTYCH_API __declspec(dllexport)
#else
#define PTYCH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ptych_status {
    PTYCH_OK = 0,
    PTYCH_ERR_INVALID_ARGUMENT = 1, /* NULL handle or output pointer, bad buffer size */
    PTYCH_ERR_CONFIG = 2,
    PTYCH_ERR_DIMENSION = 3,
    PTYCH_ERR_NUMERIC = 4,
    PTYCH_ERR_IO = 5,
    PTYCH_ERR_MISSING_MODEL = 6,
    PTYCH_ERR_UNKNOWN_METHOD = 7,
    PTYCH_ERR_DIVERGED = 8, /* NaN or Inf during optimization */
    PTYCH_ERR_INTERNAL = 9
} ptych_status;

PTYCH_API const char* ptych_version(void);
PTYCH_API const char* ptych_status_name(ptych_status status);
PTYCH_API const char* ptych_last_error(void);

/* ---- images: row-major doubles, nominally in [0, 1] ---- */

typedef struct ptych_image ptych_image;

/* values may be NULL for a zero image. */
PTYCH_API ptych_status ptych_image_create(size_t height, size_t width, const double* values, ptych_image** out);
/* source: PNG or PTYF path, or "synthetic:<blobs|bars|chart|scene>[:seed]".
 * size 0 keeps a file's own dims (synthetic sources need size > 0); otherwise
 * the image is center-cropped to a square and resized to size x size. */
PTYCH_API ptych_status ptych_image_load(const char* source, size_t size, ptych_image** out);
PTYCH_API ptych_status ptych_image_save_png(const ptych_image* image, const char* path);
PTYCH_API ptych_status ptych_image_save_ptyf(const ptych_image* image, const char* path);
PTYCH_API size_t ptych_image_height(const ptych_image* image);
PTYCH_API size_t ptych_image_width(const ptych_image* image);
PTYCH_API const double* ptych_image_data(const ptych_image* image);
PTYCH_API void ptych_image_free(ptych_image* image);

/* PSNR (dB, capped at 99) and SSIM of estimate against truth. */
PTYCH_API ptych_status ptych_metrics(const ptych_image* estimate, const ptych_image* truth, double* psnr_db,
                                     double* ssim);

/* ---- configuration: key = value text, see configs/default.conf ---- */

typedef struct ptych_config ptych_config;

/* Every recognised key at its default value. */
PTYCH_API ptych_status ptych_config_create(ptych_config** out);
/* Defaults overlaid with the file. Unknown keys are a PTYCH_ERR_CONFIG. */
PTYCH_API ptych_status ptych_config_load(const char* path, ptych_config** out);
PTYCH_API ptych_status ptych_config_set(ptych_config* config, const char* key, const char* value);
/* Copies the value (NUL-terminated) into buffer when it fits; *needed (if
 * not NULL) receives the required size including the terminator. */
PTYCH_API ptych_status ptych_config_get(const ptych_config* config, const char* key, char* buffer, size_t capacity,
                                        size_t* needed);
PTYCH_API ptych_status ptych_config_save(const ptych_config* config, const char* path);
/* Whole config as text; buffer semantics as ptych_config_get. */
PTYCH_API ptych_status ptych_config_text(const ptych_config* config, char* buffer, size_t capacity, size_t* needed);
PTYCH_API void ptych_config_free(ptych_config* config);

/* ---- measurements ---- */

typedef struct ptych_sim_params {
    size_t grid;    /* cameras per side; g x g cameras */
    double radius;  /* pupil radius in pixels; 0 = min(height, width) / 8 */
    double spacing; /* pupil center spacing; 0 = 60% area overlap */
    double ratio;   /* retained percent of n * cameras pixels, in (0, 100] */
    double noise;   /* percent; noise sigma = noise / 100 */
    uint64_t seed;
    int clip_negative;
} ptych_sim_params;

typedef struct ptych_measurements ptych_measurements;

PTYCH_API void ptych_sim_params_default(ptych_sim_params* params);
PTYCH_API ptych_status ptych_simulate(const ptych_image* truth, const ptych_sim_params* params,
                                      ptych_measurements** out);
/* Writes manifest.txt plus per-camera y and mask PTYF files. source may be
 * NULL; otherwise it is recorded in the manifest with the image fingerprint. */
PTYCH_API ptych_status ptych_measurements_save(const ptych_measurements* m, const char* dir, const char* source,
                                               const ptych_image* truth);
PTYCH_API ptych_status ptych_measurements_load(const char* dir, ptych_measurements** out);
PTYCH_API size_t ptych_measurements_height(const ptych_measurements* m);
PTYCH_API size_t ptych_measurements_width(const ptych_measurements* m);
PTYCH_API size_t ptych_measurements_cameras(const ptych_measurements* m);
/* Magnitudes of camera index as a new image. */
PTYCH_API ptych_status ptych_measurements_camera(const ptych_measurements* m, size_t camera, ptych_image** out);
PTYCH_API ptych_status ptych_measurement_loss(const ptych_image* estimate, const ptych_measurements* m,
                                              double* loss);
PTYCH_API void ptych_measurements_free(ptych_measurements* m);

/* ---- normalizing flow ---- */

typedef struct ptych_flow ptych_flow;

/* Trains a flow on count square images of equal size; hyperparameters come
 * from the flow.* keys (config may be NULL for defaults). */
PTYCH_API ptych_status ptych_flow_train(const ptych_config* config, const ptych_image* const* images, size_t count,
                                        ptych_flow** out);
PTYCH_API ptych_status ptych_flow_save(const ptych_flow* flow, const char* dir);
PTYCH_API ptych_status ptych_flow_load(const char* dir, ptych_flow** out);
/* Per-epoch mean NLL in nats (empty for loaded flows). */
PTYCH_API size_t ptych_flow_trace_length(const ptych_flow* flow);
PTYCH_API const double* ptych_flow_trace(const ptych_flow* flow);
PTYCH_API ptych_status ptych_flow_sample(const ptych_flow* flow, double temperature, uint64_t seed,
                                         ptych_image** out);
PTYCH_API void ptych_flow_free(ptych_flow* flow);

/* ---- reconstruction ---- */

typedef struct ptych_result ptych_result;

/* Called every log_every iterations of the generative solvers. */
typedef void (*ptych_progress_fn)(size_t iteration, double loss, void* user);

/* method: "iera", "sparse", "untrained" or "invertible". config may be
 * NULL (defaults). truth may be NULL; when given the result carries metrics.
 * flow overrides invertible.model; one of them is required for invertible. */
PTYCH_API ptych_status ptych_reconstruct(const ptych_measurements* m, const char* method, const ptych_config* config,
                                         const ptych_image* truth, const ptych_flow* flow,
                                         ptych_progress_fn progress, void* user, ptych_result** out);
/* Borrowed; valid while the result lives. */
PTYCH_API const ptych_image* ptych_result_image(const ptych_result* result);
PTYCH_API size_t ptych_result_trace_length(const ptych_result* result);
PTYCH_API const double* ptych_result_trace(const ptych_result* result);
PTYCH_API size_t ptych_result_best_iteration(const ptych_result* result);
PTYCH_API double ptych_result_wall_time(const ptych_result* result);
/* Returns 0 when no truth was given. */
PTYCH_API int ptych_result_metrics(const ptych_result* result, double* psnr_db, double* ssim);
PTYCH_API void ptych_result_free(ptych_result* result);

/* ---- benchmark ---- */

typedef void (*ptych_bench_progress_fn)(const char* cell, int ok, size_t done, size_t total, void* user);

/* Runs the grid described by spec_path. out_dir overrides bench.output_dir
 * when not NULL. threads 0 uses PTYCH_THREADS or the hardware concurrency.
 * *failed receives the number of failed cells; a run with failures still
 * returns PTYCH_OK. */
PTYCH_API ptych_status ptych_bench_run(const char* spec_path, const char* out_dir, size_t threads,
                                       ptych_bench_progress_fn progress, void* user, size_t* executed,
                                       size_t* failed);

#ifdef __cplusplus
}
#endif

#endif
