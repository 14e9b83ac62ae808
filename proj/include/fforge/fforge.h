/* Copyright 2026 The fforge Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the fforge building-footprint pipeline.
 *
 * Every function returns an ff_status. On failure, ff_last_error() returns a
 * message for the calling thread that stays valid until that thread's next call.
 * Objects are opaque and released with their *_free function; passing NULL to
 * a *_free function is a no-op.
 */
#ifndef FFORGE_FFORGE_H_
#define FFORGE_FFORGE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(FFORGE_BUILDING_LIBRARY)
#define FF_API __declspec(dllexport)
#else
#define FF_API __declspec(dllimport)
#endif
#else
#define FF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ff_status {
  FF_OK = 0,
  FF_ERR_INVALID = 1, /* bad input, configuration or data */
  FF_ERR_IO = 2,      /* missing or unwritable file */
  FF_ERR_NOMEM = 3,
  FF_ERR_INTERNAL = 4
} ff_status;

FF_API const char* ff_version(void);
FF_API const char* ff_last_error(void);

/* ---- configuration ------------------------------------------------------ */

/* Keys are "section.key", e.g. "train.epochs", "adam.lr", "polygonize.min_area". */
typedef struct ff_config ff_config;

FF_API ff_status ff_config_new(ff_config** out);
FF_API void ff_config_free(ff_config* cfg);
/* INI file: [section] headers with key = value lines. Later loads override earlier ones. */
FF_API ff_status ff_config_load(ff_config* cfg, const char* ini_path);
FF_API ff_status ff_config_set(ff_config* cfg, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated); *needed receives the full length + 1. */
FF_API ff_status ff_config_get(const ff_config* cfg, const char* key, char* buf, size_t buf_len, size_t* needed);
/* Number of known keys and the i-th key name (static storage). */
FF_API size_t ff_config_key_count(void);
FF_API const char* ff_config_key(size_t i);

/* ---- pipeline stages ---------------------------------------------------- */

/* variant: "v1", "v2" or "v3". subset: "train", "val", "test" or "all". An empty or
 * NULL split path means "every image in the manifest". */
FF_API ff_status ff_synth(const ff_config* cfg, const char* out_dir);
FF_API ff_status ff_split(const ff_config* cfg, const char* manifest, const char* out_split);
FF_API ff_status ff_stats(const ff_config* cfg, const char* manifest, const char* split, const char* out_stats);
FF_API ff_status ff_preprocess(const ff_config* cfg, const char* manifest, const char* stats, const char* out_dir);
FF_API ff_status ff_label(const ff_config* cfg, const char* manifest, const char* out_dir);
FF_API ff_status ff_tile(const ff_config* cfg, const char* variant, const char* manifest, const char* pre_dir,
                         const char* label_dir, const char* split, const char* out_dir);
/* Per-epoch progress lines go to `log` when it is non-NULL. A non-NULL `variant` must
 * match the variant the data directory was prepared for. */
typedef void (*ff_log_fn)(const char* line, void* user);
FF_API ff_status ff_train(const ff_config* cfg, const char* variant, const char* data_dir, const char* split,
                          const char* out_checkpoint, ff_log_fn log, void* user);
FF_API ff_status ff_predict(const ff_config* cfg, const char* data_dir, const char* checkpoint, const char* split,
                            const char* subset, const char* out_dir);
FF_API ff_status ff_ensemble(const ff_config* cfg, const char* const* pred_dirs, size_t n_dirs, const char* out_dir);
FF_API ff_status ff_polygonize(const ff_config* cfg, const char* pred_dir, const char* out_csv);

typedef struct ff_scores {
  double precision;
  double recall;
  double f1;
  double min_area;
  size_t tp;
  size_t proposed;
  size_t ground_truth;
  char city[64]; /* NUL-terminated, truncated if longer */
} ff_scores;

/* city may be NULL (manifest city); out_csv may be NULL; out may be NULL. */
FF_API ff_status ff_score(const ff_config* cfg, const char* manifest, const char* pred_csv, const char* split,
                          const char* subset, const char* city, const char* out_csv, ff_scores* out);
/* Human-readable table for one score row; static per-thread storage. A NULL city uses scores->city. */
FF_API const char* ff_scores_format(const char* city, const ff_scores* scores);

/* ---- rasters ------------------------------------------------------------ */

typedef struct ff_raster ff_raster;

FF_API ff_status ff_raster_new(const char* image_id, size_t bands, size_t height, size_t width, const float* data,
                               ff_raster** out);
FF_API ff_status ff_raster_load(const char* header_path, ff_raster** out);
FF_API ff_status ff_raster_save(const ff_raster* raster, const char* header_path);
FF_API void ff_raster_free(ff_raster* raster);
FF_API ff_status ff_raster_shape(const ff_raster* raster, size_t* bands, size_t* height, size_t* width);
/* Band-sequential, row-major samples; valid until the raster is freed. */
FF_API const float* ff_raster_data(const ff_raster* raster);

/* ---- models ------------------------------------------------------------- */

typedef struct ff_model ff_model;

FF_API ff_status ff_model_load(const char* checkpoint, ff_model** out);
FF_API void ff_model_free(ff_model* model);
FF_API ff_status ff_model_info(const ff_model* model, size_t* in_channels, size_t* depth, size_t* base_channels);
/* Probability raster (1 band) for an input that is already centered. */
FF_API ff_status ff_model_predict(ff_model* model, const ff_raster* input, ff_raster** out);

/* ---- geometry and scoring primitives ------------------------------------ */

/* Area of a WKT polygon (0 for POLYGON EMPTY). */
FF_API ff_status ff_wkt_area(const char* wkt, double* area);
FF_API ff_status ff_f1_score(size_t tp, size_t proposed, size_t ground_truth, ff_scores* out);
/* Footprint polygons of a probability raster, as a summaryData CSV for one image. The
 * returned string is owned by the caller and released with ff_string_free. */
FF_API ff_status ff_footprints_csv(const ff_raster* prediction, double threshold, double min_area, char** out_csv);
FF_API void ff_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* FFORGE_FFORGE_H_ */
