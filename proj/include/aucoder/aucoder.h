/*
 * aucoder C API.
 *
 * Facial keypoint sequences in, data-driven action units out. Objects are
 * opaque handles owned by the caller and released with the matching *_free
 * function. Every fallible call returns an aucoder_status; on failure the
 * message for the calling thread is available from aucoder_last_error()
 * until the next failing call on that thread.
 *
 * Artifacts (features, models, dictionaries, codes) are a JSON sidecar plus
 * matrix CSV files; paths may name either the sidecar or its .csv sibling.
 * Functions that write artifacts take an optional run_json string, a JSON
 * object embedded verbatim under "run" (seed, config hash and so on).
 */
#ifndef AUCODER_AUCODER_H
#define AUCODER_AUCODER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(AUCODER_BUILDING_LIBRARY)
#    define AUCODER_API __declspec(dllexport)
#  else
#    define AUCODER_API __declspec(dllimport)
#  endif
#else
#  define AUCODER_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aucoder_status {
  AUCODER_OK = 0,
  AUCODER_ERR_INVALID_ARGUMENT = 1,
  AUCODER_ERR_IO = 2,
  AUCODER_ERR_PARSE = 3,
  AUCODER_ERR_DEGENERATE = 4,
  AUCODER_ERR_OUT_OF_RANGE = 5,
  AUCODER_ERR_MASK = 6,
  AUCODER_ERR_INTERNAL = 99
} aucoder_status;

typedef struct aucoder_features aucoder_features;
typedef struct aucoder_model aucoder_model;
typedef struct aucoder_dictionary aucoder_dictionary;

AUCODER_API const char* aucoder_version(void);
AUCODER_API const char* aucoder_last_error(void);
AUCODER_API const char* aucoder_status_name(aucoder_status status);

/* FNV-1a 64-bit hash of a string, written as 16 hex digits plus NUL. */
AUCODER_API aucoder_status aucoder_config_hash(const char* text, char out[17]);

/* ---- features ---------------------------------------------------------- */

/* Loads the manifest, registers every frame and builds neutral-relative
 * displacement features. anchor_set may be NULL to use the manifest's. */
AUCODER_API aucoder_status aucoder_features_preprocess(const char* manifest_path, const char* anchor_set,
                                                       aucoder_features** out);
AUCODER_API aucoder_status aucoder_features_load(const char* path, aucoder_features** out);
AUCODER_API aucoder_status aucoder_features_save(const aucoder_features* features, const char* path,
                                                 const char* run_json);
AUCODER_API aucoder_status aucoder_features_subsample(const aucoder_features* features, size_t count,
                                                      uint64_t seed, aucoder_features** out);
AUCODER_API aucoder_status aucoder_features_shape(const aucoder_features* features, size_t* rows, size_t* cols);
/* Column-major copy of the data; len must equal rows * cols. */
AUCODER_API aucoder_status aucoder_features_copy_data(const aucoder_features* features, double* out, size_t len);
/* Number of true rows in the presence mask. */
AUCODER_API aucoder_status aucoder_features_mask_rows(const aucoder_features* features, size_t* rows);
AUCODER_API void aucoder_features_free(aucoder_features* features);

/* ---- PCA models -------------------------------------------------------- */

AUCODER_API aucoder_status aucoder_model_fit(const aucoder_features* train, size_t k, aucoder_model** out);
/* Smallest k reaching target_ve percent. On AUCODER_ERR_OUT_OF_RANGE,
 * *max_achievable (if non-NULL) holds the best Train VE available. */
AUCODER_API aucoder_status aucoder_model_fit_target(const aucoder_features* train, double target_ve,
                                                    aucoder_model** out, double* max_achievable);
AUCODER_API aucoder_status aucoder_model_load(const char* path, aucoder_model** out);
AUCODER_API aucoder_status aucoder_model_save(const aucoder_model* model, const char* path, const char* run_json);
AUCODER_API aucoder_status aucoder_model_k(const aucoder_model* model, size_t* k);
/* Column-major copy of the p x k basis. */
AUCODER_API aucoder_status aucoder_model_copy_basis(const aucoder_model* model, double* out, size_t len);
/* Variance explained when projecting data onto the basis over the keypoints
 * both carry; with the training data this is the Train VE. */
AUCODER_API aucoder_status aucoder_model_ve(const aucoder_model* model, const aucoder_features* data, double* ve);
AUCODER_API void aucoder_model_free(aucoder_model* model);

/* ---- dictionaries and sparse coding ------------------------------------ */

AUCODER_API aucoder_status aucoder_dictionary_from_model(const aucoder_model* model, const char* id,
                                                         aucoder_dictionary** out);
/* Accepts a saved dictionary, a saved PCA model, or an AU set JSON. */
AUCODER_API aucoder_status aucoder_dictionary_load(const char* path, aucoder_dictionary** out);
AUCODER_API aucoder_status aucoder_dictionary_save(const aucoder_dictionary* dict, const char* path,
                                                   const char* run_json);
AUCODER_API aucoder_status aucoder_dictionary_size(const aucoder_dictionary* dict, size_t* columns);
AUCODER_API aucoder_status aucoder_dictionary_set_id(aucoder_dictionary* dict, const char* id);
AUCODER_API void aucoder_dictionary_free(aucoder_dictionary* dict);

typedef struct aucoder_lars_options {
  size_t max_active;     /* per-sample component budget */
  double ridge;          /* elastic-net l2 weight, 0 for pure lasso */
  double tolerance;      /* relative tie tolerance */
  int normalize_columns; /* nonzero: solve with unit-norm atoms */
} aucoder_lars_options;

AUCODER_API void aucoder_lars_options_init(aucoder_lars_options* options);

/* Encodes every column; writes the code artifact when out_path is non-NULL. */
AUCODER_API aucoder_status aucoder_encode(const aucoder_features* data, const aucoder_dictionary* dict,
                                          const aucoder_lars_options* options, const char* out_path,
                                          const char* run_json, double* realized_mc, double* test_ve);

/* ---- batch protocols ---------------------------------------------------- */

/* Train VE and mean Test VE for k in [k_min, k_max] (clamped to the rank
 * bound). Writes a CSV table, its JSON sidecar, and an SVG chart. */
AUCODER_API aucoder_status aucoder_sweep_k(const aucoder_features* train, const aucoder_features* const* tests,
                                           size_t n_tests, size_t k_min, size_t k_max, const char* csv_path,
                                           const char* svg_path, const char* run_json);

/* Test VE against realized MC for each dictionary and budget. budgets may be
 * NULL (n_budgets 0) for 1..size per dictionary. */
AUCODER_API aucoder_status aucoder_compare(const aucoder_features* test, const aucoder_dictionary* const* dicts,
                                           size_t n_dicts, const size_t* budgets, size_t n_budgets,
                                           const aucoder_lars_options* options, const char* csv_path,
                                           const char* svg_path, const char* run_json);

/* One SVG per 1-based component index, named component_<i>.svg in out_dir.
 * neutral_path may be NULL for the built-in template face. */
AUCODER_API aucoder_status aucoder_render_components(const aucoder_model* model, const char* neutral_path,
                                                     const size_t* indices, size_t n_indices, double scale,
                                                     const char* out_dir);

typedef struct aucoder_synth_options {
  const char* dataset_id;
  const char* template_map; /* "ibug68", "disfa66", "bp4d49" */
  int subjects;
  int frames_per_subject;   /* including the neutral frame */
  int n_bases;
  double weight_scale;
  double decay;
  double activation;
  double noise;             /* relative to weight_scale */
  int nuisance;
  uint64_t basis_seed;
  uint64_t seed;
  int au_count;             /* > 0 also writes an AU set under <out_dir>/au */
} aucoder_synth_options;

AUCODER_API void aucoder_synth_options_init(aucoder_synth_options* options);
AUCODER_API aucoder_status aucoder_synth(const aucoder_synth_options* options, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* AUCODER_AUCODER_H */
