#ifndef ZINN_ZINN_H
#define ZINN_ZINN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ZINN_API __declspec(dllexport)
#else
#define ZINN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure the message is available
 * from zinn_last_error_message() on the same thread until the next call. */
typedef enum zinn_status {
    ZINN_OK = 0,
    ZINN_INVALID_ARGUMENT = 1,
    ZINN_IO = 2,
    ZINN_DEGENERATE_COLUMN = 3,
    ZINN_NEGATIVE_INPUT = 4,
    ZINN_OUT_OF_COVERAGE = 5,
    ZINN_ALL_CELLS_DROPPED = 6,
    ZINN_NO_REGION_COVERAGE = 7,
    ZINN_DOMAIN_VIOLATION = 8,
    ZINN_MISSING_CPI_MONTH = 9,
    ZINN_SCHEMA_MISMATCH = 10,
    ZINN_EMPTY_FILE = 11,
    ZINN_BAD_FRACTIONS = 12,
    ZINN_UNKNOWN_SOURCE_TAG = 13,
    ZINN_SHAPE_MISMATCH = 14,
    ZINN_NON_FINITE_LOSS = 15,
    ZINN_RANK_DEFICIENT = 16,
    ZINN_ROSTER_MISMATCH = 17,
    ZINN_INVALID_POLYGON = 18,
    ZINN_VERSION_MISMATCH = 19,
    ZINN_CORRUPT_BUNDLE = 20,
    ZINN_ONE_CLASS_ONLY = 21,
    ZINN_ZERO_VARIANCE = 22,
    ZINN_DIVISION_BY_ZERO = 23,
    ZINN_NOT_FOUND = 24,
    ZINN_INTERNAL = 99
} zinn_status;

ZINN_API const char* zinn_status_string(zinn_status status);
ZINN_API const char* zinn_last_error_message(void);
/* Releases strings returned through char** out-parameters. */
ZINN_API void zinn_free_string(char* s);

/* Column transforms */

typedef enum zinn_transform_kind {
    ZINN_IDENTITY = 0,
    ZINN_STANDARDIZE = 1,
    ZINN_LOG1P_STANDARDIZE = 2,
    ZINN_LOG1000_STANDARDIZE = 3
} zinn_transform_kind;

typedef struct zinn_transform {
    zinn_transform_kind kind;
    double mean;
    double sd;
} zinn_transform;

ZINN_API zinn_status zinn_transform_fit(zinn_transform_kind kind, const double* values, size_t n, zinn_transform* out);
ZINN_API zinn_status zinn_transform_apply(const zinn_transform* t, double x, double* out);
ZINN_API zinn_status zinn_transform_invert(const zinn_transform* t, double z, double* out);

/* Dataset */

/* Validates an events file, writing accepted events and the reject report. */
ZINN_API zinn_status zinn_ingest_events(const char* events_path, const char* window_first, const char* window_last,
                                        const char* events_out, const char* rejects_out, size_t* n_events,
                                        size_t* n_rejects);

typedef struct zinn_table zinn_table;

/* Builds the feature table from a source manifest. drop_report may be NULL. */
ZINN_API zinn_status zinn_table_assemble(const char* manifest_path, const char* drop_report, zinn_table** out);
ZINN_API zinn_status zinn_table_load(const char* path, zinn_table** out);
ZINN_API zinn_status zinn_table_save(const zinn_table* table, const char* path);
ZINN_API size_t zinn_table_rows(const zinn_table* table);
ZINN_API size_t zinn_table_cols(const zinn_table* table);
ZINN_API void zinn_table_destroy(zinn_table* table);

typedef struct zinn_split zinn_split;

/* fractions may be NULL for 0.6/0.2/0.2. */
ZINN_API zinn_status zinn_split_create(const zinn_table* table, uint64_t seed, const double* fractions,
                                       zinn_split** out);
ZINN_API zinn_status zinn_split_load(const zinn_table* table, const char* path, zinn_split** out);
ZINN_API zinn_status zinn_split_save(const zinn_split* split, const zinn_table* table, const char* path);
/* train, cv, test */
ZINN_API zinn_status zinn_split_counts(const zinn_split* split, size_t counts[3]);
ZINN_API void zinn_split_destroy(zinn_split* split);

/* Training and evaluation. Option objects are JSON; see docs/formats.md. */

ZINN_API zinn_status zinn_sweep(const zinn_table* table, const zinn_split* split, const char* options_json,
                                const char* results_path, char** summary_json);

typedef struct zinn_model zinn_model;

ZINN_API zinn_status zinn_train(const zinn_table* table, const zinn_split* split, const char* options_json,
                                zinn_model** out, char** report_json);
ZINN_API zinn_status zinn_model_load(const char* path, zinn_model** out);
ZINN_API zinn_status zinn_model_save(const zinn_model* model, const char* path);
ZINN_API void zinn_model_destroy(zinn_model* model);
ZINN_API size_t zinn_model_input_width(const zinn_model* model);
ZINN_API zinn_status zinn_model_metadata(const zinn_model* model, char** json);

typedef struct zinn_prediction {
    double p_damage;
    double conditional_transformed;
    double conditional_usd;
    double expected_usd;
    int damage_flag;
    int floored;
} zinn_prediction;

/* features: transformed values in model column order. */
ZINN_API zinn_status zinn_model_predict(const zinn_model* model, const double* features, size_t n,
                                        zinn_prediction* out);

/* split may be NULL (all rows); scope is "train", "cv", "test" or "all". */
ZINN_API zinn_status zinn_evaluate(const zinn_model* model, const zinn_table* table, const zinn_split* split,
                                   const char* scope, char** report_json);

/* Inference from natural-scale inputs */

typedef struct zinn_context zinn_context;

ZINN_API zinn_status zinn_context_load(const char* manifest_path, zinn_context** out);
ZINN_API void zinn_context_destroy(zinn_context* context);

/* Runs a predict request body; http_status is 200, 400 or 422. */
ZINN_API zinn_status zinn_predict_request(const zinn_model* model, const zinn_context* context,
                                          const char* request_json, int* http_status, char** response_json);

ZINN_API zinn_status zinn_grid(const zinn_model* model, const zinn_context* context, const char* options_json,
                               char** summary_json);

/* Blocks serving HTTP; ZINN_BIND=host:port overrides host and port. */
ZINN_API zinn_status zinn_serve(const zinn_model* model, const zinn_context* context, const char* host, int port,
                                const char* grid_dir);

/* Function-fitting demonstration; CSV report. */
ZINN_API zinn_status zinn_demo_fig1(uint64_t seed, char** report_csv);

#ifdef __cplusplus
}
#endif

#endif
