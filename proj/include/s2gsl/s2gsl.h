#ifndef S2GSL_S2GSL_H
#define S2GSL_S2GSL_H

/* C interface to the segment/syntax graph sentiment model.
 *
 * Every call returns an s2gsl_status. On failure the message is available
 * from s2gsl_last_error() until the next call on the same thread. Handles
 * are opaque and must be released with the matching _free function. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define S2GSL_API __declspec(dllexport)
#else
#define S2GSL_API __attribute__((visibility("default")))
#endif

#define S2GSL_ABI_VERSION 1

typedef enum s2gsl_status {
  S2GSL_OK = 0,
  S2GSL_VALIDATION = 1, /* bad input, file, config or shape */
  S2GSL_NUMERICAL = 2   /* non-finite values, singular systems, failed checks */
} s2gsl_status;

typedef struct s2gsl_model s2gsl_model;

/* Receives one line of progress or report text (no trailing newline). */
typedef void (*s2gsl_line_fn)(const char* line, void* user);

typedef struct s2gsl_metrics {
  double accuracy;
  double macro_f1;
  double precision[3]; /* positive, negative, neutral */
  double recall[3];
  double f1[3];
  uint64_t confusion[9]; /* row-major [gold][predicted] */
  uint64_t total;
} s2gsl_metrics;

S2GSL_API int s2gsl_abi_version(void);
S2GSL_API const char* s2gsl_last_error(void);

/* Trains from a config file. Writes model.ckpt and metrics.log into out_dir
 * (created if missing). Each epoch line is passed to on_line when non-NULL. */
S2GSL_API s2gsl_status s2gsl_train(const char* config_path, const char* out_dir, s2gsl_line_fn on_line, void* user);

S2GSL_API s2gsl_status s2gsl_model_load(const char* checkpoint_path, s2gsl_model** out);
S2GSL_API void s2gsl_model_free(s2gsl_model* model);
S2GSL_API s2gsl_status s2gsl_model_param_count(const s2gsl_model* model, uint64_t* out);

/* Scores a dataset file with the model. */
S2GSL_API s2gsl_status s2gsl_model_evaluate(const s2gsl_model* model, const char* data_path, s2gsl_metrics* out);

/* Class probabilities for one dataset line. */
S2GSL_API s2gsl_status s2gsl_model_predict(const s2gsl_model* model, const char* record_line, double probs[3]);

/* Dumps attention, mask, tree and stream-weight artifacts for record
 * `record_id` (0-based) of data_path, or of the model's own evaluation split
 * when data_path is NULL. Written file paths go to on_line. */
S2GSL_API s2gsl_status s2gsl_model_inspect(const s2gsl_model* model, const char* data_path, uint64_t record_id,
                                           const char* out_dir, s2gsl_line_fn on_line, void* user);

/* Parameter count of the model a config would build. */
S2GSL_API s2gsl_status s2gsl_config_param_count(const char* config_path, s2gsl_line_fn on_line, void* user,
                                                uint64_t* out);

/* Full-model finite-difference check. S2GSL_NUMERICAL when any parameter
 * exceeds the tolerance. */
S2GSL_API s2gsl_status s2gsl_gradcheck(uint64_t seed, s2gsl_line_fn on_line, void* user);

/* Latent-tree and segment-mask checks against brute-force references. */
S2GSL_API s2gsl_status s2gsl_oracle_check(uint64_t trials, s2gsl_line_fn on_line, void* user);

/* Trains every ablation and fusion variant and reports a comparison table. */
S2GSL_API s2gsl_status s2gsl_ablate(const char* config_path, s2gsl_line_fn on_line, void* user);

/* Writes `size` synthetic records to out_path. */
S2GSL_API s2gsl_status s2gsl_generate_data(uint64_t seed, uint64_t size, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif
