#ifndef VERDICT_H
#define VERDICT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  VERDICT_STATUS_OK = 0,
  VERDICT_STATUS_NULL_POINTER = 1,
  VERDICT_STATUS_INVALID_UTF8 = 2,
  VERDICT_STATUS_IO = 3,
  VERDICT_STATUS_PARSE = 4,
  VERDICT_STATUS_CONFIG = 5,
  VERDICT_STATUS_DOMAIN = 6,
  VERDICT_STATUS_PANIC = 7,
} VerdictStatus;

typedef enum {
  VERDICT_FORMAT_JSONL = 0,
  VERDICT_FORMAT_XML = 1,
} VerdictFormat;

// A parsed corpus.
typedef struct VerdictCorpus VerdictCorpus;

// A trained classification pipeline.
typedef struct VerdictPipeline VerdictPipeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. The pointer
// stays valid until the next call into this library on the same thread.
const char *verdict_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *verdict_version(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void verdict_string_free(char *s);

// Parses a corpus held in memory.
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be writable.
VerdictStatus verdict_corpus_from_buffer(const uint8_t *data,
                                         size_t len,
                                         VerdictFormat format,
                                         VerdictCorpus **out);

// Parses a corpus file; the format follows the extension (`.xml` or JSONL).
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
VerdictStatus verdict_corpus_from_path(const char *path, VerdictCorpus **out);

// Generates a synthetic corpus. `spec_json` may be NULL for the defaults.
//
// # Safety
// `spec_json` must be NULL or a NUL-terminated string; `out` must be writable.
VerdictStatus verdict_corpus_synthetic(const char *spec_json, uint64_t seed, VerdictCorpus **out);

// Number of documents in `corpus`, or 0 for NULL.
//
// # Safety
// `corpus` must be NULL or a live handle.
size_t verdict_corpus_len(const VerdictCorpus *corpus);

// # Safety
// `corpus` must be NULL or a live handle, which is invalid afterwards.
void verdict_corpus_free(VerdictCorpus *corpus);

// Cross-validates the SVM and the baseline and returns the report as JSON.
// `config_json` may be NULL for the defaults.
//
// # Safety
// `corpus` must be a live handle, `config_json` NULL or NUL-terminated, and
// `out_json` writable.
VerdictStatus verdict_cv_run(const VerdictCorpus *corpus, const char *config_json, char **out_json);

// Trains a pipeline on the whole corpus.
//
// # Safety
// As for [`verdict_cv_run`], with `out` writable.
VerdictStatus verdict_train(const VerdictCorpus *corpus,
                            const char *config_json,
                            VerdictPipeline **out);

// # Safety
// `json` must be NUL-terminated and `out` writable.
VerdictStatus verdict_pipeline_from_json(const char *json, VerdictPipeline **out);

// # Safety
// `pipeline` must be a live handle and `out_json` writable.
VerdictStatus verdict_pipeline_to_json(const VerdictPipeline *pipeline, char **out_json);

// Predicts the label of one raw description.
//
// # Safety
// `pipeline` must be a live handle, `text` NUL-terminated and `out_label`
// writable.
VerdictStatus verdict_pipeline_predict(const VerdictPipeline *pipeline,
                                       const char *text,
                                       char **out_label);

// # Safety
// `pipeline` must be NULL or a live handle, which is invalid afterwards.
void verdict_pipeline_free(VerdictPipeline *pipeline);

// Lowercases, strips accents and replaces punctuation with spaces.
//
// # Safety
// `text` must be NUL-terminated and `out` writable.
VerdictStatus verdict_normalize(const char *text, char **out);

// Expected accuracy of a prior-sampling baseline for the given class counts.
//
// # Safety
// `counts` must point to `len` readable values; `out` must be writable.
VerdictStatus verdict_expected_dummy_accuracy(const uint64_t *counts, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VERDICT_H */
