#ifndef BIBCLASS_H
#define BIBCLASS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum bc_status {
  BC_STATUS_OK = 0,
  BC_STATUS_NULL_POINTER = 1,
  BC_STATUS_INVALID_UTF8 = 2,
  BC_STATUS_IO = 3,
  BC_STATUS_PARSE = 4,
  BC_STATUS_CORRUPT_MODEL = 5,
  BC_STATUS_VERSION_MISMATCH = 6,
  BC_STATUS_UNKNOWN_DATABASE = 7,
  BC_STATUS_INVALID_CONFIG = 8,
  BC_STATUS_BUFFER_TOO_SMALL = 9,
  BC_STATUS_DATA = 10,
  BC_STATUS_PANIC = 11,
} bc_status;

// A citation graph with citer memberships.
typedef struct bc_citation_graph bc_citation_graph;

// A trained category model.
typedef struct bc_model bc_model;

// A model bundled with tokenizer settings, thresholds and triggers.
typedef struct bc_text_classifier bc_text_classifier;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the library version as a static NUL-terminated string.
const char *bc_version(void);

// Returns a copy of the last error message on this thread, or null when the
// last call succeeded. Release it with [`bc_string_free`].
char *bc_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a pointer obtained from this library that has not
// been freed.
void bc_string_free(char *s);

// Loads a model file into `*out`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum bc_status bc_model_load(const char *path, struct bc_model **out);

// # Safety
// `model` must be null or a handle from [`bc_model_load`] not yet freed.
void bc_model_free(struct bc_model *model);

// Number of databases in the model; 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t bc_model_database_count(const struct bc_model *model);

// Name of database `index`, or null when out of range. The string lives as
// long as the model handle.
//
// # Safety
// `model` must be null or a live handle.
const char *bc_model_database_name(const struct bc_model *model, size_t index);

// Builds a text classifier over `model`. The stop list and trigger paths
// may be null; null stop lists select the bundled defaults and a null
// trigger path means no triggers. The classifier keeps its own reference to
// the model, so the model handle may be freed first.
//
// # Safety
// `model` must be a live handle, each path null or NUL-terminated, and
// `out` writable.
enum bc_status bc_text_classifier_new(const struct bc_model *model,
                                      const char *stopwords_path,
                                      const char *stopphrases_path,
                                      const char *triggers_path,
                                      size_t min_words,
                                      double score_threshold,
                                      double trigger_boost,
                                      struct bc_text_classifier **out);

// # Safety
// `classifier` must be null or a handle not yet freed.
void bc_text_classifier_free(struct bc_text_classifier *classifier);

// Writes the boosted per-database scores of `text` into `scores` in model
// order and the surviving token count into `token_count` (which may be
// null). `len` must be at least the model's database count.
//
// # Safety
// `classifier` must be a live handle, `text` NUL-terminated, and `scores`
// valid for `len` writes.
enum bc_status bc_text_classifier_score(const struct bc_text_classifier *classifier,
                                        const char *text,
                                        double *scores,
                                        size_t len,
                                        size_t *token_count);

// Writes the databases assigned to `text` as a bit mask in model order.
//
// # Safety
// `classifier` must be a live handle, `text` NUL-terminated and `out`
// writable.
enum bc_status bc_text_classifier_classify(const struct bc_text_classifier *classifier,
                                           const char *text,
                                           uint64_t *out);

// Loads a citation graph. `memberships_path` lists citer memberships;
// `records_path` adds corpus records as known citers without membership;
// `databases` is a comma separated list. Any of the three may be null;
// a null list selects the default databases.
//
// # Safety
// Every non-null pointer argument must be NUL-terminated and `out`
// writable.
enum bc_status bc_citation_graph_load(const char *citations_path,
                                      const char *memberships_path,
                                      const char *records_path,
                                      const char *databases,
                                      struct bc_citation_graph **out);

// # Safety
// `graph` must be null or a handle not yet freed.
void bc_citation_graph_free(struct bc_citation_graph *graph);

// Number of databases in the graph; 0 for a null handle.
//
// # Safety
// `graph` must be null or a live handle.
size_t bc_citation_graph_database_count(const struct bc_citation_graph *graph);

// Name of database `index`, or null when out of range.
//
// # Safety
// `graph` must be null or a live handle.
const char *bc_citation_graph_database_name(const struct bc_citation_graph *graph, size_t index);

// Writes the number of distinct known citers of `record_id` and the share
// of them that belong to `database`.
//
// # Safety
// `graph` must be a live handle, the strings NUL-terminated, and `total`
// and `ratio` writable.
enum bc_status bc_citation_ratio(const struct bc_citation_graph *graph,
                                 const char *record_id,
                                 const char *database,
                                 size_t *total,
                                 double *ratio);

// Writes the databases assigned to `record_id` by citation as a bit mask in
// graph order.
//
// # Safety
// `graph` must be a live handle, `record_id` NUL-terminated and `out`
// writable.
enum bc_status bc_classify_citations(const struct bc_citation_graph *graph,
                                     const char *record_id,
                                     size_t min_citations,
                                     double ratio_threshold,
                                     uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIBCLASS_H */
