#ifndef EMBKIT_H
#define EMBKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EmbkitStatus {
  EMBKIT_STATUS_OK = 0,
  EMBKIT_STATUS_NULL_POINTER = 1,
  EMBKIT_STATUS_INVALID_UTF8 = 2,
  EMBKIT_STATUS_INVALID_ARGUMENT = 3,
  EMBKIT_STATUS_IO = 4,
  EMBKIT_STATUS_FORMAT = 5,
  EMBKIT_STATUS_NOT_FOUND = 6,
  EMBKIT_STATUS_ZERO_VECTOR = 7,
  EMBKIT_STATUS_DIMENSION_MISMATCH = 8,
  EMBKIT_STATUS_ALIGNMENT = 9,
  EMBKIT_STATUS_PANIC = 10,
  EMBKIT_STATUS_INTERNAL = 11,
} EmbkitStatus;

/**
 * Opaque deduplicator handle.
 */
typedef struct EmbkitDedup EmbkitDedup;

/**
 * Opaque static-embedding table handle.
 */
typedef struct EmbkitEmbeddings EmbkitEmbeddings;

/**
 * Opaque tokenizer handle.
 */
typedef struct EmbkitTokenizer EmbkitTokenizer;

/**
 * Counters of a deduplicator.
 */
typedef struct EmbkitDedupStats {
  uint64_t units_in;
  uint64_t units_kept;
  uint64_t tokens_in;
  uint64_t tokens_kept;
  uint64_t distinct_shingles;
} EmbkitDedupStats;

/**
 * Token-level F1 of the three entity classes and their mean.
 */
typedef struct EmbkitScores {
  double per;
  double loc;
  double org;
  double macro_f1;
} EmbkitScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *embkit_last_error(void);

/**
 * Releases a string returned by the library.
 *
 * # Safety
 * `s` must be NULL or a pointer returned by this library, not yet freed.
 */
void embkit_string_free(char *s);

/**
 * Creates a tokenizer with the built-in rules for `lang`.
 *
 * # Safety
 * `lang` must be a valid C string; `out` must be writable.
 */
enum EmbkitStatus embkit_tokenizer_new(const char *lang, struct EmbkitTokenizer **out);

/**
 * # Safety
 * `t` must be NULL or a handle from [`embkit_tokenizer_new`], not yet freed.
 */
void embkit_tokenizer_free(struct EmbkitTokenizer *t);

/**
 * Segments and tokenizes a paragraph. The result holds one sentence per
 * line with tokens separated by single spaces; free it with
 * [`embkit_string_free`].
 *
 * # Safety
 * `t` must be a live tokenizer, `text` a valid C string, `out` writable.
 */
enum EmbkitStatus embkit_tokenize(const struct EmbkitTokenizer *t, const char *text, char **out);

/**
 * Creates a deduplicator over `n`-token shingles that drops units whose
 * duplicate-shingle ratio exceeds `threshold`.
 *
 * # Safety
 * `out` must be writable.
 */
enum EmbkitStatus embkit_dedup_new(size_t n, double threshold, struct EmbkitDedup **out);

/**
 * # Safety
 * `d` must be NULL or a handle from [`embkit_dedup_new`], not yet freed.
 */
void embkit_dedup_free(struct EmbkitDedup *d);

/**
 * Offers the next unit (whitespace-separated tokens); `keep` is set to 1
 * when it is kept and 0 when it is a near duplicate of earlier units.
 *
 * # Safety
 * `d` must be a live deduplicator, `unit` a valid C string, `keep` writable.
 */
enum EmbkitStatus embkit_dedup_offer(struct EmbkitDedup *d, const char *unit, uint8_t *keep);

/**
 * # Safety
 * `d` must be a live deduplicator and `out` writable.
 */
enum EmbkitStatus embkit_dedup_stats(const struct EmbkitDedup *d, struct EmbkitDedupStats *out);

/**
 * Loads a static vector file (`word v1 v2 ...` per line, optional
 * `count dim` header).
 *
 * # Safety
 * `path` must be a valid C string and `out` writable.
 */
enum EmbkitStatus embkit_embeddings_load(const char *path, struct EmbkitEmbeddings **out);

/**
 * # Safety
 * `e` must be NULL or a handle from [`embkit_embeddings_load`], not yet
 * freed.
 */
void embkit_embeddings_free(struct EmbkitEmbeddings *e);

/**
 * Number of words; 0 for NULL.
 *
 * # Safety
 * `e` must be NULL or a live handle.
 */
size_t embkit_embeddings_len(const struct EmbkitEmbeddings *e);

/**
 * Vector dimension; 0 for NULL.
 *
 * # Safety
 * `e` must be NULL or a live handle.
 */
size_t embkit_embeddings_dim(const struct EmbkitEmbeddings *e);

/**
 * Copies the vector of `word` into `out`, which holds `out_len` floats.
 *
 * # Safety
 * `e` must be a live handle, `word` a valid C string and `out` writable for
 * `out_len` floats.
 */
enum EmbkitStatus embkit_embeddings_get(const struct EmbkitEmbeddings *e,
                                        const char *word,
                                        float *out,
                                        size_t out_len);

/**
 * Cosine similarity of two words' vectors.
 *
 * # Safety
 * `e` must be a live handle, `a` and `b` valid C strings, `out` writable.
 */
enum EmbkitStatus embkit_embeddings_similarity(const struct EmbkitEmbeddings *e,
                                               const char *a,
                                               const char *b,
                                               double *out);

/**
 * Cosine similarity of two vectors of length `dim`.
 *
 * # Safety
 * `u` and `v` must be readable for `dim` floats and `out` writable.
 */
enum EmbkitStatus embkit_cosine(const float *u, const float *v, size_t dim, double *out);

/**
 * Share of entity tokens, `(per + loc + org) / n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum EmbkitStatus embkit_label_density(uint64_t per,
                                       uint64_t loc,
                                       uint64_t org,
                                       uint64_t n,
                                       double *out);

/**
 * `(a - b) / b`; fails unless `b > 0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum EmbkitStatus embkit_relative_difference(double a, double b, double *out);

/**
 * Token-level macro-F1 of a prediction file against a gold file, both in
 * the two-column format with the default label reduction.
 *
 * # Safety
 * `gold` and `pred` must be valid C strings and `out` writable.
 */
enum EmbkitStatus embkit_macro_f1(const char *gold, const char *pred, struct EmbkitScores *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMBKIT_H */
