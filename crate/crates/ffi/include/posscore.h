#ifndef POSSCORE_H
#define POSSCORE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum PscStatus {
  PSC_STATUS_OK = 0,
  PSC_STATUS_NULL_POINTER = 1,
  PSC_STATUS_INVALID_ARGUMENT = 2,
  PSC_STATUS_IO = 3,
  PSC_STATUS_PARSE = 4,
  PSC_STATUS_MISSING_RESOURCE = 5,
  /**
   * The quantity is undefined for this input (constant ranks, too few
   * pairs).
   */
  PSC_STATUS_UNDEFINED = 6,
  PSC_STATUS_INTERNAL = 7,
} PscStatus;

/**
 * Word vectors loaded from a `.vec` file or built from arrays.
 */
typedef struct PscEmbeddings PscEmbeddings;

/**
 * A tokenized, POS-tagged sentence.
 */
typedef struct PscSentence PscSentence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *psc_last_error_message(void);

/**
 * Loads a fastText-style `.vec` file (optionally gzipped).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PscStatus psc_embeddings_load(const char *path, struct PscEmbeddings **out);

/**
 * Builds a table from `count` words and a row-major `count * dim` array.
 *
 * # Safety
 * `words` must hold `count` strings and `values` `count * dim` floats.
 */
enum PscStatus psc_embeddings_new(const char *const *words,
                                  const double *values,
                                  size_t count,
                                  size_t dim,
                                  struct PscEmbeddings **out);

/**
 * # Safety
 * `table` must come from a `psc_embeddings_*` constructor or be NULL.
 */
void psc_embeddings_free(struct PscEmbeddings *table);

/**
 * # Safety
 * `table` must be a live handle.
 */
size_t psc_embeddings_dim(const struct PscEmbeddings *table);

/**
 * Builds a sentence from parallel arrays of words and UPOS tags. Tags
 * outside the universal set are kept as X.
 *
 * # Safety
 * `words` and `tags` must each hold `count` strings.
 */
enum PscStatus psc_sentence_new(const char *const *words,
                                const char *const *tags,
                                size_t count,
                                struct PscSentence **out);

/**
 * # Safety
 * `sentence` must come from `psc_sentence_new` or be NULL.
 */
void psc_sentence_free(struct PscSentence *sentence);

/**
 * # Safety
 * `sentence` must be a live handle.
 */
size_t psc_sentence_len(const struct PscSentence *sentence);

/**
 * POSSCORE of `candidate` against `reference`. `tagset` is a tag-set
 * name such as `ADJ+NOUN`, or NULL for the recommended set.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum PscStatus psc_posscore(const struct PscSentence *reference,
                            const struct PscSentence *candidate,
                            const char *tagset,
                            const struct PscEmbeddings *table,
                            bool count_punct,
                            double *out);

/**
 * `base` (`bleu1`..`bleu4`, `meteor`, `ea`) on the POS words only.
 * `table` may be NULL unless `base` is `ea`.
 *
 * # Safety
 * Handles must be live and strings NUL-terminated.
 */
enum PscStatus psc_pwe(const struct PscSentence *reference,
                       const struct PscSentence *candidate,
                       const char *tagset,
                       const char *base,
                       const struct PscEmbeddings *table,
                       double *out);

/**
 * Like `psc_pwe` with POS tag overlap added.
 *
 * # Safety
 * Handles must be live and strings NUL-terminated.
 */
enum PscStatus psc_ptlc(const struct PscSentence *reference,
                        const struct PscSentence *candidate,
                        const char *tagset,
                        const char *base,
                        const struct PscEmbeddings *table,
                        double *out);

/**
 * A base metric on two raw texts, tokenized internally. `table` may be
 * NULL unless `metric` is `ea`.
 *
 * # Safety
 * Strings must be NUL-terminated and `out` valid.
 */
enum PscStatus psc_base_metric(const char *metric,
                               const char *reference,
                               const char *candidate,
                               const struct PscEmbeddings *table,
                               double *out);

/**
 * Weight for the POS similarity term given the POS-word fractions of the
 * reference and candidate. `degenerate` (may be NULL) is set when the
 * candidate fraction is 0.
 *
 * # Safety
 * `out` must be valid; `degenerate` valid or NULL.
 */
enum PscStatus psc_pos_weight(double n_ref, double n_cand, double *out, bool *degenerate);

/**
 * Fraction of `count` sets where the metric orders the two candidates as
 * the human scores do. Metric ties count as wrong; human ties are
 * rejected. `correct` may be NULL.
 *
 * # Safety
 * The four arrays must hold `count` values.
 */
enum PscStatus psc_predictive_power(const double *human_a,
                                    const double *human_b,
                                    const double *metric_a,
                                    const double *metric_b,
                                    size_t count,
                                    double *out,
                                    size_t *correct);

/**
 * Two-sided p-value of a paired t-test on two 0/1 agreement arrays.
 *
 * # Safety
 * `a` and `b` must hold `count` values.
 */
enum PscStatus psc_paired_ttest(const bool *a, const bool *b, size_t count, double *out);

/**
 * Kendall tau-b. Returns `Undefined` when either input is constant.
 *
 * # Safety
 * `x` and `y` must hold `count` values.
 */
enum PscStatus psc_kendall_tau(const double *x, const double *y, size_t count, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSSCORE_H */
