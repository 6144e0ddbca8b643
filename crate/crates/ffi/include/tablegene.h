#ifndef TABLEGENE_H
#define TABLEGENE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TgStatus {
  TG_STATUS_OK = 0,
  TG_STATUS_NULL_POINTER = 1,
  TG_STATUS_INVALID_ARGUMENT = 2,
  TG_STATUS_IO = 3,
  TG_STATUS_FORMAT = 4,
  TG_STATUS_INFEASIBLE = 5,
  TG_STATUS_INSUFFICIENT_STRUCTURE = 6,
  TG_STATUS_DIMENSION_MISMATCH = 7,
  TG_STATUS_INTERNAL = 8,
} TgStatus;

typedef enum TgAxis {
  TG_AXIS_X = 0,
  TG_AXIS_Y = 1,
} TgAxis;

typedef enum TgObjective {
  TG_OBJECTIVE_NONOVERLAP = 0,
  TG_OBJECTIVE_L1 = 1,
  /**
   * Uses the built-in patch-similarity discriminator.
   */
  TG_OBJECTIVE_DISCRIMINATOR_LOGPROB = 2,
  /**
   * Uses the built-in patch-similarity discriminator, λ = 100.
   */
  TG_OBJECTIVE_WEIGHTED = 3,
} TgObjective;

/**
 * Opaque GA result.
 */
typedef struct TgFitResult TgFitResult;

/**
 * Opaque table genotype.
 */
typedef struct TgGenotype TgGenotype;

/**
 * Opaque grayscale image, intensities in [0, 1] with 0 = black.
 */
typedef struct TgImage TgImage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *tg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tg_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void tg_string_free(char *s);

/**
 * Canonical genotype from an origin and row/column sizes (zeros dropped).
 *
 * # Safety
 * `rows`/`cols` must point to `n_rows`/`n_cols` readable values.
 */
enum TgStatus tg_genotype_new(uint32_t x0,
                              uint32_t y0,
                              const uint32_t *rows,
                              size_t n_rows,
                              const uint32_t *cols,
                              size_t n_cols,
                              struct TgGenotype **out);

/**
 * Random genotype from a named preset (e.g. "base", "short-cells").
 *
 * # Safety
 * `config` must be a NUL-terminated string; `out` writable.
 */
enum TgStatus tg_genotype_sample(const char *config, uint64_t seed, struct TgGenotype **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` writable.
 */
enum TgStatus tg_genotype_from_json(const char *json, struct TgGenotype **out);

/**
 * Flat JSON form; free the result with `tg_string_free`.
 *
 * # Safety
 * `g` must be a live handle; `out` writable.
 */
enum TgStatus tg_genotype_to_json(const struct TgGenotype *g, char **out);

/**
 * Effective row count; 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t tg_genotype_rows(const struct TgGenotype *g);

/**
 * Effective column count; 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t tg_genotype_cols(const struct TgGenotype *g);

/**
 * Divider positions along `axis`. `len` receives the full count; at most
 * `cap` values are copied into `buf` (which may be null when `cap` is 0).
 *
 * # Safety
 * `g` live; `buf` writable for `cap` values; `len` writable.
 */
enum TgStatus tg_genotype_dividers(const struct TgGenotype *g,
                                   enum TgAxis axis,
                                   uint32_t *buf,
                                   size_t cap,
                                   size_t *len);

/**
 * # Safety
 * `g` must be null or a handle not yet freed.
 */
void tg_genotype_free(struct TgGenotype *g);

/**
 * Ideal 256×256 skeleton of `g`.
 *
 * # Safety
 * `g` live; `out` writable.
 */
enum TgStatus tg_skeleton_oracle(const struct TgGenotype *g, struct TgImage **out);

/**
 * Degraded 256×256 skeleton (jitter/blur in page pixels).
 *
 * # Safety
 * `g` live; `out` writable.
 */
enum TgStatus tg_skeleton_degraded(const struct TgGenotype *g,
                                   uint32_t jitter_px,
                                   double dropout_prob,
                                   uint32_t blur_radius,
                                   double speckle_prob,
                                   uint64_t seed,
                                   struct TgImage **out);

/**
 * Page-sized scan of `g` with words drawn per the named preset.
 *
 * # Safety
 * `g` live; `config` NUL-terminated; `out` writable.
 */
enum TgStatus tg_render_scan(const struct TgGenotype *g,
                             const char *config,
                             uint64_t seed,
                             struct TgImage **out);

/**
 * Loads an 8-bit grayscale PNG.
 *
 * # Safety
 * `path` NUL-terminated; `out` writable.
 */
enum TgStatus tg_image_load_png(const char *path, struct TgImage **out);

/**
 * # Safety
 * `img` live; `path` NUL-terminated.
 */
enum TgStatus tg_image_save_png(const struct TgImage *img, const char *path);

/**
 * # Safety
 * `img` must be null or live.
 */
size_t tg_image_width(const struct TgImage *img);

/**
 * # Safety
 * `img` must be null or live.
 */
size_t tg_image_height(const struct TgImage *img);

/**
 * Row-major pixels, `width * height` floats, valid while `img` lives.
 *
 * # Safety
 * `img` must be null or live.
 */
const float *tg_image_pixels(const struct TgImage *img);

/**
 * # Safety
 * `img` must be null or a handle not yet freed.
 */
void tg_image_free(struct TgImage *img);

/**
 * Projection estimate from a 256×256 skeleton, default thresholds.
 *
 * # Safety
 * `target` live; `out` writable.
 */
enum TgStatus tg_initial_genotype(const struct TgImage *target, struct TgGenotype **out);

/**
 * Objective value of `candidate` against `target` (both 256×256).
 *
 * # Safety
 * `target`, `candidate` live; `out` writable.
 */
enum TgStatus tg_objective(enum TgObjective kind,
                           const struct TgImage *target,
                           const struct TgImage *candidate,
                           double *out);

/**
 * Runs the GA with default parameters (except `max_epochs` when non-zero
 * and `seed`). A null `init` starts from the projection estimate.
 *
 * # Safety
 * `target` live; `init` null or live; `out` writable.
 */
enum TgStatus tg_fit(const struct TgImage *target,
                     const struct TgGenotype *init,
                     enum TgObjective kind,
                     uint32_t max_epochs,
                     uint64_t seed,
                     struct TgFitResult **out);

/**
 * New handle holding the best genotype of a fit.
 *
 * # Safety
 * `r` live; `out` writable.
 */
enum TgStatus tg_fit_result_best(const struct TgFitResult *r, struct TgGenotype **out);

/**
 * Best objective value; NaN for a null handle.
 *
 * # Safety
 * `r` must be null or live.
 */
double tg_fit_result_objective(const struct TgFitResult *r);

/**
 * # Safety
 * `r` must be null or live.
 */
size_t tg_fit_result_epochs(const struct TgFitResult *r);

/**
 * # Safety
 * `r` must be null or live.
 */
bool tg_fit_result_converged(const struct TgFitResult *r);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void tg_fit_result_free(struct TgFitResult *r);

/**
 * Candidate phenotype (all dividers, model resolution) of `g`.
 *
 * # Safety
 * `g` live; `out` writable.
 */
enum TgStatus tg_candidate_phenotype(const struct TgGenotype *g, struct TgImage **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TABLEGENE_H */
