#ifndef CORNERLAB_H
#define CORNERLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CornerlabGroup {
  CORNERLAB_GROUP_Z = 0,
  CORNERLAB_GROUP_Z2 = 1,
  CORNERLAB_GROUP_TWO_Z = 2,
} CornerlabGroup;

typedef enum CornerlabStatus {
  CORNERLAB_STATUS_OK = 0,
  CORNERLAB_STATUS_NULL_POINTER = 1,
  CORNERLAB_STATUS_INVALID_INPUT = 2,
  CORNERLAB_STATUS_MODEL = 3,
  CORNERLAB_STATUS_SYMMETRY = 4,
  CORNERLAB_STATUS_UNSUPPORTED = 5,
  CORNERLAB_STATUS_ASSUMPTION = 6,
  CORNERLAB_STATUS_RESOLUTION = 7,
  CORNERLAB_STATUS_NUMERICAL = 8,
  CORNERLAB_STATUS_IO = 9,
  CORNERLAB_STATUS_PANIC = 10,
} CornerlabStatus;

/**
 * Opaque model handle.
 */
typedef struct CornerlabModel CornerlabModel;

typedef struct CornerlabInvariant {
  int64_t value;
  enum CornerlabGroup group;
  /**
   * Spatial dimension of the model.
   */
  size_t n;
  /**
   * Codimension of the corner.
   */
  size_t k;
  int64_t l;
  /**
   * Smallest face-compression gap seen while checking the corner.
   */
  double face_gap;
} CornerlabInvariant;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *cornerlab_last_error(void);

const char *cornerlab_version(void);

/**
 * Parses a model document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum CornerlabStatus cornerlab_model_from_json(const char *json, struct CornerlabModel **out);

/**
 * Reads a model document from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum CornerlabStatus cornerlab_model_load(const char *path, struct CornerlabModel **out);

/**
 * Builds one of the bundled models: `ssh` (v, w), `kitaev`, `pwave`,
 * `helical_diii`, `class_c` (mu, t, delta) or `cii_chain` (v, w, c).
 *
 * # Safety
 * `name` must be a NUL-terminated string, `params` must point to `nparams`
 * doubles and `out` must be writable.
 */
enum CornerlabStatus cornerlab_model_builtin(const char *name,
                                             const double *params,
                                             size_t nparams,
                                             struct CornerlabModel **out);

/**
 * Releases a model handle. NULL is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void cornerlab_model_free(struct CornerlabModel *model);

/**
 * Serializes a model; release the result with `cornerlab_string_free`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum CornerlabStatus cornerlab_model_to_json(const struct CornerlabModel *model, char **out);

/**
 * Spatial dimension and orbitals per site.
 *
 * # Safety
 * `model` must be a live handle; either output may be NULL.
 */
enum CornerlabStatus cornerlab_model_shape(const struct CornerlabModel *model,
                                           size_t *dim,
                                           size_t *orbitals);

/**
 * Altland-Zirnbauer class of a model. The string is static.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum CornerlabStatus cornerlab_model_class(const struct CornerlabModel *model, const char **out);

/**
 * Product Hamiltonian of two models, in the first form whose class the
 * search settles on.
 *
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum CornerlabStatus cornerlab_product(const struct CornerlabModel *a,
                                       const struct CornerlabModel *b,
                                       struct CornerlabModel **out);

/**
 * Corner invariant on the orthant window of side `l` with the default
 * thresholds.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum CornerlabStatus cornerlab_corner_invariant(const struct CornerlabModel *model,
                                                size_t k,
                                                int64_t l,
                                                struct CornerlabInvariant *out);

/**
 * Strong corner invariant group, e.g. `Z2` or `0`. Release the result with
 * `cornerlab_string_free`.
 *
 * # Safety
 * `class` must be a NUL-terminated string and `out` writable.
 */
enum CornerlabStatus cornerlab_strong_group(const char *class_, size_t n, size_t k, char **out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void cornerlab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORNERLAB_H */
