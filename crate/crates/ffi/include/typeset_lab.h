#ifndef TYPESET_LAB_H
#define TYPESET_LAB_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum TslMeshFormat {
  TSL_MESH_FORMAT_OBJ = 0,
  TSL_MESH_FORMAT_PLY = 1,
} TslMeshFormat;

typedef enum TslMode {
  TSL_MODE_MAIN = 0,
  TSL_MODE_LS = 1,
  TSL_MODE_D2LS = 2,
} TslMode;

typedef enum TslStatus {
  TSL_STATUS_OK = 0,
  TSL_STATUS_NULL_POINTER = 1,
  TSL_STATUS_PARSE = 2,
  TSL_STATUS_INVALID_PARAMS = 3,
  TSL_STATUS_VANISHING_DENOMINATOR = 4,
  TSL_STATUS_DEGENERATE = 5,
  TSL_STATUS_REGIME = 6,
  TSL_STATUS_OUT_OF_RANGE = 7,
  TSL_STATUS_OVERFLOW = 8,
  TSL_STATUS_INDEX = 9,
  TSL_STATUS_UTF8 = 10,
  TSL_STATUS_OTHER = 11,
  TSL_STATUS_PANIC = 12,
} TslStatus;

// Opaque dimension parameters `(d, β, γ)`.
typedef struct TslParams TslParams;

// Opaque convex polytope with exact vertices.
typedef struct TslPolytope TslPolytope;

// `num / den` in lowest terms with `den > 0`.
typedef struct TslRational {
  int64_t num;
  int64_t den;
} TslRational;

// `(1/p, 1/q, 1/r)`.
typedef struct TslTriple {
  struct TslRational ip;
  struct TslRational iq;
  struct TslRational ir;
} TslTriple;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread; empty after success.
const char *tsl_last_error(void);

// Static version string.
const char *tsl_version(void);

// Parameters from rational strings such as `"7/10"`; requires `d >= 2`, `0 < beta <= gamma <= 1`.
//
// # Safety
// `beta` and `gamma` must be NUL-terminated strings; `out` must be writable.
enum TslStatus tsl_params_new(uint32_t d,
                              const char *beta,
                              const char *gamma,
                              struct TslParams **out);

// As [`tsl_params_new`] with numeric rationals.
//
// # Safety
// `out` must be writable.
enum TslStatus tsl_params_new_rational(uint32_t d,
                                       struct TslRational beta,
                                       struct TslRational gamma,
                                       struct TslParams **out);

// # Safety
// `p` must come from `tsl_params_new*` and not be used afterwards; null is ignored.
void tsl_params_free(struct TslParams *p);

// Exact named vertex, e.g. `"Q2"` or `"QD1"`; `flagged` (optional) reports coordinates outside `[0,1]`.
//
// # Safety
// `p` must be a live handle, `name` a NUL-terminated string, `out` writable; `flagged` may be null.
enum TslStatus tsl_named_vertex(const struct TslParams *p,
                                const char *name,
                                struct TslTriple *out,
                                bool *flagged);

// Largest uniform decay margin at `x` over the estimates of `mode`; `feasible` is false when none exists.
//
// # Safety
// `p` must be a live handle; `x`, `out` and `feasible` must be valid pointers.
enum TslStatus tsl_margin(const struct TslParams *p,
                          enum TslMode mode,
                          const struct TslTriple *x,
                          struct TslRational *out,
                          bool *feasible);

// Convex hull of the theorem vertex list for `mode`.
//
// # Safety
// `p` must be a live handle and `out` writable.
enum TslStatus tsl_theorem_hull(const struct TslParams *p,
                                enum TslMode mode,
                                struct TslPolytope **out);

// # Safety
// `h` must be a live handle or null (returns 0).
size_t tsl_polytope_vertex_count(const struct TslPolytope *h);

// # Safety
// `h` must be a live handle or null (returns 0).
size_t tsl_polytope_facet_count(const struct TslPolytope *h);

// # Safety
// `h` must be a live handle and `out` writable.
enum TslStatus tsl_polytope_vertex(const struct TslPolytope *h, size_t i, struct TslTriple *out);

// Triangulated OBJ or PLY text; release it with [`tsl_string_free`].
//
// # Safety
// `h` must be a live handle and `out` writable.
enum TslStatus tsl_polytope_export(const struct TslPolytope *h,
                                   enum TslMeshFormat format,
                                   char **out);

// # Safety
// `h` must come from `tsl_theorem_hull` and not be used afterwards; null is ignored.
void tsl_polytope_free(struct TslPolytope *h);

// # Safety
// `s` must come from this library and not be used afterwards; null is ignored.
void tsl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TYPESET_LAB_H */
