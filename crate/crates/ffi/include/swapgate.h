#ifndef SWAPGATE_H
#define SWAPGATE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every call. Values are stable across releases.
typedef enum SgStatus {
  SG_OK = 0,
  SG_INVALID_INPUT = 1,
  SG_CONFIG = 2,
  SG_DIVERGED = 3,
  SG_INFEASIBLE = 4,
  SG_NUMERICAL = 5,
  SG_IO = 6,
  SG_NULL_POINTER = 7,
  SG_PANIC = 8,
} SgStatus;

// Complex field on a grid, values in row-major order with x1 fastest.
typedef struct SgField SgField;

// Run configuration.
typedef struct SgRunConfig SgRunConfig;

typedef struct SgReport {
  double f_opposite;
  double f_parallel;
  double f_min;
  double swap_overlap;
  // Interaction scale the run used.
  double scale;
  double norm_drift;
  double edge_mass;
  uint64_t steps;
  // +1 or -1: which sqrt-SWAP branch was targeted.
  int32_t branch_sign;
} SgReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call on the same thread.
const char *sg_last_error_message(void);

// Parses a TOML run configuration.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum SgStatus sg_config_from_toml(const char *toml, struct SgRunConfig **out);

// Configuration of a built-in experiment such as `"fig2"`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum SgStatus sg_config_from_preset(const char *name, struct SgRunConfig **out);

// # Safety
// `cfg` must come from this library and not be used afterwards. Null is ignored.
void sg_config_free(struct SgRunConfig *cfg);

// # Safety
// `cfg` must be a live handle.
enum SgStatus sg_config_set_grid_n(struct SgRunConfig *cfg, uintptr_t n);

// Fixes the interaction scale; a negative value clears it so runs calibrate.
//
// # Safety
// `cfg` must be a live handle.
enum SgStatus sg_config_set_scale(struct SgRunConfig *cfg, double scale);

// Gate duration in seconds.
//
// # Safety
// `cfg` must be a live handle and `out` a valid pointer.
enum SgStatus sg_config_t_gate(const struct SgRunConfig *cfg, double *out);

// Resolved configuration as TOML. Release it with [`sg_string_free`].
//
// # Safety
// `cfg` must be a live handle and `out` a valid pointer.
enum SgStatus sg_config_to_toml(const struct SgRunConfig *cfg, char **out);

// # Safety
// `s` must come from this library and not be used afterwards. Null is ignored.
void sg_string_free(char *s);

// Full 2D gate. Calibrates the scale first when the config leaves it open.
// `final_field` may be null; otherwise it receives the opposite-spin state
// at the end of the gate.
//
// # Safety
// `cfg` must be a live handle, `report` a valid pointer and `final_field`
// null or a valid pointer.
enum SgStatus sg_run_fast_gate(const struct SgRunConfig *cfg,
                               struct SgReport *report,
                               struct SgField **final_field);

// Cheap relative-coordinate estimate of the gate in the harmonic
// approximation. Needs a fixed scale.
//
// # Safety
// `cfg` must be a live handle and `report` a valid pointer.
enum SgStatus sg_run_relative(const struct SgRunConfig *cfg, struct SgReport *report);

// Points per axis, dimension and extent in metres.
//
// # Safety
// `field` must be a live handle; the outputs must be valid pointers.
enum SgStatus sg_field_shape(const struct SgField *field,
                             uintptr_t *n,
                             uintptr_t *dim,
                             double *extent);

// Copies the values as interleaved (re, im) pairs. `len` is the number of
// doubles in `buf` and must be at least twice the number of grid points.
//
// # Safety
// `field` must be a live handle and `buf` valid for `len` writes.
enum SgStatus sg_field_copy(const struct SgField *field, double *buf, uintptr_t len);

// `∫|psi|^2`.
//
// # Safety
// `field` must be a live handle and `out` a valid pointer.
enum SgStatus sg_field_norm(const struct SgField *field, double *out);

// # Safety
// `field` must come from this library and not be used afterwards. Null is ignored.
void sg_field_free(struct SgField *field);

// Library version, static string.
const char *sg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWAPGATE_H */
