#ifndef WEYL3_H
#define WEYL3_H

/* Generated by cbindgen from the weyl3-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes of every C entry point.
typedef enum Weyl3Status {
  // Success; all checks passed where checks were run.
  WEYL3_STATUS_OK = 0,
  // The computation ran but at least one verification check failed.
  WEYL3_STATUS_CHECK_FAILED = 1,
  // Malformed input: JSON, expression syntax, family guards.
  WEYL3_STATUS_INVALID_INPUT = 2,
  // A required pointer argument was null.
  WEYL3_STATUS_NULL_POINTER = 3,
  // An input string was not valid UTF-8.
  WEYL3_STATUS_INVALID_UTF8 = 4,
  // Internal failure (a panic was caught at the boundary).
  WEYL3_STATUS_INTERNAL = 5,
} Weyl3Status;

// Opaque handle over a built canonical structure.
typedef struct Weyl3Structure Weyl3Structure;

// Library version as a static string; do not free.
const char *weyl3_version(void);

// Build a structure from a JSON spec. On success `*out` owns the handle;
// release it with [`weyl3_structure_free`].
//
// # Safety
// `spec_json` must be a valid NUL-terminated string and `out` a valid
// pointer to a pointer slot.
enum Weyl3Status weyl3_structure_new(const char *spec_json,
                                     struct Weyl3Structure **out,
                                     char **out_error);

// Release a structure handle. Null is ignored.
//
// # Safety
// `handle` must come from [`weyl3_structure_new`] and not be freed twice.
void weyl3_structure_free(struct Weyl3Structure *handle);

// Release a string returned through any `out_json` parameter.
//
// # Safety
// `s` must come from this library and not be freed twice.
void weyl3_string_free(char *s);

// Run the verification battery of a built structure. `*out_json` receives
// the JSON report (checks, classification, notes).
//
// # Safety
// `handle` must be a live handle from [`weyl3_structure_new`].
enum Weyl3Status weyl3_check(const struct Weyl3Structure *handle,
                             uintptr_t points,
                             uint64_t seed,
                             double tol,
                             char **out_json);

// Classify the holonomy subalgebra of a built structure.
//
// # Safety
// `handle` must be a live handle from [`weyl3_structure_new`].
enum Weyl3Status weyl3_classify(const struct Weyl3Structure *handle,
                                uintptr_t points,
                                uint64_t seed,
                                char **out_json);

// Einstein-Weyl / dKP equivalence for a coefficient expression K.
//
// # Safety
// `k_expr` must be a valid NUL-terminated string.
enum Weyl3Status weyl3_dkp(const char *k_expr,
                           uintptr_t points,
                           uint64_t seed,
                           double tol,
                           char **out_json);

// Run the full verification battery.
//
// # Safety
// `out_json`, when non-null, must be a valid pointer slot.
enum Weyl3Status weyl3_suite(uint64_t seed, double tol, char **out_json);

#endif /* WEYL3_H */
