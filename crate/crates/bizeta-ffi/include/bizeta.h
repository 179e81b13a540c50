#ifndef BIZETA_H
#define BIZETA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function; they mirror the CLI
 * exit codes where the same contract is violated.
 */
typedef enum BizetaStatus {
  BizetaStatus_Ok = 0,
  /**
   * null pointer, malformed UTF-8 or malformed JSON
   */
  BizetaStatus_InvalidArgument = 1,
  /**
   * input violates a mathematical precondition
   */
  BizetaStatus_Validation = 2,
  /**
   * refused because an enumeration bound was exceeded
   */
  BizetaStatus_SizeBound = 3,
  /**
   * brute-force and orbit-linear routes disagree
   */
  BizetaStatus_OracleMismatch = 4,
} BizetaStatus;

/**
 * Opaque handle to a validated lattice together with its derived profile.
 */
typedef struct BizetaLattice BizetaLattice;

/**
 * Creates a lattice handle from a built-in name (heisenberg, abelian_z2,
 * heisenberg_plus_z, free_class2_rank3, free_class3_rank2).
 *
 * # Safety
 * `name` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to receive the handle.
 */
enum BizetaStatus bizeta_lattice_builtin(const char *name, struct BizetaLattice **out);

/**
 * Creates a lattice handle from lattice JSON.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to receive the handle.
 */
enum BizetaStatus bizeta_lattice_from_json(const char *json, struct BizetaLattice **out);

/**
 * Releases a lattice handle.  Passing NULL is a no-op.
 *
 * # Safety
 * `handle` must have been returned by a bizeta_lattice_* constructor and
 * not freed before.
 */
void bizeta_lattice_free(struct BizetaLattice *handle);

/**
 * Structural profile of the lattice as a JSON string.
 *
 * # Safety
 * `handle` must be a live lattice handle; `out` must be valid.
 */
enum BizetaStatus bizeta_lattice_profile_json(const struct BizetaLattice *handle, char **out);

/**
 * Truncated local factor at (p, f) up to level n_max as series JSON.
 * `kind`: 0 = cc, 1 = irr.  `method`: 0 = brute, 1 = linear, 2 = both.
 *
 * # Safety
 * `handle` must be a live lattice handle; `out` must be valid.
 */
enum BizetaStatus bizeta_local_factor(const struct BizetaLattice *handle,
                                      uint64_t p,
                                      uint32_t f,
                                      uint32_t n_max,
                                      uint32_t kind,
                                      uint32_t method,
                                      char **out);

/**
 * Class-number specialization (s1 = 0) of the truncated local factor, as a
 * JSON map from level to coefficient string.
 *
 * # Safety
 * `handle` must be a live lattice handle; `out` must be valid.
 */
enum BizetaStatus bizeta_class_number_series(const struct BizetaLattice *handle,
                                             uint64_t p,
                                             uint32_t f,
                                             uint32_t n_max,
                                             uint32_t method,
                                             char **out);

/**
 * W_c(delta) of a sparse exponent polynomial given as JSON
 * {c, terms:[{coeff, e1, e2, e3}]}; delta is a rational string like "1" or
 * "1/2".  Returns the canonical half-plane list as JSON.
 *
 * # Safety
 * `poly_json` and `delta` must be valid NUL-terminated strings; `out` must
 * be valid.
 */
enum BizetaStatus bizeta_wc_domain(const char *poly_json, const char *delta, char **out);

/**
 * Releases a string returned by this library.  Passing NULL is a no-op.
 *
 * # Safety
 * `s` must have been returned by a bizeta_* function and not freed before.
 */
void bizeta_string_free(char *s);

/**
 * Library version as a static string; do not free.
 */
const char *bizeta_version(void);

#endif  /* BIZETA_H */
