#ifndef RAMSEYKIT_H
#define RAMSEYKIT_H

/* Generated by cbindgen from ramseykit-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every C-API call.
typedef enum RkStatus {
  // The call completed; out-parameters are valid.
  RkStatus_Ok = 0,
  // A required pointer argument was NULL.
  RkStatus_NullArgument = 1,
  // A string argument was not valid UTF-8.
  RkStatus_InvalidUtf8 = 2,
  // Malformed textual input (structure, class spec, formula, map).
  RkStatus_ParseError = 3,
  // An operation precondition was violated.
  RkStatus_Precondition = 4,
  // An internal panic was caught; the handle states are unchanged.
  RkStatus_Internal = 5,
} RkStatus;

// Opaque handle to a finite relational structure.
typedef struct RkStructure RkStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// A human-readable description of the most recent failure on this thread.
// The pointer stays valid until the next failing call on the same thread;
// do not free it.
const char *rk_last_error_message(void);

// Releases a string allocated by this library.
//
// # Safety
// `ptr` must come from a `char**` out-parameter of this library and must
// not have been freed already. NULL is accepted and ignored.
void rk_string_free(char *ptr);

// Parses a structure from its text format into a fresh handle.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be a valid pointer.
enum RkStatus rk_structure_parse(const char *text, struct RkStructure **out);

// Releases a structure handle.
//
// # Safety
// `ptr` must come from this library and must not have been freed already.
// NULL is accepted and ignored.
void rk_structure_free(struct RkStructure *ptr);

// Deep-copies a structure handle.
//
// # Safety
// `s` must be a live handle; `out` must be a valid pointer.
enum RkStatus rk_structure_clone(const struct RkStructure *s, struct RkStructure **out);

// Renders a structure in the text format.
//
// # Safety
// `s` must be a live handle; `out` receives an owned string (release with
// [`rk_string_free`]).
enum RkStatus rk_structure_render(const struct RkStructure *s, char **out);

// The domain size of a structure.
//
// # Safety
// `s` must be a live handle; `out` must be a valid pointer.
enum RkStatus rk_structure_size(const struct RkStructure *s, uintptr_t *out);

// The canonical code of the structure's isomorphism type, as a hex string.
// Equal strings mean isomorphic structures.
//
// # Safety
// `s` must be a live handle; `out` receives an owned string.
enum RkStatus rk_canonical_code_hex(const struct RkStructure *s, char **out);

// Whether two structures are isomorphic (1) or not (0).
//
// # Safety
// `a` and `b` must be live handles; `out` must be a valid pointer.
enum RkStatus rk_isomorphic(const struct RkStructure *a, const struct RkStructure *b, int32_t *out);

// The number of embeddings of `a` into `c`.
//
// # Safety
// `a` and `c` must be live handles; `out` must be a valid pointer.
enum RkStatus rk_embedding_count(const struct RkStructure *a,
                                 const struct RkStructure *c,
                                 uintptr_t *out);

// Decides the partition arrow C → (B)^A_r. `verdict_out` receives 1 when
// the arrow holds and 0 otherwise; on 0, `certificate_out` (when non-NULL)
// receives the bad coloring as comma-separated colors in embedding order
// (release with [`rk_string_free`]); on 1 it receives NULL.
//
// # Safety
// `a`, `b`, `c` must be live handles; `verdict_out` must be valid;
// `certificate_out` may be NULL.
enum RkStatus rk_check_arrow(const struct RkStructure *a,
                             const struct RkStructure *b,
                             const struct RkStructure *c,
                             uint32_t colors,
                             int32_t *verdict_out,
                             char **certificate_out);

// Membership of a structure in a class given by the class-spec DSL
// (`LO`, `G`, `T`, `F(3)`, `PLE`, `perm`, `wedge(…)`, `rename(…)`,
// `forget(…)`). `out` receives 1 or 0.
//
// # Safety
// `spec` must be NUL-terminated; `s` must be a live handle; `out` must be
// a valid pointer.
enum RkStatus rk_class_membership(const char *spec, const struct RkStructure *s, int32_t *out);

// The number of members of the class at the given size, one per
// isomorphism class.
//
// # Safety
// `spec` must be NUL-terminated; `out` must be a valid pointer.
enum RkStatus rk_member_count(const char *spec, uintptr_t size, uintptr_t *out);

// Bounded strong-amalgamation check for a class. `out` receives 1 when
// every diagram up to the bound has a strong amalgam, 0 otherwise.
//
// # Safety
// `spec` must be NUL-terminated; `out` must be a valid pointer.
enum RkStatus rk_check_sap(const char *spec, uintptr_t max_size, int32_t *out);

// The full product of two structures with disjoint signatures, as a fresh
// handle.
//
// # Safety
// `left` and `right` must be live handles; `out` must be a valid pointer.
enum RkStatus rk_full_product(const struct RkStructure *left,
                              const struct RkStructure *right,
                              struct RkStructure **out);

// The reduct of a structure to a comma-separated list of symbol names, as
// a fresh handle.
//
// # Safety
// `s` must be a live handle; `keep` must be NUL-terminated; `out` must be
// a valid pointer.
enum RkStatus rk_reduct(const struct RkStructure *s, const char *keep, struct RkStructure **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAMSEYKIT_H */
