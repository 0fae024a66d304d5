/* squeezekit C ABI. Generated by cbindgen; do not edit by hand. */

#ifndef SQUEEZEKIT_H
#define SQUEEZEKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum SqkStatus {
  SqkStatus_Ok = 0,
  SqkStatus_NullPointer = 1,
  SqkStatus_InvalidArgument = 2,
  // A coupling violated `|alpha| < 1`.
  SqkStatus_NonNormalizable = 3,
  SqkStatus_ShapeMismatch = 4,
  SqkStatus_BufferTooSmall = 5,
  SqkStatus_ComputationFailed = 6,
  SqkStatus_InternalError = 7,
} SqkStatus;

// Scan classification outcomes.
typedef enum SqkVerdict {
  SqkVerdict_UniqueSqueezedState = 0,
  SqkVerdict_VacuumOnly = 1,
  SqkVerdict_NoSolution = 2,
  SqkVerdict_Inconclusive = 3,
} SqkVerdict;

// Opaque multi-mode Fock state handle.
typedef struct SqkState SqkState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; never freed.
const char *sqk_version(void);

// Release a state handle. Passing NULL is a no-op.
//
// # Safety
// `state` must be a pointer previously returned by a squeezekit constructor
// and not yet freed.
void sqk_state_free(struct SqkState *state);

// Product vacuum over `num_modes` modes at the given cutoff.
enum SqkStatus sqk_state_vacuum(size_t num_modes, size_t cutoff, struct SqkState **out);

// Single-mode squeezed vacuum annihilated by `(a - alpha a^dag)`.
enum SqkStatus sqk_smsv_closed_form(double alpha_re,
                                    double alpha_im,
                                    size_t cutoff,
                                    struct SqkState **out);

// Two-mode squeezed vacuum for the coupled conditions with equal coupling.
enum SqkStatus sqk_tmsv_closed_form(double alpha_re,
                                    double alpha_im,
                                    size_t cutoff,
                                    struct SqkState **out);

// `S(xi)|0>` with `xi = r e^{i theta}`.
enum SqkStatus sqk_squeeze_single(double r, double theta, size_t cutoff, struct SqkState **out);

// `T(xi)|0,0>` with `xi = r e^{i theta}`.
enum SqkStatus sqk_squeeze_two(double r, double theta, size_t cutoff, struct SqkState **out);

// # Safety
// `state` must be a live handle from a squeezekit constructor.
enum SqkStatus sqk_state_num_modes(const struct SqkState *state, size_t *out);

// # Safety
// `state` must be a live handle from a squeezekit constructor.
enum SqkStatus sqk_state_cutoff(const struct SqkState *state, size_t *out);

// Total amplitude count, `(cutoff + 1)^num_modes`.
//
// # Safety
// `state` must be a live handle from a squeezekit constructor.
enum SqkStatus sqk_state_dim(const struct SqkState *state, size_t *out);

// Copy the amplitude tensor into `buffer` as re/im-interleaved doubles.
// `buffer_len` must be at least `2 * dim`.
//
// # Safety
// `state` must be a live handle; `buffer` must point to at least
// `buffer_len` writable doubles.
enum SqkStatus sqk_state_amplitudes(const struct SqkState *state,
                                    double *buffer,
                                    size_t buffer_len);

// `|<a|b>|^2` for normalized states of matching shape.
//
// # Safety
// Both handles must be live.
enum SqkStatus sqk_state_fidelity(const struct SqkState *a, const struct SqkState *b, double *out);

// Mean occupation of a 1-based mode index.
//
// # Safety
// `state` must be a live handle.
enum SqkStatus sqk_state_mean_occupation(const struct SqkState *state,
                                         size_t mode_index,
                                         double *out);

// `alpha = exp(-beta omega / 2)`.
enum SqkStatus sqk_tfd_alpha(double beta, double omega, double *out);

// `r = (1/2) ln coth(beta omega / 4)`.
enum SqkStatus sqk_tfd_r(double beta, double omega, double *out);

// Fill `buffer` with the spectrum as rows of
// `(omega, alpha, r, mean_occupation, thermal_residual)`; `buffer_len`
// must be at least `5 * num_points`. `log_grid` nonzero selects the
// logarithmic grid.
//
// # Safety
// `buffer` must point to at least `buffer_len` writable doubles.
enum SqkStatus sqk_tfd_spectrum(double beta,
                                double omega_min,
                                double omega_max,
                                size_t num_points,
                                int32_t log_grid,
                                double *buffer,
                                size_t buffer_len);

// Scan the cyclic system over the given cutoffs and classify it.
//
// `alphas` holds `2 * num_modes` doubles (re/im interleaved). On success
// `sigma_min_out` (length `cutoffs_len`, may be NULL) receives the smallest
// singular value at each cutoff and `kernel_dim_out` (may be NULL) the
// final kernel dimension.
//
// # Safety
// All non-NULL pointers must reference buffers of the stated lengths.
enum SqkStatus sqk_nogo_classify(size_t num_modes,
                                 const double *alphas,
                                 size_t alphas_len,
                                 const size_t *cutoffs,
                                 size_t cutoffs_len,
                                 double tolerance,
                                 enum SqkVerdict *verdict_out,
                                 double *sigma_min_out,
                                 size_t *kernel_dim_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQUEEZEKIT_H */
