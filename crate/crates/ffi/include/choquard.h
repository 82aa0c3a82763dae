/* C interface to the choquard numerical toolkit. */

#ifndef CHOQUARD_H
#define CHOQUARD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
enum ChqStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  CHQ_STATUS_OK = 0,
  CHQ_STATUS_NULL_POINTER = 1,
  CHQ_STATUS_LENGTH_MISMATCH = 2,
  CHQ_STATUS_BUFFER_TOO_SMALL = 3,
  CHQ_STATUS_PARAMETER_DOMAIN = 4,
  CHQ_STATUS_INVALID_GRID = 5,
  CHQ_STATUS_GRID_MISMATCH = 6,
  CHQ_STATUS_DOMAIN = 7,
  CHQ_STATUS_SINGULAR_POINT = 8,
  CHQ_STATUS_QUADRATURE_NONCONVERGENCE = 9,
  CHQ_STATUS_FIT_SINGULAR = 10,
  CHQ_STATUS_EIGEN_BREAKDOWN = 11,
  CHQ_STATUS_EXPONENT_RELATION = 12,
  CHQ_STATUS_NON_CONVERGENCE = 13,
  CHQ_STATUS_DIVERGENCE = 14,
  CHQ_STATUS_CACHE = 15,
  CHQ_STATUS_CONFIG = 16,
  CHQ_STATUS_IO = 17,
  CHQ_STATUS_PANIC = 18,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum ChqStatus ChqStatus;
#else
typedef int32_t ChqStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Radial mapping of a grid.
enum ChqMapping
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  CHQ_MAPPING_LOG = 0,
  CHQ_MAPPING_ALGEBRAIC = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum ChqMapping ChqMapping;
#else
typedef int32_t ChqMapping;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Outcome of a nondegeneracy run.
enum ChqVerdict
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  CHQ_VERDICT_NONDEGENERATE = 0,
  CHQ_VERDICT_DEGENERATE = 1,
  CHQ_VERDICT_INCONCLUSIVE = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum ChqVerdict ChqVerdict;
#else
typedef int32_t ChqVerdict;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

// Opaque radial grid.
typedef struct ChqGrid ChqGrid;

// Opaque spectrum report.
typedef struct ChqSpectrumReport ChqSpectrumReport;

// Closed-form constants of a `(N, mu)` pair.
typedef struct ChqConstants {
  double two_star_mu;
  double riesz_norm;
  double hls_sharp;
  double c_star;
  double sobolev;
  double s_star_hl;
  double bubble_amplitude;
} ChqConstants;

// Options of [`chq_spectrum_report_new`].
typedef struct ChqSpectrumOptions {
  // Highest spherical-harmonic degree, at least 2.
  size_t ell_max;
  // Zero tolerance; a non-positive or NaN value selects automatic calibration.
  double tau;
  // Eigenvalues kept per sector.
  size_t keep;
} ChqSpectrumOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *chq_version(void);

// Message of the last failed call on this thread, or `NULL` if none.
// The pointer stays valid until the next failing call on the same thread.
const char *chq_last_error_message(void);

// Forget the last error message of this thread.
void chq_clear_last_error(void);

// Fill `out` with the constants of dimension `n` and exponent `mu`.
//
// # Safety
// `out` must be NULL or point to writable memory for one `ChqConstants`.
ChqStatus chq_constants(size_t n, double mu, struct ChqConstants *out);

// Grid of `size` nodes on `[0, cutoff]` in dimension `dim`.
//
// # Safety
// `out` must be NULL or point to writable storage for one handle pointer.
ChqStatus chq_grid_new(size_t dim,
                       double cutoff,
                       size_t size,
                       ChqMapping mapping,
                       struct ChqGrid **out);

// Logarithmic grid sized for a bubble of width `width`.
//
// # Safety
// `out` must be NULL or point to writable storage for one handle pointer.
ChqStatus chq_grid_new_bubble(size_t dim, double width, size_t size, struct ChqGrid **out);

// Release a grid.
//
// # Safety
// `grid` must be NULL or a handle from `chq_grid_new*` not yet freed.
void chq_grid_free(struct ChqGrid *grid);

// Number of nodes, or 0 for a NULL handle.
//
// # Safety
// `grid` must be NULL or a live grid handle.
size_t chq_grid_len(const struct ChqGrid *grid);

// Copy the node radii into `out[0..len]`.
//
// # Safety
// `grid` must be a live handle and `out` must hold `len` doubles.
ChqStatus chq_grid_nodes(const struct ChqGrid *grid, double *out, size_t len);

// Nodal values of the explicit solution of width `t` for `(dim(grid), mu)`.
//
// # Safety
// `grid` must be a live handle and `out` must hold `len` doubles.
ChqStatus chq_umu_profile(const struct ChqGrid *grid, double mu, double t, double *out, size_t len);

// Weak residual of the scalar equation at the profile `values`.
//
// # Safety
// `grid` must be a live handle, `values` must hold `len` doubles and
// `residual` must be writable.
ChqStatus chq_pde_residual(const struct ChqGrid *grid,
                           double mu,
                           const double *values,
                           size_t len,
                           double *residual);

// Rayleigh quotient of the profile `values`.
//
// # Safety
// As for [`chq_pde_residual`].
ChqStatus chq_rayleigh_quotient(const struct ChqGrid *grid,
                                double mu,
                                const double *values,
                                size_t len,
                                double *quotient);

// Riesz potential of the radial profile `values`, written to `out`.
// With `normalized` nonzero the kernel carries the normalizing constant.
//
// # Safety
// `grid` must be a live handle; `values` and `out` must each hold `len` doubles.
ChqStatus chq_riesz_convolve(const struct ChqGrid *grid,
                             double mu,
                             const double *values,
                             double *out,
                             size_t len,
                             int32_t normalized);

// Default options: `ell_max = 6`, automatic `tau`, six eigenvalues per sector.
struct ChqSpectrumOptions chq_spectrum_options_default(void);

// Linearize at the solution of width `t` on `grid` and classify its kernel.
//
// # Safety
// `grid` must be a live handle, `opts` NULL (defaults) or valid, and `out`
// writable storage for one handle pointer.
ChqStatus chq_spectrum_report_new(const struct ChqGrid *grid,
                                  double mu,
                                  double t,
                                  const struct ChqSpectrumOptions *opts,
                                  struct ChqSpectrumReport **out);

// Release a report.
//
// # Safety
// `report` must be NULL or a handle from [`chq_spectrum_report_new`] not yet freed.
void chq_spectrum_report_free(struct ChqSpectrumReport *report);

// Summed multiplicity of the zero modes, or 0 for NULL.
//
// # Safety
// `report` must be NULL or a live handle.
size_t chq_spectrum_kernel_dimension(const struct ChqSpectrumReport *report);

// Verdict of the report; NULL reads as inconclusive.
//
// # Safety
// `report` must be NULL or a live handle.
ChqVerdict chq_spectrum_verdict(const struct ChqSpectrumReport *report);

// Zero tolerance used by the report, NaN for NULL.
//
// # Safety
// `report` must be NULL or a live handle.
double chq_spectrum_tau(const struct ChqSpectrumReport *report);

// Number of sectors in the report (`ell_max + 1`), 0 for NULL.
//
// # Safety
// `report` must be NULL or a live handle.
size_t chq_spectrum_sector_count(const struct ChqSpectrumReport *report);

// Copy the smallest eigenvalues of sector `ell` into `out`, at most `cap`
// of them; the number available is stored in `count`.
//
// # Safety
// `report` must be a live handle, `out` must hold `cap` doubles (may be NULL
// when `cap == 0`) and `count` must be writable.
ChqStatus chq_spectrum_eigenvalues(const struct ChqSpectrumReport *report,
                                   size_t ell,
                                   double *out,
                                   size_t cap,
                                   size_t *count);

// Serialize the full report as JSON into `buf`.
//
// # Safety
// `report` must be a live handle, `buf` must hold `cap` bytes (may be NULL
// when `cap == 0`) and `needed` must be NULL or writable.
ChqStatus chq_spectrum_report_json(const struct ChqSpectrumReport *report,
                                   char *buf,
                                   size_t cap,
                                   size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHOQUARD_H */
