#ifndef PHONON_BOLTZMANN_H
#define PHONON_BOLTZMANN_H

/* Generated by cbindgen from phonon-boltzmann-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible entry point.
 */
typedef enum {
  /**
   * Call succeeded.
   */
  PhononStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  PhononStatus_NullPointer = 1,
  /**
   * An argument was outside its documented domain.
   */
  PhononStatus_InvalidArgument = 2,
  /**
   * Quadrature, eigensolve, or another numerical stage failed.
   */
  PhononStatus_Numerical = 3,
  /**
   * The operating system reported an I/O error.
   */
  PhononStatus_Io = 4,
  /**
   * A cache file exists but is not a valid kernel table.
   */
  PhononStatus_CacheFormat = 5,
  /**
   * The library panicked; the handle state is unspecified.
   */
  PhononStatus_Panic = 6,
} PhononStatus;

/**
 * Opaque handle to an assembled kernel table.
 */
typedef struct PhononKernel PhononKernel;

/**
 * Transport coefficients derived from the collision frequency prefactor.
 */
typedef struct {
  /**
   * Collision frequency prefactor the set was computed from.
   */
  double v0;
  /**
   * Coefficient of the fractional Laplacian of order 4/5.
   */
  double kappa1;
  /**
   * Cross coupling between the temperature and singular modes.
   */
  double kappa2;
  /**
   * Relaxation coefficient of the singular mode.
   */
  double kappa3;
  /**
   * Effective diffusivity kappa1 - kappa2^2 / kappa3.
   */
  double kappa_eff;
} PhononKappaSet;

/**
 * Message describing the most recent failure on the calling thread, or null
 * if no call has failed yet. The pointer stays valid until the next failing
 * call on the same thread.
 */
const char *phonon_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *phonon_version(void);

/**
 * Assemble an n-point kernel table with the given quadrature tolerance and
 * store the handle in `out`. Assembly costs O(n^2) quadratures; n = 400
 * takes a fraction of a second.
 *
 * # Safety
 * `out` must point to writable memory for one pointer.
 */
PhononStatus phonon_kernel_assemble(size_t n, double quad_tol, PhononKernel **out);

/**
 * Load a kernel table previously written by [`phonon_kernel_save`].
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable for one pointer.
 */
PhononStatus phonon_kernel_load(const char *path, PhononKernel **out);

/**
 * Write the table to a checksummed binary cache file.
 *
 * # Safety
 * `kernel` must be a live handle and `path` a NUL-terminated string.
 */
PhononStatus phonon_kernel_save(const PhononKernel *kernel, const char *path);

/**
 * Release a handle returned by assemble or load. Null is a no-op; passing
 * the same handle twice is undefined behaviour.
 *
 * # Safety
 * `kernel` must be null or a handle not freed before.
 */
void phonon_kernel_free(PhononKernel *kernel);

/**
 * Number of grid points of the table behind the handle.
 *
 * # Safety
 * `kernel` must be a live handle and `out` writable for one size_t.
 */
PhononStatus phonon_kernel_size(const PhononKernel *kernel, size_t *out);

/**
 * Scalar summary of the table: the extrapolated prefactor v0 and the
 * measured envelope bounds c1 <= V(k)/|sin(pi k)|^{5/3} <= c2. Any output
 * pointer may be null to skip that value.
 *
 * # Safety
 * `kernel` must be a live handle; non-null outputs must be writable.
 */
PhononStatus phonon_kernel_stats(const PhononKernel *kernel, double *v0, double *c1, double *c2);

/**
 * Grid node k_i in the symmetric cell (-1/2, 1/2].
 *
 * # Safety
 * `kernel` must be a live handle and `out` writable for one double.
 */
PhononStatus phonon_kernel_node(const PhononKernel *kernel, size_t i, double *out);

/**
 * Tabulated kernel entry K(k_i, k_j), cell-averaged near the singular
 * curve.
 *
 * # Safety
 * `kernel` must be a live handle and `out` writable for one double.
 */
PhononStatus phonon_kernel_entry(const PhononKernel *kernel, size_t i, size_t j, double *out);

/**
 * Analytic collision frequency V(k_i) at node i.
 *
 * # Safety
 * `kernel` must be a live handle and `out` writable for one double.
 */
PhononStatus phonon_kernel_frequency(const PhononKernel *kernel, size_t i, double *out);

/**
 * Pointwise collision kernel K(k, k') on the stable branch forms. Fails on
 * the singular curve itself, where only cell averages are defined.
 *
 * # Safety
 * `out` must be writable for one double.
 */
PhononStatus phonon_kernel_point(double k, double kp, double *out);

/**
 * Collision frequency V(k) by direct panel quadrature, independent of any
 * table.
 *
 * # Safety
 * `out` must be writable for one double.
 */
PhononStatus phonon_collision_frequency(double k, double quad_tol, double *out);

/**
 * Dispersion relation omega(k) = |sin(pi k)|.
 */
double phonon_dispersion_omega(double k);

/**
 * Group velocity omega'(k). Fails at k = 0 mod 1 where the derivative is
 * undefined.
 *
 * # Safety
 * `out` must be writable for one double.
 */
PhononStatus phonon_dispersion_group_velocity(double k, double *out);

/**
 * Transport coefficients for a given collision frequency prefactor v0.
 * The integrals are evaluated to near machine precision; v0 must be
 * positive.
 *
 * # Safety
 * `out` must be writable for one PhononKappaSet.
 */
PhononStatus phonon_kappa_set(double v0, PhononKappaSet *out);

#endif /* PHONON_BOLTZMANN_H */
