#ifndef PABF_H
#define PABF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum PabfStatus {
  PABF_STATUS_OK = 0,
  PABF_STATUS_NULL_POINTER = 1,
  PABF_STATUS_INVALID_ARGUMENT = 2,
  PABF_STATUS_BUFFER_TOO_SMALL = 3,
  PABF_STATUS_CONFIG = 4,
  PABF_STATUS_DOMAIN = 5,
  PABF_STATUS_UNSTABLE = 6,
  PABF_STATUS_SOLVER = 7,
  PABF_STATUS_IO = 8,
  PABF_STATUS_PANIC = 9,
} PabfStatus;

/**
 * Opaque simulation handle.
 */
typedef struct PabfSimulation PabfSimulation;

/**
 * Reaction-coordinate grid: `n_bins` bins per axis on
 * `[xi_min, xi_max)^2`; `periodic` is 0 or 1.
 */
typedef struct PabfGrid {
  double xi_min;
  double xi_max;
  size_t n_bins;
  uint8_t periodic;
} PabfGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread, or null after a
 * success. The pointer stays valid until the next call on this thread.
 */
const char *pabf_last_error_message(void);

/**
 * Static name of a status code; unknown codes get a generic name.
 */
const char *pabf_status_name(int32_t status);

/**
 * Number of bins and of nodes of a grid.
 *
 * # Safety
 * `n_cells` and `n_nodes` must be valid for writes.
 */
enum PabfStatus pabf_grid_sizes(struct PabfGrid grid, size_t *n_cells, size_t *n_nodes);

/**
 * Creates a simulation from a TOML run configuration.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string and `out` valid for writes.
 */
enum PabfStatus pabf_simulation_new(const char *config_toml, struct PabfSimulation **out);

/**
 * Releases a simulation; null is ignored.
 *
 * # Safety
 * `sim` must come from [`pabf_simulation_new`] and not be used afterwards.
 */
void pabf_simulation_free(struct PabfSimulation *sim);

/**
 * Advances all replicas by `steps` time steps.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum PabfStatus pabf_simulation_advance(struct PabfSimulation *sim, uint64_t steps);

/**
 * Steps taken so far, current time, and the configured number of steps.
 *
 * # Safety
 * `sim` must be a live handle; the outputs valid for writes.
 */
enum PabfStatus pabf_simulation_progress(const struct PabfSimulation *sim,
                                         uint64_t *steps,
                                         double *time,
                                         uint64_t *total_steps);

/**
 * Grid of the simulation.
 *
 * # Safety
 * `sim` must be a live handle and `grid` valid for writes.
 */
enum PabfStatus pabf_simulation_grid(const struct PabfSimulation *sim, struct PabfGrid *grid);

/**
 * Binned mean force estimate, `2 * n_cells` values.
 *
 * # Safety
 * `sim` must be a live handle and `out` hold `len` doubles.
 */
enum PabfStatus pabf_simulation_mean_force(const struct PabfSimulation *sim,
                                           double *out,
                                           size_t len);

/**
 * Samples deposited per bin, `n_cells` values.
 *
 * # Safety
 * `sim` must be a live handle and `out` hold `len` values.
 */
enum PabfStatus pabf_simulation_counts(const struct PabfSimulation *sim, uint64_t *out, size_t len);

/**
 * Projects the current mean force estimate (with the configured weighting)
 * and writes the gradient at the bin centers (`2 * n_cells` values) and
 * the nodal free energy (`n_nodes` values). Either output may be null.
 *
 * # Safety
 * `sim` must be a live handle; non-null outputs must hold their lengths.
 */
enum PabfStatus pabf_simulation_projection(const struct PabfSimulation *sim,
                                           double *gradient,
                                           size_t gradient_len,
                                           double *free_energy,
                                           size_t free_energy_len);

/**
 * Mean transitions per replica of the two trimer bonds (zeros for toys).
 *
 * # Safety
 * `sim` must be a live handle and `out` hold two doubles.
 */
enum PabfStatus pabf_simulation_transitions(const struct PabfSimulation *sim, double *out);

/**
 * Projects a binned vector field (`2 * n_cells` values) onto a gradient:
 * natural boundary conditions on a bounded grid, periodic otherwise. With
 * non-null `weights` (`n_cells` positive values, normalized internally) the
 * weighted problem is solved. Writes the zero-mean nodal potential
 * (`n_nodes` values) and, if `residual` is non-null, the relative residual.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `weights` and `residual`
 * may be null.
 */
enum PabfStatus pabf_project(struct PabfGrid grid,
                             const double *field,
                             size_t field_len,
                             const double *weights,
                             double *potential,
                             size_t potential_len,
                             double *residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PABF_H */
