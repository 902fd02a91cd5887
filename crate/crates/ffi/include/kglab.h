#ifndef KGLAB_H
#define KGLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KglabStatus {
  KGLAB_STATUS_OK = 0,
  KGLAB_STATUS_NULL_POINTER = 1,
  KGLAB_STATUS_INVALID_ARGUMENT = 2,
  KGLAB_STATUS_INVALID_GRID = 3,
  KGLAB_STATUS_GRID_MISMATCH = 4,
  KGLAB_STATUS_CFL = 5,
  KGLAB_STATUS_BLOW_UP = 6,
  KGLAB_STATUS_NON_RESONANT = 7,
  KGLAB_STATUS_VACUUM = 8,
  KGLAB_STATUS_UNNORMALIZED = 9,
  KGLAB_STATUS_CONSTRAINT = 10,
  KGLAB_STATUS_BUFFER_TOO_SMALL = 11,
  KGLAB_STATUS_PANIC = 12,
  KGLAB_STATUS_OTHER = 13,
} KglabStatus;

typedef struct KglabFluid KglabFluid;

typedef struct KglabGrid KglabGrid;

typedef struct KglabKg KglabKg;

typedef struct KglabKgDiagnostics {
  double time;
  double energy;
  double charge;
} KglabKgDiagnostics;

typedef struct KglabModulated {
  double h;
  double h0;
  double g;
  double n1;
  double n2;
  double n3;
  double n4;
} KglabModulated;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the buffer size needed for the full message.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t kglab_last_error(char *buf, size_t len);

// Creates a periodic grid with `n[a]` points and length `lengths[a]` per axis.
//
// # Safety
// `n` and `lengths` must point to `dim` values; `out` must be writable.
enum KglabStatus kglab_grid_new(size_t dim,
                                const size_t *n,
                                const double *lengths,
                                struct KglabGrid **out);

// Number of grid points, or 0 for a null grid.
//
// # Safety
// `grid` must be null or a live grid handle.
size_t kglab_grid_len(const struct KglabGrid *grid);

// # Safety
// `grid` must be null or a handle from [`kglab_grid_new`] not yet freed.
void kglab_grid_free(struct KglabGrid *grid);

// Exact plane wave `A e^{i(k.x - omega t)/eps}` with `k` of length `dim`.
//
// # Safety
// `grid` must be live, `k` must point to `dim` values, `out` writable.
enum KglabStatus kglab_kg_plane_wave(const struct KglabGrid *grid,
                                     double gamma,
                                     double amp_re,
                                     double amp_im,
                                     const double *k,
                                     double eps,
                                     struct KglabKg **out);

// Wave state from sampled `phi` and `d_t phi`, each `2 n` interleaved doubles.
//
// # Safety
// `grid` must be live, `phi` and `phi_t` must point to `2 n` values.
enum KglabStatus kglab_kg_from_fields(const struct KglabGrid *grid,
                                      double gamma,
                                      double eps,
                                      const double *phi,
                                      const double *phi_t,
                                      struct KglabKg **out);

// Largest stable step for the current state.
//
// # Safety
// `kg` must be live and `out` writable.
enum KglabStatus kglab_kg_dt_max(const struct KglabKg *kg, double *out);

// One step of size `dt`. On failure the state is left unchanged.
//
// # Safety
// `kg` must be live.
enum KglabStatus kglab_kg_step(struct KglabKg *kg, double dt);

// Steps to time `t` with steps of `dt_safety` times the stability limit.
//
// # Safety
// `kg` must be live.
enum KglabStatus kglab_kg_advance(struct KglabKg *kg, double t, double dt_safety);

// # Safety
// `kg` must be live and `out` writable.
enum KglabStatus kglab_kg_diagnostics(const struct KglabKg *kg, struct KglabKgDiagnostics *out);

// Copies `phi` as `2 n` interleaved doubles into `buf` of `len` doubles.
//
// # Safety
// `kg` must be live and `buf` must point to `len` writable doubles.
enum KglabStatus kglab_kg_copy_phi(const struct KglabKg *kg, double *buf, size_t len);

// # Safety
// `kg` must be null or a handle not yet freed.
void kglab_kg_free(struct KglabKg *kg);

// Fluid state from spatial velocity `u` (`dim * n`, component-major) and
// `f = sqrt(V'(rho))` (`n` values).
//
// # Safety
// `grid` must be live; `u` and `f` must point to the stated counts.
enum KglabStatus kglab_fluid_new(const struct KglabGrid *grid,
                                 double gamma,
                                 const double *u,
                                 const double *f,
                                 struct KglabFluid **out);

// Constant fluid state with spatial velocity `u` (`dim` values) and density `rho`.
//
// # Safety
// `grid` must be live, `u` must point to `dim` values.
enum KglabStatus kglab_fluid_constant(const struct KglabGrid *grid,
                                      double gamma,
                                      const double *u,
                                      double rho,
                                      struct KglabFluid **out);

// # Safety
// `fluid` must be live and `out` writable.
enum KglabStatus kglab_fluid_dt_max(const struct KglabFluid *fluid, double *out);

// One step of size `dt`. On failure the state is left unchanged.
//
// # Safety
// `fluid` must be live.
enum KglabStatus kglab_fluid_step(struct KglabFluid *fluid, double dt);

// Steps to time `t` at the stability limit.
//
// # Safety
// `fluid` must be live.
enum KglabStatus kglab_fluid_advance(struct KglabFluid *fluid, double t);

// `max |U^a U_a + 1 + 2 V'(rho)|`.
//
// # Safety
// `fluid` must be live and `out` writable.
enum KglabStatus kglab_fluid_normalization(const struct KglabFluid *fluid, double *out);

// # Safety
// `fluid` must be live and `out` writable.
enum KglabStatus kglab_fluid_time(const struct KglabFluid *fluid, double *out);

// # Safety
// `fluid` must be null or a handle not yet freed.
void kglab_fluid_free(struct KglabFluid *fluid);

// Modulated energy and convergence norms of a wave/fluid pair built on the
// same grid with the same exponent.
//
// # Safety
// `kg` and `fluid` must be live and `out` writable.
enum KglabStatus kglab_modulated_energy(const struct KglabKg *kg,
                                        const struct KglabFluid *fluid,
                                        struct KglabModulated *out);

// `Theta(x, y) = V(x) - V(y) - V'(y)(x - y)` for `x, y >= 0`.
//
// # Safety
// `out` must be writable.
enum KglabStatus kglab_theta(double gamma, double x, double y, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KGLAB_H */
