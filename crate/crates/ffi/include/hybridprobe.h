/*
 * C interface to the hybridprobe Fisher-information toolkit.
 *
 * Every function returns an HpStatus; on failure a description is available
 * from hp_last_error_message() on the same thread. Times are in units of
 * 1/omega_m. Fisher matrices are 2x2 over (g1, g2), row-major.
 */


#ifndef HYBRIDPROBE_H
#define HYBRIDPROBE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every call.
typedef enum HpStatus {
  HP_STATUS_OK = 0,
  // A required pointer argument was null.
  HP_STATUS_NULL_POINTER = 1,
  // Out-of-range parameter, dimension or time grid.
  HP_STATUS_INVALID_ARGUMENT = 2,
  // A Fock cutoff is too small for the requested state.
  HP_STATUS_TRUNCATION = 3,
  // Integration, positivity, linear-algebra or consistency failure.
  HP_STATUS_NUMERICAL = 4,
  // Internal panic caught at the boundary.
  HP_STATUS_PANIC = 5,
} HpStatus;

// Time window searched for the optimal time.
typedef enum HpWindow {
  // `t <= 2 pi`.
  HP_WINDOW_SHORT = 0,
  // `t <= 6 pi`.
  HP_WINDOW_LONG = 1,
} HpWindow;

// Bound compared by an efficiency ratio.
typedef enum HpScenario {
  HP_SCENARIO_SINGLE_G1 = 0,
  HP_SCENARIO_SINGLE_G2 = 1,
  HP_SCENARIO_NUISANCE_G1 = 2,
  HP_SCENARIO_NUISANCE_G2 = 3,
  HP_SCENARIO_JOINT = 4,
} HpScenario;

// Opaque model handle.
typedef struct HpModel HpModel;

// Hamiltonian parameters in units of `omega_m`.
typedef struct HpParams {
  double omega_c;
  double omega_q;
  double omega_m;
  double g1;
  double g2;
} HpParams;

// Fock cutoffs and the allowed truncation deficit of initial states.
typedef struct HpDims {
  uintptr_t cavity;
  uintptr_t mechanics;
  double truncation_tolerance;
} HpDims;

// A Fisher matrix with its bounds; infinite bounds mark singular matrices.
typedef struct HpFisherEntry {
  // Row-major `[Q11, Q12, Q21, Q22]`.
  double qfi[4];
  // `1/Q11, 1/Q22`.
  double inv_single[2];
  // `(Q^-1)_11, (Q^-1)_22`.
  double nuisance[2];
  // `Tr[Q^-1]`.
  double scalar;
  bool singular;
} HpFisherEntry;

// Global and reduced-state Fisher information at one time.
typedef struct HpFisherRecord {
  double t;
  struct HpFisherEntry global;
  struct HpFisherEntry qubit;
  struct HpFisherEntry cavity;
  struct HpFisherEntry mechanics;
} HpFisherRecord;

// Master-equation rates: cavity decay, mechanical damping, qubit dephasing
// and the thermal occupation of the mechanical bath.
typedef struct HpRates {
  double kappa;
  double big_gamma;
  double gamma;
  double nbar;
} HpRates;

// Subsystem von Neumann entropies (base 2) at one time.
typedef struct HpEntropyRecord {
  double t;
  double qubit;
  double cavity;
  double mechanics;
} HpEntropyRecord;

// Efficiency ratio at the optimal time; `best_subsystem` is 0 qubit,
// 1 cavity, 2 mechanics.
typedef struct HpEfficiency {
  double eta;
  double t_star;
  uint32_t best_subsystem;
  uintptr_t excluded;
} HpEfficiency;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hp_version(void);

// Message of the last failed call on this thread, or null if the last call
// succeeded. Valid until the next call on the same thread.
const char *hp_last_error_message(void);

// Fills `params` with the default Hamiltonian parameters
// (`omega_c = omega_q = 100`, `omega_m = 1`, `g1 = g2 = 0.1`).
//
// # Safety
// `params` must be null or point to writable memory for one `HpParams`.
enum HpStatus hp_params_default(struct HpParams *params);

// Creates a model with the default stencil (`Delta = 1e-4`) and the initial
// state `|g> (x) |2> (x) |2>`. `dims` may be null for cutoffs 25 x 25; the
// initial state is checked against the cutoffs when it is set or used.
//
// # Safety
// `params` must point to a valid `HpParams`, `dims` must be null or point to
// a valid `HpDims`, and `out` must be writable.
enum HpStatus hp_model_new(const struct HpParams *params,
                           const struct HpDims *dims,
                           struct HpModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must be null or a pointer returned by [`hp_model_new`] that has
// not been freed.
void hp_model_free(struct HpModel *model);

// Sets the initial state to `|g> (x) |alpha> (x) |beta>` (real amplitudes).
//
// # Safety
// `model` must be a live handle.
enum HpStatus hp_model_set_initial_pure(struct HpModel *model, double alpha, double beta);

// Sets the initial state to `|g><g| (x) |alpha><alpha| (x) rho_th(nbar)`.
//
// # Safety
// `model` must be a live handle.
enum HpStatus hp_model_set_initial_thermal(struct HpModel *model, double alpha, double nbar);

// Sets the finite-difference increments for `g1` and `g2`.
//
// # Safety
// `model` must be a live handle.
enum HpStatus hp_model_set_stencil(struct HpModel *model, double delta_g1, double delta_g2);

// Closed-system Fisher scan: writes `n_times` records to `out`.
//
// # Safety
// `model` must be a live handle, `times` readable for `n_times` values and
// `out` writable for `n_times` records.
enum HpStatus hp_fisher_scan(const struct HpModel *model,
                             const double *times,
                             uintptr_t n_times,
                             struct HpFisherRecord *out);

// Open-system Fisher scan under the master equation with RK4 step `dt`;
// `rates` may be null for the defaults (kappa = 0.01, Gamma = 1e-5,
// gamma = 0.01, Nbar = 100).
//
// # Safety
// As [`hp_fisher_scan`]; `rates` must be null or point to a valid `HpRates`.
enum HpStatus hp_fisher_scan_open(const struct HpModel *model,
                                  const struct HpRates *rates,
                                  double dt,
                                  const double *times,
                                  uintptr_t n_times,
                                  struct HpFisherRecord *out);

// Subsystem entropies along the closed evolution of a pure initial state.
//
// # Safety
// As [`hp_fisher_scan`], with `out` writable for `n_times` entropy records.
enum HpStatus hp_entropy_scan(const struct HpModel *model,
                              const double *times,
                              uintptr_t n_times,
                              struct HpEntropyRecord *out);

// Diagonal of `Q^-1` for a row-major symmetric 2x2 matrix; infinities when
// `det Q <= 1e-300`.
//
// # Safety
// `q` must be readable for 4 values and `out` writable for 2.
enum HpStatus hp_nuisance_diag(const double *q, double *out);

// `Tr[Q^-1]` for a row-major symmetric 2x2 matrix; infinity when singular.
//
// # Safety
// `q` must be readable for 4 values and `out` writable for 1.
enum HpStatus hp_scalar_bound(const double *q, double *out);

// Efficiency ratio of the best subsystem over `records` (as produced by a
// scan of `model`).
//
// # Safety
// `model` must be a live handle, `records` readable for `n_records` records
// and `out` writable.
enum HpStatus hp_efficiency(const struct HpModel *model,
                            const struct HpFisherRecord *records,
                            uintptr_t n_records,
                            enum HpWindow window,
                            enum HpScenario scenario,
                            struct HpEfficiency *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYBRIDPROBE_H */
