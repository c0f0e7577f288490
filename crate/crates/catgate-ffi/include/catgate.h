#ifndef CATGATE_H
#define CATGATE_H

/* Generated by cbindgen from catgate-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Gate realization selector for table and fidelity calls.
typedef enum CatgateMode {
  // Diagonal closed-form gate unitary.
  CATGATE_MODE_CLOSED_FORM = 0,
  // Schrödinger evolution under the full coupling Hamiltonian.
  CATGATE_MODE_CLOSED = 1,
  // Master-equation evolution with decoherence.
  CATGATE_MODE_OPEN = 2,
} CatgateMode;

// Status codes returned by every fallible call.
typedef enum CatgateStatus {
  CATGATE_STATUS_OK = 0,
  CATGATE_STATUS_NULL_POINTER = 1,
  CATGATE_STATUS_INVALID_ARGUMENT = 2,
  CATGATE_STATUS_NUMERICAL_FAILURE = 3,
  CATGATE_STATUS_UTF8_ERROR = 4,
  CATGATE_STATUS_PANIC = 5,
} CatgateStatus;

// Opaque simulator handle: a validated configuration with its physical
// parameters and derived coupling layer.
typedef struct CatgateSystem CatgateSystem;

// The derived design numbers, linear GHz and ns.
typedef struct CatgateDesign {
  double delta1_ghz;
  double delta2_ghz;
  double delta1_tilde_ghz;
  double delta2_tilde_ghz;
  double big_delta_ghz;
  double lambda1_ghz;
  double lambda2_ghz;
  double lambda_ghz;
  double chi_ghz;
  double eta_ghz;
  double g2_ghz;
  uint32_t k;
  double t_gate_ns;
} CatgateDesign;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// ABI version; bumped on any breaking change to this header.
uint32_t catgate_abi_version(void);

// Message for the most recent failure on this thread. Valid until the
// next failing call on the same thread; never null.
const char *catgate_last_error(void);

// System handle for the built-in reference design. Free with
// [`catgate_system_free`].
struct CatgateSystem *catgate_system_reference(void);

// System handle from a run-config JSON document (same schema as the CLI
// config files). Returns null on failure; see [`catgate_last_error`].
//
// # Safety
// `json` must be a valid NUL-terminated C string.
struct CatgateSystem *catgate_system_from_json(const char *json);

// # Safety
// `system` must be a pointer from a `catgate_system_*` constructor, not
// yet freed; null is a no-op.
void catgate_system_free(struct CatgateSystem *system);

// # Safety
// `system` and `out` must be valid pointers.
enum CatgateStatus catgate_design(const struct CatgateSystem *system, struct CatgateDesign *out);

// Cavity quality factors at a photon lifetime κ⁻¹ (μs).
//
// # Safety
// All pointers must be valid.
enum CatgateStatus catgate_quality_factors(const struct CatgateSystem *system,
                                           double kappa_inv_us,
                                           double *q1_out,
                                           double *q2_out);

// Cat-state Fock amplitudes: writes `trunc` interleaved complex values
// (all imaginary parts zero for this family) into `out_interleaved`,
// which must hold `2 * trunc` doubles. `odd_parity` 0 selects the even
// cat, nonzero the odd one.
//
// # Safety
// `out_interleaved` must point to at least `2 * trunc` writable doubles.
enum CatgateStatus catgate_cat_state(double amplitude,
                                     int32_t odd_parity,
                                     size_t trunc,
                                     double *out_interleaved);

// Logical truth table: writes 16 interleaved complex entries (32 doubles,
// row-major) plus the leakage. For `CATGATE_MODE_OPEN` the decoherence
// cell is `(t_scale_us, kappa_inv_us)`; the other modes ignore those
// arguments. Closed and open modes propagate the full gate time, which
// takes seconds and minutes respectively at the default step.
//
// # Safety
// `out_interleaved` must hold 32 doubles; `leakage_out` one double.
enum CatgateStatus catgate_truth_table(const struct CatgateSystem *system,
                                       enum CatgateMode mode,
                                       double t_scale_us,
                                       double kappa_inv_us,
                                       uint32_t workers,
                                       double *out_interleaved,
                                       double *leakage_out);

// Angle-averaged gate fidelity over a `quadrature_n`² midpoint grid.
// Mode semantics as in [`catgate_truth_table`]; `workers` 0 uses all
// cores. Open-system averages run one master equation per grid point —
// budget minutes per point at the default step.
//
// # Safety
// `mean_out` must be a valid pointer.
enum CatgateStatus catgate_fidelity_average(const struct CatgateSystem *system,
                                            enum CatgateMode mode,
                                            double t_scale_us,
                                            double kappa_inv_us,
                                            uint32_t quadrature_n,
                                            uint32_t workers,
                                            double *mean_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CATGATE_H */
