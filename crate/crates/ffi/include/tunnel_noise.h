#ifndef TUNNEL_NOISE_H
#define TUNNEL_NOISE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TN_FAMILY_SYMMETRIC 0

#define TN_FAMILY_ASYMMETRIC 1

#define TN_FAMILY_LINEAR_FIELD 2

#define TN_SIDE_LEFT 0

#define TN_SIDE_RIGHT 1

#define TN_SIDE_BULK 2

// Call outcome.
typedef enum TnStatus {
  TN_STATUS_OK = 0,
  TN_STATUS_INVALID_ARGUMENT = 2,
  TN_STATUS_DOMAIN = 3,
  TN_STATUS_CONSISTENCY = 4,
  TN_STATUS_RANGE = 5,
  TN_STATUS_NULL_POINTER = 6,
  TN_STATUS_PANIC = 7,
} TnStatus;

// Opaque solved barrier.
typedef struct TnSolution TnSolution;

typedef struct TnScattering {
  double transmission;
  double reflection;
  double ln_transmission;
  double t_re;
  double t_im;
  double r_re;
  double r_im;
  // Wavenumbers in 1/m.
  double k;
  double k_bar;
  double k0;
  // Incident probability current, m/s.
  double incident_flux;
} TnScattering;

typedef struct TnWavefunction {
  double psi_re;
  double psi_im;
  double d1_re;
  double d1_im;
  double d2_re;
  double d2_im;
  double d3_re;
  double d3_im;
} TnWavefunction;

typedef struct TnFluxes {
  double j;
  double j_p;
  double j_p2;
  double rho;
  double rho_p;
  double rho_p2;
} TnFluxes;

typedef struct TnUncertainty {
  // Metres.
  double delta_l;
  // kg·m/s.
  double delta_p;
  double product_over_hbar;
  double n_electrons;
  // 1/m.
  double dt_dl;
  double transmission;
  double reflection;
} TnUncertainty;

typedef struct TnResonator {
  // kg.
  double mass;
  // Hz.
  double f0;
  double quality;
  // K.
  double temperature;
} TnResonator;

typedef struct TnNoiseBudget {
  // N²/Hz.
  double s_fq;
  // N²/Hz.
  double s_fl;
  double feasibility_lhs;
  double psd_ratio;
  // A/√Hz.
  double shot_psd;
} TnNoiseBudget;

typedef struct TnAiry {
  double ai;
  double ai_prime;
  double bi;
  double bi_prime;
} TnAiry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next `tn_` call on the same thread.
const char *tn_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *tn_version(void);

// Solve a barrier. On success `*out` owns a new handle.
//
// # Safety
// `out` must be null or valid for a pointer write.
enum TnStatus tn_solve(uint32_t family,
                       double v0_ev,
                       double phi_ev,
                       double gap_nm,
                       double energy_ev,
                       struct TnSolution **out);

// Release a handle from [`tn_solve`]. NULL is ignored.
//
// # Safety
// `sol` must be null or a handle not yet freed.
void tn_solution_free(struct TnSolution *sol);

// # Safety
// `sol` must be a live handle or null; `out` null or writable.
enum TnStatus tn_solution_scattering(const struct TnSolution *sol, struct TnScattering *out);

// ψ and its first three derivatives at `x_m` (metres).
//
// # Safety
// `sol` must be a live handle or null; `out` null or writable.
enum TnStatus tn_solution_wavefunction(const struct TnSolution *sol,
                                       double x_m,
                                       uint32_t side_code,
                                       struct TnWavefunction *out);

// Densities and currents at `x_m` (metres).
//
// # Safety
// `sol` must be a live handle or null; `out` null or writable.
enum TnStatus tn_solution_currents(const struct TnSolution *sol,
                                   double x_m,
                                   uint32_t side_code,
                                   struct TnFluxes *out);

// Position and momentum uncertainty for `n_electrons` tunnelling events.
//
// # Safety
// `sol` must be a live handle or null; `out` null or writable.
enum TnStatus tn_solution_uncertainty(const struct TnSolution *sol,
                                      double n_electrons,
                                      struct TnUncertainty *out);

// Nominal resonator parameters.
struct TnResonator tn_resonator_nominal(void);

// Force-noise budget at tunnel current `i0_a` (amperes).
//
// # Safety
// `resonator` must be null or readable; `out` null or writable.
enum TnStatus tn_noise_budget(double i0_a,
                              double energy_ev,
                              uint32_t family,
                              double v0_ev,
                              double phi_ev,
                              double gap_nm,
                              const struct TnResonator *resonator,
                              struct TnNoiseBudget *out);

// Ai, Ai′, Bi, Bi′ at `z`.
//
// # Safety
// `out` must be null or writable.
enum TnStatus tn_airy(double z, struct TnAiry *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUNNEL_NOISE_H */
