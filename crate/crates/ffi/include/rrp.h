#ifndef RRP_H
#define RRP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible call.
 */
typedef enum RrpStatus {
  RRP_STATUS_OK = 0,
  RRP_STATUS_NULL_POINTER = 1,
  RRP_STATUS_INVALID_ARGUMENT = 2,
  RRP_STATUS_BUFFER_TOO_SMALL = 3,
  RRP_STATUS_PROTOCOL = 4,
  RRP_STATUS_IO = 5,
  RRP_STATUS_PARSE = 6,
  RRP_STATUS_VALIDATION = 7,
  RRP_STATUS_PANIC = 8,
} RrpStatus;

/*
 Dense tanh network with a linear output layer.
 */
typedef struct RrpNet RrpNet;

/*
 Seeded random stream.
 */
typedef struct RrpRng RrpRng;

/*
 Linear noise schedule.
 */
typedef struct RrpSchedule RrpSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *rrp_last_error_message(void);

/*
 # Safety
 `out` must be a valid pointer to writable storage.
 */
enum RrpStatus rrp_rng_new(uint64_t seed, struct RrpRng **out);

/*
 # Safety
 `rng` must come from [`rrp_rng_new`] and not be used afterwards. Null is ignored.
 */
void rrp_rng_free(struct RrpRng *rng);

/*
 Draws from `N(0, sigma²)`; `sigma = 0` yields 0 without advancing the stream.

 # Safety
 `rng` must be a live handle and `out` writable.
 */
enum RrpStatus rrp_sample_gaussian(struct RrpRng *rng, double sigma, double *out);

/*
 # Safety
 `out` must be writable.
 */
enum RrpStatus rrp_schedule_new(double sigma_max,
                                double sigma_min,
                                uint64_t total_steps,
                                double decay_fraction,
                                struct RrpSchedule **out);

/*
 # Safety
 `schedule` must come from [`rrp_schedule_new`]. Null is ignored.
 */
void rrp_schedule_free(struct RrpSchedule *schedule);

/*
 `max{0, σ_max − (σ_max − σ_min)·t/T}`.

 # Safety
 `schedule` must be live and `out` writable.
 */
enum RrpStatus rrp_schedule_sigma_at(const struct RrpSchedule *schedule, uint64_t t, double *out);

/*
 Noise scale for rewards perturbed at interaction time.

 # Safety
 `schedule` must be live and `out` writable.
 */
enum RrpStatus rrp_schedule_interaction_sigma(const struct RrpSchedule *schedule,
                                              uint64_t t,
                                              double *out);

/*
 Anneals noise drawn at the initial scale. `literal` nonzero clips the
 result at zero; otherwise the sign is kept.

 # Safety
 `schedule` must be live and `out` writable.
 */
enum RrpStatus rrp_anneal_stored_noise(const struct RrpSchedule *schedule,
                                       double epsilon,
                                       uint64_t t,
                                       bool literal,
                                       double *out);

double rrp_perturb_reward(double reward, double epsilon);

/*
 Randomly initialised network with `n_layers` widths.

 # Safety
 `sizes` must point to `n_layers` values, `rng` must be live, `out` writable.
 */
enum RrpStatus rrp_net_new(const size_t *sizes,
                           size_t n_layers,
                           struct RrpRng *rng,
                           struct RrpNet **out);

/*
 Network from a flat parameter vector (per layer: row-major weights, then biases).

 # Safety
 `sizes` and `params` must point to `n_layers` and `n_params` values; `out` writable.
 */
enum RrpStatus rrp_net_from_params(const size_t *sizes,
                                   size_t n_layers,
                                   const double *params,
                                   size_t n_params,
                                   struct RrpNet **out);

/*
 # Safety
 `net` must come from an `rrp_net_*` constructor. Null is ignored.
 */
void rrp_net_free(struct RrpNet *net);

/*
 Input width, or 0 for a null handle.

 # Safety
 `net` must be live or null.
 */
size_t rrp_net_input_dim(const struct RrpNet *net);

/*
 # Safety
 `net` must be live or null.
 */
size_t rrp_net_output_dim(const struct RrpNet *net);

/*
 # Safety
 `net` must be live or null.
 */
size_t rrp_net_num_params(const struct RrpNet *net);

/*
 Copies the flat parameters into `out[0..len]`; `len` must equal the parameter count.

 # Safety
 `net` must be live and `out` must hold `len` values.
 */
enum RrpStatus rrp_net_params(const struct RrpNet *net, double *out, size_t len);

/*
 Forward pass of one input.

 # Safety
 `x` must hold `x_len` values and `out` must hold `out_len` values.
 */
enum RrpStatus rrp_net_forward(const struct RrpNet *net,
                               const double *x,
                               size_t x_len,
                               double *out,
                               size_t out_len);

/*
 Jacobian of the outputs with respect to the parameters at `x`, written
 row-major as `output_dim × num_params`.

 # Safety
 `x` must hold `x_len` values and `out` must hold `out_len` values.
 */
enum RrpStatus rrp_net_jacobian(const struct RrpNet *net,
                                const double *x,
                                size_t x_len,
                                double *out,
                                size_t out_len);

/*
 Trace of the population covariance of `n` outputs of width `m`, stored row-major.

 # Safety
 `outputs` must hold `n·m` values and `out` must be writable.
 */
enum RrpStatus rrp_output_variance(const double *outputs, size_t n, size_t m, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RRP_H */
