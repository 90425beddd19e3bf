#ifndef GCDLAB_H
#define GCDLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GcdlabStatus {
  GCDLAB_STATUS_OK = 0,
  GCDLAB_STATUS_INVALID_ARGUMENT = 1,
  GCDLAB_STATUS_PARSE = 2,
  GCDLAB_STATUS_INGEST = 3,
  GCDLAB_STATUS_IO = 4,
  GCDLAB_STATUS_NULL_POINTER = 5,
  GCDLAB_STATUS_BUFFER_TOO_SMALL = 6,
  GCDLAB_STATUS_PANIC = 7,
} GcdlabStatus;

/**
 * Operand law; values for `GcdlabSamplerConfig::operand_dist`.
 */
typedef enum GcdlabOperandDist {
  GCDLAB_OPERAND_DIST_UNIFORM = 0,
  GCDLAB_OPERAND_DIST_LOG_UNIFORM = 1,
} GcdlabOperandDist;

/**
 * Outcome law; values for `GcdlabSamplerConfig::outcome_dist`.
 */
typedef enum GcdlabOutcomeDist {
  GCDLAB_OUTCOME_DIST_NATURAL = 0,
  GCDLAB_OUTCOME_DIST_MIX_UNIFORM = 1,
  GCDLAB_OUTCOME_DIST_LOG_UNIFORM = 2,
  GCDLAB_OUTCOME_DIST_INV_SQRT = 3,
  GCDLAB_OUTCOME_DIST_INV_POWER15 = 4,
  GCDLAB_OUTCOME_DIST_UNIFORM = 5,
} GcdlabOutcomeDist;

/**
 * Rounding of log-uniform draws; values for `GcdlabSamplerConfig::log_rounding`.
 */
typedef enum GcdlabLogRounding {
  GCDLAB_LOG_ROUNDING_FLOOR = 0,
  GCDLAB_LOG_ROUNDING_NEAREST = 1,
} GcdlabLogRounding;

/**
 * Opaque rule set.
 */
typedef struct GcdlabRuleSet GcdlabRuleSet;

/**
 * Opaque training-pair stream.
 */
typedef struct GcdlabSampler GcdlabSampler;

/**
 * Sampler settings. The enum-valued fields are plain integers so that an
 * out-of-range value from C is reported instead of being undefined.
 */
typedef struct GcdlabSamplerConfig {
  uint64_t max_operand;
  uint64_t kmax;
  /**
   * A `GcdlabOperandDist` value.
   */
  uint32_t operand_dist;
  /**
   * A `GcdlabOutcomeDist` value.
   */
  uint32_t outcome_dist;
  /**
   * Only read when `outcome_dist` is `GCDLAB_OUTCOME_DIST_MIX_UNIFORM`.
   */
  double mix_rho;
  /**
   * A `GcdlabLogRounding` value.
   */
  uint32_t log_rounding;
  uint64_t seed;
  uint64_t shard;
} GcdlabSamplerConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *gcdlab_last_error_message(void);

uint64_t gcdlab_gcd(uint64_t a, uint64_t b);

/**
 * Writes the base-`base` digits of `n` (most significant first, sign token
 * omitted) to `digits`. `*len` receives the digit count; when `capacity`
 * is too small nothing is written and `GCDLAB_STATUS_BUFFER_TOO_SMALL` is
 * returned.
 *
 * # Safety
 * `digits` must point to `capacity` writable `uint32_t`; `len` must be valid
 * for writes.
 */
enum GcdlabStatus gcdlab_encode(uint64_t n,
                                uint32_t base,
                                uint32_t *digits,
                                size_t capacity,
                                size_t *len);

/**
 * Decodes `len` digits (most significant first, no sign) into `*out`.
 *
 * # Safety
 * `digits` must point to `len` readable `uint32_t`; `out` must be valid for
 * writes.
 */
enum GcdlabStatus gcdlab_decode(const uint32_t *digits, size_t len, uint32_t base, uint64_t *out);

/**
 * Closed-form accuracy of a model that learns every product of the
 * primes of `base`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum GcdlabStatus gcdlab_theoretical_accuracy(uint64_t base, double *out);

/**
 * Builds a bundled preset, truncated at `cap` (0 means 100).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum GcdlabStatus gcdlab_rule_set_from_preset(const char *name,
                                              uint64_t cap,
                                              struct GcdlabRuleSet **out);

/**
 * Builds the rule set for `base` with per-prime exponent caps
 * (`cap_primes[i]` capped at `cap_exponents[i]`, unlisted primes uncapped)
 * and grokked prime powers, truncated at `cap` (0 means 100).
 *
 * # Safety
 * `cap_primes` and `cap_exponents` must each hold `ncaps` elements, `grok`
 * must hold `ngrok` elements (either may be null when its count is 0), and
 * `out` must be valid for writes.
 */
enum GcdlabStatus gcdlab_rule_set_build(uint64_t base,
                                        const uint64_t *cap_primes,
                                        const uint32_t *cap_exponents,
                                        size_t ncaps,
                                        const uint64_t *grok,
                                        size_t ngrok,
                                        uint64_t cap,
                                        struct GcdlabRuleSet **out);

/**
 * Number of elements, or 0 for a null handle.
 *
 * # Safety
 * `rs` must be null or a live handle.
 */
size_t gcdlab_rule_set_len(const struct GcdlabRuleSet *rs);

/**
 * Copies the elements in increasing order; same buffer protocol as
 * [`gcdlab_encode`].
 *
 * # Safety
 * `rs` must be a live handle, `out` must point to `capacity` writable
 * `uint64_t` and `len` must be valid for writes.
 */
enum GcdlabStatus gcdlab_rule_set_elements(const struct GcdlabRuleSet *rs,
                                           uint64_t *out,
                                           size_t capacity,
                                           size_t *len);

/**
 * Prediction of the rule-based model for gcd `k`: the largest element
 * dividing `k`. Returns 0 for a null handle or `k == 0`.
 *
 * # Safety
 * `rs` must be null or a live handle.
 */
uint64_t gcdlab_rule_set_predict(const struct GcdlabRuleSet *rs, uint64_t k);

/**
 * Accuracy on uniformly drawn pairs; NaN for a null handle.
 *
 * # Safety
 * `rs` must be null or a live handle.
 */
double gcdlab_rule_set_exact_accuracy(const struct GcdlabRuleSet *rs);

/**
 * # Safety
 * `rs` must be null or a handle not yet freed.
 */
void gcdlab_rule_set_free(struct GcdlabRuleSet *rs);

/**
 * Default settings: operands up to 10^6, gcd up to 100, uniform operands,
 * natural outcomes, floor rounding, seed 0, shard 0.
 */
struct GcdlabSamplerConfig gcdlab_sampler_config_default(void);

/**
 * # Safety
 * `config` must point to a readable config and `out` must be valid for
 * writes.
 */
enum GcdlabStatus gcdlab_sampler_new(const struct GcdlabSamplerConfig *config,
                                     struct GcdlabSampler **out);

/**
 * Draws the next pair and its gcd.
 *
 * # Safety
 * `sampler` must be a live handle; `a`, `b` and `g` must be valid for
 * writes.
 */
enum GcdlabStatus gcdlab_sampler_next(struct GcdlabSampler *sampler,
                                      uint64_t *a,
                                      uint64_t *b,
                                      uint64_t *g);

/**
 * # Safety
 * `sampler` must be null or a handle not yet freed.
 */
void gcdlab_sampler_free(struct GcdlabSampler *sampler);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GCDLAB_H */
