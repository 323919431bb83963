/* C ABI for the anticyclo library.
 *
 * Conventions: every fallible function returns int32_t; 0 is success,
 * 1 means a verification predicate evaluated to false, negative values
 * are errors. Out-parameters are written only on success.
 */

#ifndef ANTICYCLO_H
#define ANTICYCLO_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define ANTICYCLO_OK 0
#define ANTICYCLO_FAIL 1
#define ANTICYCLO_ERR_NULL (-1)
#define ANTICYCLO_ERR_DOMAIN (-2)
#define ANTICYCLO_ERR_UNDECIDABLE (-3)

/* Opaque truncated p-adic ring Z_p mod p^M. */
typedef struct AnticycloRing AnticycloRing;

/* Static nul-terminated library version string. */
const char *anticyclo_version(void);

/* Create Z_p at precision M; release with anticyclo_ring_free. */
int32_t anticyclo_ring_new_zp(uint64_t p, uint32_t precision,
                              AnticycloRing **out);

void anticyclo_ring_free(AnticycloRing *ring);

/* mu/lambda invariants of sum coeffs[i]*T^i over a window of `window`
 * T-coefficients. ANTICYCLO_ERR_UNDECIDABLE when the precision cannot
 * decide them. */
int32_t anticyclo_iwasawa_invariants(const AnticycloRing *ring,
                                     const uint64_t *coeffs, size_t len,
                                     size_t window, uint32_t *out_mu,
                                     uint32_t *out_lambda);

/* mu/lambda of the stabilizing Euler factor for (ell, a_ell, r, a_v). */
int32_t anticyclo_euler_invariants(const AnticycloRing *ring, uint64_t ell,
                                   int64_t a_ell, uint32_t r, uint64_t a_v,
                                   bool divides_level, size_t window,
                                   uint32_t *out_mu, uint32_t *out_lambda);

/* Class number h(delta) of the imaginary quadratic order of
 * discriminant delta (delta < 0, delta = 0 or 1 mod 4). */
int32_t anticyclo_class_number(int64_t delta, uint64_t *out_h);

/* Frobenius exponent a_v mod p^k of the prime above ell at tower level
 * n over the field of discriminant -d_k. */
int32_t anticyclo_frobenius_exponent(uint64_t d_k, uint64_t p, uint64_t ell,
                                     uint32_t n, uint64_t *out_a_v,
                                     uint32_t *out_k);

/* Heegner-hypothesis check for (level, weight, d_k, p): ANTICYCLO_OK
 * when all conditions hold, ANTICYCLO_FAIL when some condition fails. */
int32_t anticyclo_heegner_validate(uint64_t level, uint32_t weight,
                                   uint64_t d_k, uint64_t p);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ANTICYCLO_H */
