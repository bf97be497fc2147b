#ifndef EXPWAVE_H
#define EXPWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ExpwaveStatus {
  EXPWAVE_STATUS_OK = 0,
  EXPWAVE_STATUS_NULL_POINTER = 1,
  EXPWAVE_STATUS_INVALID_UTF8 = 2,
  EXPWAVE_STATUS_PARSE_ERROR = 3,
  /**
   * A term or argument violates a precondition, e.g. a zero amplitude.
   */
  EXPWAVE_STATUS_INVALID_INPUT = 4,
  EXPWAVE_STATUS_POLE = 5,
  EXPWAVE_STATUS_OVERFLOW = 6,
  /**
   * A computed period failed its numerical confirmation.
   */
  EXPWAVE_STATUS_VERIFICATION_FAILED = 7,
  EXPWAVE_STATUS_PANIC = 8,
} ExpwaveStatus;

typedef enum ExpwavePeriodStatus {
  EXPWAVE_PERIOD_STATUS_PERIODIC = 0,
  EXPWAVE_PERIOD_STATUS_CONSTANT = 1,
  EXPWAVE_PERIOD_STATUS_UNKNOWN = 2,
} ExpwavePeriodStatus;

typedef enum ExpwaveMethod {
  EXPWAVE_METHOD_PROP1 = 1,
  EXPWAVE_METHOD_PROP2 = 2,
  EXPWAVE_METHOD_PROP3 = 3,
  EXPWAVE_METHOD_PROP4 = 4,
} ExpwaveMethod;

/**
 * Opaque wave expression.
 */
typedef struct ExpwaveExpr ExpwaveExpr;

typedef struct ExpwaveComplex {
  double re;
  double im;
} ExpwaveComplex;

/**
 * A spin or rotation. When `exact` is set, `num / den` is the exact value
 * and `value` its nearest double.
 */
typedef struct ExpwaveNum {
  bool exact;
  int64_t num;
  int64_t den;
  double value;
} ExpwaveNum;

/**
 * `period_num / period_den` is meaningful only for periodic results.
 */
typedef struct ExpwavePeriod {
  enum ExpwavePeriodStatus status;
  int64_t period_num;
  int64_t period_den;
} ExpwavePeriod;

/**
 * `amplitude · e^{i phase}`; `phase` is `σ` when `sigma_form` is set and
 * the total phase otherwise.
 */
typedef struct ExpwaveCanonical {
  struct ExpwaveComplex amplitude;
  double phase;
  bool sigma_form;
} ExpwaveCanonical;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *expwave_last_error(void);

/**
 * Parses `text` (NUL-terminated UTF-8) into a new expression.
 */
enum ExpwaveStatus expwave_expr_parse(const char *text, struct ExpwaveExpr **out);

/**
 * Releases an expression. Null is ignored.
 */
void expwave_expr_free(struct ExpwaveExpr *e);

/**
 * The generator `w(spin, rotation)` with float parameters.
 */
enum ExpwaveStatus expwave_expr_gen(double spin, double rotation, struct ExpwaveExpr **out);

/**
 * Pointwise sum; the operands are copied and stay owned by the caller.
 */
enum ExpwaveStatus expwave_expr_add(const struct ExpwaveExpr *a,
                                    const struct ExpwaveExpr *b,
                                    struct ExpwaveExpr **out);

/**
 * Pointwise product; the operands are copied and stay owned by the caller.
 */
enum ExpwaveStatus expwave_expr_mul(const struct ExpwaveExpr *a,
                                    const struct ExpwaveExpr *b,
                                    struct ExpwaveExpr **out);

enum ExpwaveStatus expwave_expr_inv(const struct ExpwaveExpr *a, struct ExpwaveExpr **out);

enum ExpwaveStatus expwave_expr_eval(const struct ExpwaveExpr *e,
                                     double rho,
                                     struct ExpwaveComplex *out);

/**
 * Value at `rho = 0`.
 */
enum ExpwaveStatus expwave_expr_project(const struct ExpwaveExpr *e, struct ExpwaveComplex *out);

enum ExpwaveStatus expwave_expr_spin(const struct ExpwaveExpr *e, struct ExpwaveNum *out);

enum ExpwaveStatus expwave_expr_rotation(const struct ExpwaveExpr *e, struct ExpwaveNum *out);

/**
 * Splits `e` into `amp · w(spin, rotation)`. `amp` receives a new expression.
 */
enum ExpwaveStatus expwave_expr_canonicalize(const struct ExpwaveExpr *e,
                                             struct ExpwaveExpr **amp,
                                             struct ExpwaveNum *spin,
                                             struct ExpwaveNum *rotation);

enum ExpwaveStatus expwave_expr_period(const struct ExpwaveExpr *e, struct ExpwavePeriod *out);

/**
 * Prints `e` in the expression grammar. Release with [`expwave_string_free`].
 */
enum ExpwaveStatus expwave_expr_print(const struct ExpwaveExpr *e, char **out);

void expwave_string_free(char *s);

/**
 * `Σ r[k] e^{i theta[k]}` over `len` terms.
 */
enum ExpwaveStatus expwave_sum_direct(const double *r,
                                      const double *theta,
                                      size_t len,
                                      struct ExpwaveComplex *out);

/**
 * Canonical form of the `len` terms by `method`.
 */
enum ExpwaveStatus expwave_canon_terms(const double *r,
                                       const double *theta,
                                       size_t len,
                                       enum ExpwaveMethod method,
                                       struct ExpwaveCanonical *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXPWAVE_H */
