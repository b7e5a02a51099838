#ifndef SCHOENFLIES_H
#define SCHOENFLIES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes; the numeric values match the CLI exit codes where they overlap.
 */
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_POINTER = 1,
  SF_STATUS_INPUT = 3,
  SF_STATUS_NUMERICAL = 4,
  SF_STATUS_PANIC = 5,
} SfStatus;

/*
 A validated circle embedding.
 */
typedef struct SfCurve SfCurve;

/*
 A plane extension of a curve.
 */
typedef struct SfExtension SfExtension;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until the next failing call.
 */
const char *sf_last_error(void);

/*
 Forget the last error on this thread.
 */
void sf_clear_error(void);

/*
 Build a curve from its JSON description (named family or node list).

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SfStatus sf_curve_from_json(const char *json, struct SfCurve **out);

/*
 # Safety
 `curve` must come from this library or be null.
 */
void sf_curve_free(struct SfCurve *curve);

/*
 Number of nodes, or 0 for a null handle.

 # Safety
 `curve` must be a valid handle or null.
 */
uintptr_t sf_curve_len(const struct SfCurve *curve);

/*
 Copy node `index` as `(t, re, im)`.

 # Safety
 `curve` must be a valid handle and `out` point to three doubles.
 */
enum SfStatus sf_curve_node(const struct SfCurve *curve, uintptr_t index, double *out);

/*
 Winding symmetrization of `curve - w0`; `out` receives the symmetric curve g.

 # Safety
 `curve` must be a valid handle and `out` a valid pointer.
 */
enum SfStatus sf_symmetrize(const struct SfCurve *curve,
                            double w0_re,
                            double w0_im,
                            struct SfCurve **out);

/*
 Extend `curve` to the plane: directly if it is centrally symmetric, otherwise
 through winding symmetrization about its incenter.

 # Safety
 `curve` must be a valid handle and `out` a valid pointer.
 */
enum SfStatus sf_extend(const struct SfCurve *curve, struct SfExtension **out);

/*
 # Safety
 `ext` must come from this library or be null.
 */
void sf_extension_free(struct SfExtension *ext);

/*
 Evaluate `F(z)`; `out` receives `(re, im)`.

 # Safety
 `ext` must be a valid handle and `out` point to two doubles.
 */
enum SfStatus sf_extension_eval(const struct SfExtension *ext, double re, double im, double *out);

/*
 Evaluate `F(z)` and `DF(z)`; `out` receives `(re, im, a, b, c, d)` with
 `DF = [[a, b], [c, d]]` acting on `(x, y)`.

 # Safety
 `ext` must be a valid handle and `out` point to six doubles.
 */
enum SfStatus sf_extension_jacobian(const struct SfExtension *ext,
                                    double re,
                                    double im,
                                    double *out);

/*
 Run the inequality verification suite; `out` receives the JSON report,
 to be released with [`sf_string_free`]. `passed` (optional) receives 1 or 0.

 # Safety
 `out` must be a valid pointer; `passed` may be null.
 */
enum SfStatus sf_verify(uint64_t seed, uint64_t walks, int32_t *passed, char **out);

/*
 # Safety
 `s` must come from this library or be null.
 */
void sf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHOENFLIES_H */
