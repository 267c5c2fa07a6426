#ifndef CODEDCOMP_H
#define CODEDCOMP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum CcStatus {
  CcOk = 0,
  CcErrInvalidArgument = 1,
  CcErrIo = 2,
  CcErrDecodeFailure = 3,
  CcErrNumeric = 4,
  CcErrInternal = 5,
} CcStatus;

/**
 * Opaque scheme handle: configuration, problem binding, and parameters.
 */
typedef struct CcScheme CcScheme;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *cc_last_error(void);

/**
 * Library version as a static string.
 */
const char *cc_version(void);

/**
 * R = G·P + 1 for the learned scheme.
 */
uint32_t cc_recovery_threshold(uint32_t g, uint32_t p);

/**
 * R = (K−1)·d + 1 for the exact LCC baseline.
 */
uint32_t cc_lcc_recovery_threshold(uint32_t k, uint32_t degree);

/**
 * Creates a freshly initialized scheme for `problem` (eig | eigvec |
 * expm | det) with matrix dimension `m`, `k` inputs, and polynomial
 * degrees `g`, `p`. On success writes the handle to `out`.
 *
 * # Safety
 * `problem` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CcStatus cc_scheme_new(uint32_t m,
                            uint32_t k,
                            uint32_t g,
                            uint32_t p,
                            const char *problem,
                            uint64_t seed,
                            struct CcScheme **out);

/**
 * Releases a handle. A null pointer is a no-op.
 *
 * # Safety
 * `scheme` must have come from `cc_scheme_new`/`cc_scheme_load` and not
 * already be freed.
 */
void cc_scheme_free(struct CcScheme *scheme);

/**
 * Saves the scheme in the checkpoint container format.
 *
 * # Safety
 * `scheme` must be a live handle; `path` a NUL-terminated string.
 */
enum CcStatus cc_scheme_save(const struct CcScheme *scheme, const char *path);

/**
 * Loads a checkpoint and binds it to `problem` for training/evaluation.
 *
 * # Safety
 * `path` and `problem` must be NUL-terminated strings; `out` valid.
 */
enum CcStatus cc_scheme_load(const char *path, const char *problem, struct CcScheme **out);

/**
 * Trains in place over `epochs` × `batches_per_epoch` × `batch_size`
 * fresh instances and keeps the best-epoch parameters. Writes the best
 * mean epoch loss to `out_best_loss` when non-null.
 *
 * # Safety
 * `scheme` must be a live handle.
 */
enum CcStatus cc_scheme_train(struct CcScheme *scheme,
                              uint32_t epochs,
                              uint32_t batches_per_epoch,
                              uint32_t batch_size,
                              uint64_t seed,
                              double *out_best_loss);

/**
 * Evaluates on `instances` fresh test sets through the simulated
 * encode → erasure → decode path with `n_workers` workers (`0` means
 * exactly the recovery threshold), `erasures` of them erased. Writes the
 * mean NRMSE to `out_mean_nrmse`.
 *
 * # Safety
 * `scheme` must be a live handle; `out_mean_nrmse` valid or null.
 */
enum CcStatus cc_scheme_eval(const struct CcScheme *scheme,
                             uint32_t instances,
                             uint32_t n_workers,
                             uint32_t erasures,
                             uint64_t seed,
                             double *out_mean_nrmse);

/**
 * Runs one input set through the full coded path and writes the decoded
 * outputs. `inputs` holds K column-major m×m matrices back to back
 * (k·m·m doubles); `out` receives k·v doubles (anchor-major).
 *
 * # Safety
 * `scheme` must be a live handle; `inputs` must hold k·m·m readable
 * doubles and `out` k·v writable doubles.
 */
enum CcStatus cc_scheme_infer(const struct CcScheme *scheme,
                              const double *inputs,
                              uint32_t n_workers,
                              uint32_t erasures,
                              uint64_t seed,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CODEDCOMP_H */
