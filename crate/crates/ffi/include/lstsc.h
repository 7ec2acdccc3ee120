/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef LSTSC_H
#define LSTSC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every call.
typedef enum LstscStatus {
  LSTSC_STATUS_OK = 0,
  LSTSC_STATUS_NULL_POINTER = 1,
  LSTSC_STATUS_INVALID_ARGUMENT = 2,
  LSTSC_STATUS_TOO_FEW_MICROPHONES = 3,
  LSTSC_STATUS_UNSUPPORTED_SAMPLE_RATE = 4,
  LSTSC_STATUS_SIGNAL_TOO_SHORT = 5,
  LSTSC_STATUS_BUFFER_TOO_SMALL = 6,
  LSTSC_STATUS_GEOMETRY = 7,
  LSTSC_STATUS_DECAY_RANGE_NOT_REACHED = 8,
  LSTSC_STATUS_MASK_OUT_OF_RANGE = 9,
  LSTSC_STATUS_INTERNAL = 10,
} LstscStatus;

// Opaque feature tensor: `planes` planes of `frames x bins` values.
typedef struct LstscFeatures LstscFeatures;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. The pointer stays valid
// until the next call into this library on the same thread.
const char *lstsc_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *lstsc_version(void);

// Computes coherence features of an interleaved 16 kHz recording.
//
// `variant_id` is 1 to 4. The handle holds four planes in the order local
// coherence, global coherence, warped global coherence, forgetting factor;
// variant 4 returns 48 ERB bands instead of 257 bins.
//
// # Safety
// `interleaved` must be valid for `frames * channels` reads and `out` for
// one write.
enum LstscStatus lstsc_extract(const float *interleaved,
                               size_t frames,
                               size_t channels,
                               uint32_t sample_rate,
                               uint32_t variant_id,
                               struct LstscFeatures **out);

// # Safety
// `features` must come from [`lstsc_extract`]; the out pointers may be
// null.
enum LstscStatus lstsc_features_dims(const struct LstscFeatures *features,
                                     size_t *frames,
                                     size_t *bins,
                                     size_t *planes);

// Copies plane `plane` (row-major, `frames * bins` values) into `dst`.
//
// # Safety
// `features` must come from [`lstsc_extract`] and `dst` be valid for
// `dst_len` writes.
enum LstscStatus lstsc_features_copy_plane(const struct LstscFeatures *features,
                                           size_t plane,
                                           float *dst,
                                           size_t dst_len);

// Releases a features handle. Null is ignored.
//
// # Safety
// `features` must come from [`lstsc_extract`] and not be used afterwards.
void lstsc_features_free(struct LstscFeatures *features);

// Enhances the first channel with the built-in coherence mask and writes
// `frames` mono samples to `out`.
//
// # Safety
// `interleaved` must be valid for `frames * channels` reads and `out` for
// `out_len` writes.
enum LstscStatus lstsc_enhance(const float *interleaved,
                               size_t frames,
                               size_t channels,
                               uint32_t sample_rate,
                               uint32_t variant_id,
                               float *out,
                               size_t out_len);

// Scale-invariant SDR of `estimate` against `reference`, in dB.
//
// # Safety
// Both signals must be valid for `len` reads and `out_db` for one write.
enum LstscStatus lstsc_si_sdr(const double *reference,
                              const double *estimate,
                              size_t len,
                              double *out_db);

// Image-source impulse response in a shoebox room with the given
// reverberation time (`t60 <= 0` requests an anechoic room).
//
// The required length is always stored in `out_len`. When `capacity` is
// smaller, nothing is copied and `BufferTooSmall` is returned; `taps` may
// be null in that case to query the size.
//
// # Safety
// `room`, `source` and `mic` must point to three doubles each, `taps` be
// valid for `capacity` writes (or null) and `out_len` for one write.
enum LstscStatus lstsc_simulate_rir(const double *room,
                                    double t60,
                                    const double *source,
                                    const double *mic,
                                    uint32_t sample_rate,
                                    double *taps,
                                    size_t capacity,
                                    size_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LSTSC_H */
