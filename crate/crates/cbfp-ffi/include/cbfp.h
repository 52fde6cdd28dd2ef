#ifndef CBFP_H
#define CBFP_H

/* Generated by cbindgen from the cbfp-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Sample representation, including the per-scalar baseline.
typedef enum CbfpEncoding {
  CBFP_ENCODING_IEEE754 = 0,
  CBFP_ENCODING_COMMON = 1,
  CBFP_ENCODING_BOX = 2,
} CbfpEncoding;

// Scalar storage width of block components.
typedef enum CbfpFormat {
  CBFP_FORMAT_HALF = 0,
  CBFP_FORMAT_SINGLE = 1,
  CBFP_FORMAT_DOUBLE = 2,
} CbfpFormat;

// Block encoding variant.
typedef enum CbfpMode {
  CBFP_MODE_COMMON = 0,
  CBFP_MODE_BOX = 1,
} CbfpMode;

// Block operation selector.
typedef enum CbfpOp {
  CBFP_OP_ADD = 0,
  CBFP_OP_MUL = 1,
  CBFP_OP_CONV = 2,
} CbfpOp;

// Result of every fallible call.
typedef enum CbfpStatus {
  CBFP_STATUS_OK = 0,
  CBFP_STATUS_NULL_POINTER = 1,
  CBFP_STATUS_INVALID_ARGUMENT = 2,
  CBFP_STATUS_UNSUPPORTED_VALUE = 3,
  CBFP_STATUS_FORMAT_MISMATCH = 4,
  CBFP_STATUS_BLOCK_SIZE_MISMATCH = 5,
  CBFP_STATUS_EXPONENT_OVERFLOW = 6,
  CBFP_STATUS_LENGTH_MISMATCH = 7,
  CBFP_STATUS_ZERO_REFERENCE = 8,
  CBFP_STATUS_ALL_ZERO = 9,
  CBFP_STATUS_RATIO_OUT_OF_RANGE = 10,
  CBFP_STATUS_OFFSET_OUT_OF_RANGE = 11,
  CBFP_STATUS_INVALID_ROLLOFF = 12,
  CBFP_STATUS_BAD_BIT_COUNT = 13,
  CBFP_STATUS_INVALID_FILE = 14,
  CBFP_STATUS_IO_ERROR = 15,
} CbfpStatus;

// Opaque block handle.
typedef struct CbfpBlock CbfpBlock;

// Cost tallies of one block operation.
typedef struct CbfpCounters {
  uint64_t mantissa_scalings;
  uint64_t exponent_ops;
  uint64_t complex_mults;
  uint64_t complex_adds;
} CbfpCounters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Encode `n_samples` complex values (parallel real/imaginary arrays) into
// a new block. The handle must be released with `cbfp_block_free`.
//
// # Safety
// `re` and `im` must point to `n_samples` readable doubles and
// `out_block` to a writable pointer slot.
enum CbfpStatus cbfp_block_encode(enum CbfpFormat format,
                                  enum CbfpMode mode,
                                  const double *re,
                                  const double *im,
                                  size_t n_samples,
                                  struct CbfpBlock **out_block);

// Decode a block into parallel real/imaginary arrays of length
// `n_samples`, which must match `cbfp_block_n_samples`.
//
// # Safety
// `re_out` and `im_out` must point to `n_samples` writable doubles.
enum CbfpStatus cbfp_block_decode(const struct CbfpBlock *block,
                                  double *re_out,
                                  double *im_out,
                                  size_t n_samples);

// Release a block handle. Null is a no-op.
//
// # Safety
// `block` must have come from this library and not be freed twice.
void cbfp_block_free(struct CbfpBlock *block);

// Number of complex samples, or 0 for null.
//
// # Safety
// `block` must be a live handle or null.
size_t cbfp_block_n_samples(const struct CbfpBlock *block);

// Shared biased exponent of the block.
//
// # Safety
// `block` must be a live handle or null.
uint32_t cbfp_block_common_exponent(const struct CbfpBlock *block);

// Run one block operation; writes the cost tallies when `counters` is
// non-null and a fresh handle into `out_block`.
//
// # Safety
// `a` and `b` must be live handles; `out_block` must be writable.
enum CbfpStatus cbfp_block_op(enum CbfpOp op,
                              const struct CbfpBlock *a,
                              const struct CbfpBlock *b,
                              struct CbfpCounters *counters,
                              struct CbfpBlock **out_block);

// Worst-case cost model for one operation. For add and multiply `n2` is
// ignored; convolution uses both operand lengths.
//
// # Safety
// `out` must be writable.
enum CbfpStatus cbfp_predicted_costs(enum CbfpOp op,
                                     enum CbfpEncoding encoding,
                                     uint64_t n1,
                                     uint64_t n2,
                                     struct CbfpCounters *out);

// Bits needed to store a block of `n_samples` complex values.
uint64_t cbfp_wordlength_bits(enum CbfpEncoding encoding, size_t n_samples, enum CbfpFormat format);

// Largest exponent gap that still keeps a significand bit under common
// encoding.
uint32_t cbfp_max_exponent_difference(enum CbfpFormat format);

// Classify an exponent pair against the effective encoding region;
// writes 1 for inside, 0 for outside.
//
// # Safety
// `out_inside` must be writable.
enum CbfpStatus cbfp_eer_classify(uint32_t e_re,
                                  uint32_t e_im,
                                  uint32_t e_max,
                                  enum CbfpFormat format,
                                  enum CbfpMode mode,
                                  int32_t *out_inside);

// RMS error-vector magnitude in percent between two complex sequences
// given as parallel real/imaginary arrays of length `n`.
//
// # Safety
// All four input pointers must reference `n` readable doubles and `out`
// must be writable.
enum CbfpStatus cbfp_evm_percent(const double *ref_re,
                                 const double *ref_im,
                                 const double *test_re,
                                 const double *test_im,
                                 size_t n,
                                 double *out);

// Ratio of largest to smallest non-zero magnitude, in dB.
//
// # Safety
// `values` must reference `n` readable doubles and `out` be writable.
enum CbfpStatus cbfp_dynamic_range_db(const double *values, size_t n, double *out);

// Root-raised-cosine taps; `taps_len` must be `filter_order + 1`.
//
// # Safety
// `taps_out` must reference `taps_len` writable doubles.
enum CbfpStatus cbfp_rrc_taps(double alpha,
                              uint32_t filter_order,
                              uint32_t upsample,
                              double *taps_out,
                              size_t taps_len);

// Serialize a block to a file in the 16-byte-header wire format.
//
// # Safety
// `block` must be a live handle and `path` a NUL-terminated string.
enum CbfpStatus cbfp_block_write_file(const struct CbfpBlock *block, const char *path);

// Read a serialized block from a file into a fresh handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out_block` writable.
enum CbfpStatus cbfp_block_read_file(const char *path, struct CbfpBlock **out_block);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CBFP_H */
