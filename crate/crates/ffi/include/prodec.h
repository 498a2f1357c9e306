#ifndef PRODEC_H
#define PRODEC_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum ProdecStatus {
  PRODEC_STATUS_OK = 0,
  PRODEC_STATUS_NULL_POINTER = 1,
  PRODEC_STATUS_INVALID_ARGUMENT = 2,
  PRODEC_STATUS_LENGTH_MISMATCH = 3,
  PRODEC_STATUS_MISSING_LUT = 4,
  PRODEC_STATUS_MALFORMED_MESSAGE = 5,
  PRODEC_STATUS_IO = 6,
  PRODEC_STATUS_LUT_FORMAT = 7,
  PRODEC_STATUS_PANIC = 8,
} ProdecStatus;

/**
 * Decoder selection.
 */
typedef enum ProdecDecoderKind {
  PRODEC_DECODER_KIND_IBDD = 0,
  PRODEC_DECODER_KIND_IDEAL_IBDD = 1,
  PRODEC_DECODER_KIND_IBDD_SR = 2,
  PRODEC_DECODER_KIND_IBDD_CR = 3,
  PRODEC_DECODER_KIND_BEE = 4,
} ProdecDecoderKind;

/**
 * A BCH/eBCH component code.
 */
typedef struct ProdecCode ProdecCode;

/**
 * A combining table.
 */
typedef struct ProdecLut ProdecLut;

/**
 * A product-code decoder over an owned component code and table.
 */
typedef struct ProdecPcDecoder ProdecPcDecoder;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len - 1` bytes). Returns the full message
 * length, so a call with `len = 0` sizes the buffer.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t prodec_last_error_message(char *buf, size_t len);

/**
 * Builds a code of length `2^v - 1 - s` (+1 when `extended`).
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ProdecStatus prodec_code_new(uint32_t v,
                                  size_t t,
                                  size_t s,
                                  bool extended,
                                  struct ProdecCode **out);

/**
 * # Safety
 * `code` must be null or a handle from [`prodec_code_new`] not yet freed.
 */
void prodec_code_free(struct ProdecCode *code);

/**
 * Code length, or 0 for a null handle.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t prodec_code_n(const struct ProdecCode *code);

/**
 * Information length, or 0 for a null handle.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t prodec_code_k(const struct ProdecCode *code);

/**
 * Designed minimum distance, or 0 for a null handle.
 *
 * # Safety
 * `code` must be null or a live handle.
 */
size_t prodec_code_dmin(const struct ProdecCode *code);

/**
 * Systematic encoding: `info[0..k]` to `codeword[0..n]`.
 *
 * # Safety
 * `info` must hold `k` bytes and `codeword` room for `n`.
 */
enum ProdecStatus prodec_code_encode(const struct ProdecCode *code,
                                     const uint8_t *info,
                                     size_t k,
                                     uint8_t *codeword,
                                     size_t n);

/**
 * Bounded-distance decoding in place. On failure `word` is left unchanged
 * and `*decoded` is false; the status is still `Ok`.
 *
 * # Safety
 * `word` must hold `n` bytes; `decoded` must be valid for one write.
 */
enum ProdecStatus prodec_code_bdd(const struct ProdecCode *code,
                                  uint8_t *word,
                                  size_t n,
                                  bool *decoded);

/**
 * Errors-and-erasures decoding in place, with erased positions
 * `erasures[0..count]`. On failure `word` is left unchanged.
 *
 * # Safety
 * `word` must hold `n` bytes, `erasures` `count` entries (may be null when
 * `count` is 0), and `decoded` must be valid for one write.
 */
enum ProdecStatus prodec_code_eed(const struct ProdecCode *code,
                                  uint8_t *word,
                                  size_t n,
                                  const size_t *erasures,
                                  size_t count,
                                  bool *decoded);

/**
 * Packs a ternary message (`values[0..n]` in {-1, 0, +1}, all zero for a
 * failure) into `n + 1` wire bits.
 *
 * # Safety
 * `values` must hold `n` entries and `bits` room for `n + 1`.
 */
enum ProdecStatus prodec_pack(const int8_t *values, size_t n, uint8_t *bits, size_t bits_len);

/**
 * Inverse of [`prodec_pack`]: `bits[0..n+1]` to `values[0..n]`.
 *
 * # Safety
 * `bits` must hold `bits_len` bytes and `values` room for `bits_len - 1`.
 */
enum ProdecStatus prodec_unpack(const uint8_t *bits, size_t bits_len, int8_t *values, size_t n);

/**
 * Noise standard deviation per real dimension for Eb/N0 `ebn0_db`, code
 * rate `rate` and `m` bits per real dimension.
 *
 * # Safety
 * `sigma` must be valid for one write.
 */
enum ProdecStatus prodec_sigma_for_ebn0(uint32_t m, double ebn0_db, double rate, double *sigma);

/**
 * A table with weight `w` at every one of `iterations` iterations.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum ProdecStatus prodec_lut_constant(double w, size_t iterations, struct ProdecLut **out);

/**
 * Loads the table closest to `sigma` from a table file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` valid for one write.
 */
enum ProdecStatus prodec_lut_load(const char *path, double sigma, struct ProdecLut **out);

/**
 * # Safety
 * `lut` must be null or a live handle.
 */
void prodec_lut_free(struct ProdecLut *lut);

/**
 * Creates a product-code decoder. The code and table are copied, so both
 * handles may be freed afterwards. `lut` may be null for decoders without
 * a table.
 *
 * # Safety
 * `code` must be live, `lut` null or live, `out` valid for one write.
 */
enum ProdecStatus prodec_pc_decoder_new(const struct ProdecCode *code,
                                        enum ProdecDecoderKind kind,
                                        size_t soft_iterations,
                                        size_t appended_iterations,
                                        bool erasure_branch,
                                        const struct ProdecLut *lut,
                                        struct ProdecPcDecoder **out);

/**
 * Routes BEE messages through the packed wire format.
 *
 * # Safety
 * `dec` must be null or a live handle.
 */
enum ProdecStatus prodec_pc_decoder_set_packed(struct ProdecPcDecoder *dec, bool packed);

/**
 * # Safety
 * `dec` must be null or a live handle.
 */
void prodec_pc_decoder_free(struct ProdecPcDecoder *dec);

/**
 * Decodes one `n x n` array of channel LLRs (row-major, `len = n * n`)
 * into hard decisions. `reference` (the transmitted array) may be null
 * except for the genie-aided decoder.
 *
 * # Safety
 * `llr` must hold `len` values, `reference` null or `len` bytes, and
 * `decisions` room for `len` bytes.
 */
enum ProdecStatus prodec_pc_decode(const struct ProdecPcDecoder *dec,
                                   const double *llr,
                                   size_t len,
                                   double sigma,
                                   const uint8_t *reference,
                                   uint8_t *decisions);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRODEC_H */
