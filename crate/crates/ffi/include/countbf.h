#ifndef COUNTBF_H
#define COUNTBF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CountbfStatus {
  COUNTBF_STATUS_OK = 0,
  COUNTBF_STATUS_NULL_POINTER = 1,
  // A width, rate or count argument is out of range.
  COUNTBF_STATUS_INVALID_ARGUMENT = 2,
  // Dimensions, hash count or seeds do not form a valid filter.
  COUNTBF_STATUS_INVALID_PLAN = 3,
  COUNTBF_STATUS_MALFORMED_SNAPSHOT = 4,
  COUNTBF_STATUS_BUFFER_TOO_SMALL = 5,
  // A Rust panic was caught at the boundary.
  COUNTBF_STATUS_INTERNAL = 6,
} CountbfStatus;

// Opaque filter handle.
typedef struct CountbfFilter CountbfFilter;

// Operation tallies, mirrored from the Rust side.
typedef struct CountbfStats {
  uint64_t inserted_ops;
  uint64_t overflow_events;
  uint64_t underflow_events;
} CountbfStats;

// Shape of a filter.
typedef struct CountbfGeometry {
  uint64_t x;
  uint64_t y;
  uint32_t alpha;
  uint32_t beta;
  uint32_t eta;
  uint32_t k;
} CountbfGeometry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a filter sized for `n` items at false positive target `epsilon`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle pointer.
enum CountbfStatus countbf_new(uint64_t n,
                               double epsilon,
                               uint32_t alpha,
                               uint32_t beta,
                               uint64_t master_seed,
                               struct CountbfFilter **out);

// Creates a filter with explicit prime dimensions `x != y` and `k` hash
// functions whose seeds are expanded from `master_seed`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle pointer.
enum CountbfStatus countbf_new_with_dimensions(uint64_t x,
                                               uint64_t y,
                                               uint32_t alpha,
                                               uint32_t beta,
                                               uint32_t k,
                                               uint64_t master_seed,
                                               struct CountbfFilter **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `filter` must be NULL or a handle from this library that has not been freed.
void countbf_free(struct CountbfFilter *filter);

// Inserts a key. `out_overflows` (optional) receives how many of the `k`
// counters were already saturated.
//
// # Safety
// `filter` must be a live handle with no concurrent users; `key` must point
// to `len` readable bytes; `out_overflows` must be NULL or writable.
enum CountbfStatus countbf_insert(struct CountbfFilter *filter,
                                  const uint8_t *key,
                                  size_t len,
                                  uint32_t *out_overflows);

// Removes one occurrence of a key. `out_underflows` (optional) receives how
// many of the key's counters were already zero; the decrement is not
// rolled back when that is non-zero.
//
// # Safety
// As for [`countbf_insert`].
enum CountbfStatus countbf_delete(struct CountbfFilter *filter,
                                  const uint8_t *key,
                                  size_t len,
                                  uint32_t *out_underflows);

// Membership query.
//
// # Safety
// `filter` must be a live handle; `key` must point to `len` readable bytes;
// `out_present` must be writable.
enum CountbfStatus countbf_lookup(const struct CountbfFilter *filter,
                                  const uint8_t *key,
                                  size_t len,
                                  bool *out_present);

// Frequency estimate: the minimum of the key's `k` counters.
//
// # Safety
// As for [`countbf_lookup`].
enum CountbfStatus countbf_count(const struct CountbfFilter *filter,
                                 const uint8_t *key,
                                 size_t len,
                                 uint64_t *out_count);

// Filter size in bits; 0 for NULL.
//
// # Safety
// `filter` must be NULL or a live handle.
uint64_t countbf_memory_bits(const struct CountbfFilter *filter);

// Fraction of non-zero counters; NaN for NULL.
//
// # Safety
// `filter` must be NULL or a live handle.
double countbf_occupancy(const struct CountbfFilter *filter);

// # Safety
// `filter` must be a live handle and `out` writable.
enum CountbfStatus countbf_stats(const struct CountbfFilter *filter, struct CountbfStats *out);

// # Safety
// `filter` must be a live handle and `out` writable.
enum CountbfStatus countbf_geometry(const struct CountbfFilter *filter,
                                    struct CountbfGeometry *out);

// Serializes the filter into `buf` (the `COUNTBF1` snapshot format).
// `out_len` always receives the required size; pass `buf = NULL, cap = 0`
// to query it. Returns `BufferTooSmall` if `cap` is insufficient.
//
// # Safety
// `filter` must be a live handle; `buf` must be NULL or point to `cap`
// writable bytes; `out_len` must be writable.
enum CountbfStatus countbf_snapshot(const struct CountbfFilter *filter,
                                    uint8_t *buf,
                                    size_t cap,
                                    size_t *out_len);

// Rebuilds a filter from snapshot bytes.
//
// # Safety
// `buf` must point to `len` readable bytes and `out` must be writable.
enum CountbfStatus countbf_from_snapshot(const uint8_t *buf,
                                         size_t len,
                                         struct CountbfFilter **out);

// The filter's keyed hash, for cross-language verification.
//
// # Safety
// `key` must point to `len` readable bytes (or be NULL with `len == 0`).
uint64_t countbf_hash64(const uint8_t *key, size_t len, uint64_t seed);

// Static, NUL-terminated description of a status code.
const char *countbf_status_message(enum CountbfStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COUNTBF_H */
