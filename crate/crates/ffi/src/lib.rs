//! C ABI for the countBF counting Bloom filter.
//!
//! Filters are opaque heap handles created by `countbf_new*` or
//! `countbf_from_snapshot` and released with `countbf_free`. Every fallible
//! call returns a [`CountbfStatus`] and writes results through out-pointers.
//! The header `include/countbf.h` is regenerated by `build.rs`.
//!
//! A handle may be shared across threads for concurrent read-only calls
//! (`lookup`, `count`, stats, snapshots); `insert` and `delete` need
//! exclusive access, which the caller must provide.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use countbf::{CountBf, Error, FilterPlan, HashSeed};

/// Opaque filter handle.
pub struct CountbfFilter {
    inner: CountBf,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountbfStatus {
    Ok = 0,
    NullPointer = 1,
    /// A width, rate or count argument is out of range.
    InvalidArgument = 2,
    /// Dimensions, hash count or seeds do not form a valid filter.
    InvalidPlan = 3,
    MalformedSnapshot = 4,
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// Operation tallies, mirrored from the Rust side.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountbfStats {
    pub inserted_ops: u64,
    pub overflow_events: u64,
    pub underflow_events: u64,
}

/// Shape of a filter.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountbfGeometry {
    pub x: u64,
    pub y: u64,
    pub alpha: u32,
    pub beta: u32,
    pub eta: u32,
    pub k: u32,
}

fn status_of(e: &Error) -> CountbfStatus {
    match e {
        Error::InvalidCellWidth(_)
        | Error::InvalidCounterWidth { .. }
        | Error::CounterIndexOutOfRange { .. }
        | Error::CounterValueTooLarge { .. }
        | Error::ZeroModulus { .. }
        | Error::ZeroItems
        | Error::InvalidFalsePositiveRate(_) => CountbfStatus::InvalidArgument,
        Error::DimensionsTooSmall { .. }
        | Error::InvalidDimensions { .. }
        | Error::ZeroHashCount
        | Error::SeedCount { .. }
        | Error::DuplicateSeed(_) => CountbfStatus::InvalidPlan,
        Error::Snapshot(_) => CountbfStatus::MalformedSnapshot,
        _ => CountbfStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> CountbfStatus) -> CountbfStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(CountbfStatus::Internal)
}

/// Key bytes; a NULL pointer is allowed only together with `len == 0`.
unsafe fn key_slice<'a>(key: *const u8, len: usize) -> Option<&'a [u8]> {
    if key.is_null() {
        (len == 0).then_some(&[][..])
    } else {
        Some(slice::from_raw_parts(key, len))
    }
}

unsafe fn publish(out: *mut *mut CountbfFilter, result: countbf::Result<CountBf>) -> CountbfStatus {
    match result {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(CountbfFilter { inner }));
            CountbfStatus::Ok
        }
        Err(e) => {
            *out = ptr::null_mut();
            status_of(&e)
        }
    }
}

/// Creates a filter sized for `n` items at false positive target `epsilon`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn countbf_new(
    n: u64,
    epsilon: f64,
    alpha: u32,
    beta: u32,
    master_seed: u64,
    out: *mut *mut CountbfFilter,
) -> CountbfStatus {
    if out.is_null() {
        return CountbfStatus::NullPointer;
    }
    guard(|| publish(out, CountBf::with_capacity(n, epsilon, alpha, beta, master_seed)))
}

/// Creates a filter with explicit prime dimensions `x != y` and `k` hash
/// functions whose seeds are expanded from `master_seed`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn countbf_new_with_dimensions(
    x: u64,
    y: u64,
    alpha: u32,
    beta: u32,
    k: u32,
    master_seed: u64,
    out: *mut *mut CountbfFilter,
) -> CountbfStatus {
    if out.is_null() {
        return CountbfStatus::NullPointer;
    }
    guard(|| {
        let filter = FilterPlan::with_dimensions(x, y, alpha, beta, k, master_seed).and_then(CountBf::new);
        publish(out, filter)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `filter` must be NULL or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn countbf_free(filter: *mut CountbfFilter) {
    if !filter.is_null() {
        drop(Box::from_raw(filter));
    }
}

/// Inserts a key. `out_overflows` (optional) receives how many of the `k`
/// counters were already saturated.
///
/// # Safety
/// `filter` must be a live handle with no concurrent users; `key` must point
/// to `len` readable bytes; `out_overflows` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn countbf_insert(
    filter: *mut CountbfFilter,
    key: *const u8,
    len: usize,
    out_overflows: *mut u32,
) -> CountbfStatus {
    let (Some(f), Some(key)) = (filter.as_mut(), key_slice(key, len)) else {
        return CountbfStatus::NullPointer;
    };
    guard(|| {
        let o = f.inner.insert(key);
        if !out_overflows.is_null() {
            *out_overflows = o;
        }
        CountbfStatus::Ok
    })
}

/// Removes one occurrence of a key. `out_underflows` (optional) receives how
/// many of the key's counters were already zero; the decrement is not
/// rolled back when that is non-zero.
///
/// # Safety
/// As for [`countbf_insert`].
#[no_mangle]
pub unsafe extern "C" fn countbf_delete(
    filter: *mut CountbfFilter,
    key: *const u8,
    len: usize,
    out_underflows: *mut u32,
) -> CountbfStatus {
    let (Some(f), Some(key)) = (filter.as_mut(), key_slice(key, len)) else {
        return CountbfStatus::NullPointer;
    };
    guard(|| {
        let u = f.inner.delete(key);
        if !out_underflows.is_null() {
            *out_underflows = u;
        }
        CountbfStatus::Ok
    })
}

/// Membership query.
///
/// # Safety
/// `filter` must be a live handle; `key` must point to `len` readable bytes;
/// `out_present` must be writable.
#[no_mangle]
pub unsafe extern "C" fn countbf_lookup(
    filter: *const CountbfFilter,
    key: *const u8,
    len: usize,
    out_present: *mut bool,
) -> CountbfStatus {
    let (Some(f), Some(key)) = (filter.as_ref(), key_slice(key, len)) else {
        return CountbfStatus::NullPointer;
    };
    if out_present.is_null() {
        return CountbfStatus::NullPointer;
    }
    guard(|| {
        *out_present = f.inner.lookup(key);
        CountbfStatus::Ok
    })
}

/// Frequency estimate: the minimum of the key's `k` counters.
///
/// # Safety
/// As for [`countbf_lookup`].
#[no_mangle]
pub unsafe extern "C" fn countbf_count(
    filter: *const CountbfFilter,
    key: *const u8,
    len: usize,
    out_count: *mut u64,
) -> CountbfStatus {
    let (Some(f), Some(key)) = (filter.as_ref(), key_slice(key, len)) else {
        return CountbfStatus::NullPointer;
    };
    if out_count.is_null() {
        return CountbfStatus::NullPointer;
    }
    guard(|| {
        *out_count = f.inner.count(key);
        CountbfStatus::Ok
    })
}

/// Filter size in bits; 0 for NULL.
///
/// # Safety
/// `filter` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn countbf_memory_bits(filter: *const CountbfFilter) -> u64 {
    filter.as_ref().map_or(0, |f| f.inner.memory_bits())
}

/// Fraction of non-zero counters; NaN for NULL.
///
/// # Safety
/// `filter` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn countbf_occupancy(filter: *const CountbfFilter) -> f64 {
    filter.as_ref().map_or(f64::NAN, |f| f.inner.occupancy())
}

/// # Safety
/// `filter` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn countbf_stats(filter: *const CountbfFilter, out: *mut CountbfStats) -> CountbfStatus {
    let (Some(f), false) = (filter.as_ref(), out.is_null()) else {
        return CountbfStatus::NullPointer;
    };
    let s = f.inner.stats();
    *out = CountbfStats {
        inserted_ops: s.inserted_ops,
        overflow_events: s.overflow_events,
        underflow_events: s.underflow_events,
    };
    CountbfStatus::Ok
}

/// # Safety
/// `filter` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn countbf_geometry(filter: *const CountbfFilter, out: *mut CountbfGeometry) -> CountbfStatus {
    let (Some(f), false) = (filter.as_ref(), out.is_null()) else {
        return CountbfStatus::NullPointer;
    };
    let p = f.inner.plan();
    *out = CountbfGeometry {
        x: p.x,
        y: p.y,
        alpha: p.alpha,
        beta: p.beta,
        eta: p.eta,
        k: p.k,
    };
    CountbfStatus::Ok
}

/// Serializes the filter into `buf` (the `COUNTBF1` snapshot format).
/// `out_len` always receives the required size; pass `buf = NULL, cap = 0`
/// to query it. Returns `BufferTooSmall` if `cap` is insufficient.
///
/// # Safety
/// `filter` must be a live handle; `buf` must be NULL or point to `cap`
/// writable bytes; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn countbf_snapshot(
    filter: *const CountbfFilter,
    buf: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> CountbfStatus {
    let (Some(f), false) = (filter.as_ref(), out_len.is_null()) else {
        return CountbfStatus::NullPointer;
    };
    guard(|| {
        let bytes = f.inner.snapshot();
        *out_len = bytes.len();
        if buf.is_null() || cap < bytes.len() {
            return CountbfStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        CountbfStatus::Ok
    })
}

/// Rebuilds a filter from snapshot bytes.
///
/// # Safety
/// `buf` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn countbf_from_snapshot(
    buf: *const u8,
    len: usize,
    out: *mut *mut CountbfFilter,
) -> CountbfStatus {
    if out.is_null() {
        return CountbfStatus::NullPointer;
    }
    let Some(bytes) = key_slice(buf, len) else {
        *out = ptr::null_mut();
        return CountbfStatus::NullPointer;
    };
    guard(|| publish(out, CountBf::from_snapshot(bytes)))
}

/// The filter's keyed hash, for cross-language verification.
///
/// # Safety
/// `key` must point to `len` readable bytes (or be NULL with `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn countbf_hash64(key: *const u8, len: usize, seed: u64) -> u64 {
    key_slice(key, len).map_or(0, |k| countbf::hash64(k, HashSeed(seed)))
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn countbf_status_message(status: CountbfStatus) -> *const c_char {
    let msg: &'static CStr = match status {
        CountbfStatus::Ok => c"ok",
        CountbfStatus::NullPointer => c"null pointer argument",
        CountbfStatus::InvalidArgument => c"argument out of range",
        CountbfStatus::InvalidPlan => c"invalid filter dimensions, hash count or seeds",
        CountbfStatus::MalformedSnapshot => c"malformed snapshot",
        CountbfStatus::BufferTooSmall => c"output buffer too small",
        CountbfStatus::Internal => c"internal error",
    };
    msg.as_ptr()
}
