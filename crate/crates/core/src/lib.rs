//! countBF: a counting Bloom filter whose counters are packed several to a
//! machine word inside a two-dimensional grid of cells.
//!
//! ```
//! use countbf::CountBf;
//!
//! let mut filter = CountBf::with_capacity(10_000, 0.001, 4, 64, 42).unwrap();
//! filter.insert(b"apple");
//! filter.insert(b"apple");
//! assert!(filter.lookup(b"apple"));
//! assert_eq!(filter.count(b"apple"), 2);
//! filter.delete(b"apple");
//! assert_eq!(filter.count(b"apple"), 1);
//! ```
//!
//! Alongside the filter the crate ships a standard Bloom filter and a 4-bit
//! counting Bloom filter for comparison ([`baselines`]), synthetic workloads
//! with an exact oracle ([`workloads`]), evaluation metrics ([`metrics`]) and
//! the experiment drivers used by the `countbf` binary ([`bench`]).

pub mod baselines;
pub mod bench;
pub mod cell;
pub mod error;
pub mod filter;
pub mod hashing;
pub mod metrics;
pub mod sizing;
pub mod workloads;

pub use baselines::{CountingBloom, StandardBloom};
pub use cell::{counters_per_cell, wastage, MaskTable};
pub use error::{Error, Result};
pub use filter::{CountBf, FilterStats};
pub use hashing::{derive_indices, expand_seeds, hash64, CellIndex, HashSeed};
pub use sizing::{countbf_k, dimensions, optimal_k, sbf_bits, FilterPlan};
