//! Reference filters: a standard Bloom filter and a classic counting Bloom
//! filter with 4-bit counters.
//!
//! Both are sized as `m = sbf_bits(n, epsilon)` slots with
//! `k = optimal_k(m, n)` hash functions and place key `K` at
//! `hash64(K, seed_i) % m`. Built from the same master seed they probe the
//! same slots, so their lookups agree key for key.

use crate::error::Result;
use crate::hashing::{expand_seeds, hash64, HashSeed};
use crate::sizing::{optimal_k, sbf_bits};

#[inline]
fn slot(key: &[u8], seed: HashSeed, m: u64) -> usize {
    (hash64(key, seed) % m) as usize
}

/// Standard Bloom filter: a bitmap of `m` bits. No deletion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardBloom {
    bits: Vec<u64>,
    m: u64,
    seeds: Vec<HashSeed>,
}

impl StandardBloom {
    pub fn new(n: u64, epsilon: f64, master_seed: u64) -> Result<Self> {
        let m = sbf_bits(n, epsilon)?;
        let k = optimal_k(m, n)?;
        Ok(Self {
            bits: vec![0; m.div_ceil(64) as usize],
            m,
            seeds: expand_seeds(master_seed, k as usize),
        })
    }

    pub fn k(&self) -> u32 {
        self.seeds.len() as u32
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn insert(&mut self, key: &[u8]) {
        for s in 0..self.seeds.len() {
            let b = slot(key, self.seeds[s], self.m);
            self.bits[b / 64] |= 1 << (b % 64);
        }
    }

    pub fn lookup(&self, key: &[u8]) -> bool {
        self.seeds.iter().all(|&s| {
            let b = slot(key, s, self.m);
            self.bits[b / 64] & (1 << (b % 64)) != 0
        })
    }

    /// `m` bits.
    pub fn memory_bits(&self) -> u64 {
        self.m
    }
}

/// Counting Bloom filter with `m` 4-bit counters, two per byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingBloom {
    nibbles: Vec<u8>,
    m: u64,
    seeds: Vec<HashSeed>,
    overflow_events: u64,
    underflow_events: u64,
}

const NIBBLE_MAX: u8 = 15;

impl CountingBloom {
    pub const COUNTER_BITS: u32 = 4;

    pub fn new(n: u64, epsilon: f64, master_seed: u64) -> Result<Self> {
        let m = sbf_bits(n, epsilon)?;
        let k = optimal_k(m, n)?;
        Ok(Self {
            nibbles: vec![0; m.div_ceil(2) as usize],
            m,
            seeds: expand_seeds(master_seed, k as usize),
            overflow_events: 0,
            underflow_events: 0,
        })
    }

    pub fn k(&self) -> u32 {
        self.seeds.len() as u32
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    #[inline]
    fn get(&self, slot: usize) -> u8 {
        (self.nibbles[slot / 2] >> ((slot % 2) * 4)) & 0x0F
    }

    #[inline]
    fn set(&mut self, slot: usize, v: u8) {
        let shift = (slot % 2) * 4;
        let byte = &mut self.nibbles[slot / 2];
        *byte = (*byte & !(0x0F << shift)) | (v << shift);
    }

    /// Counter at slot `slot`, for inspection.
    pub fn counter(&self, slot: u64) -> Option<u8> {
        (slot < self.m).then(|| self.get(slot as usize))
    }

    /// Returns the number of counters already saturated at 15.
    pub fn insert(&mut self, key: &[u8]) -> u32 {
        let mut overflows = 0;
        for s in 0..self.seeds.len() {
            let at = slot(key, self.seeds[s], self.m);
            let c = self.get(at);
            if c == NIBBLE_MAX {
                overflows += 1;
            } else {
                self.set(at, c + 1);
            }
        }
        self.overflow_events += u64::from(overflows);
        overflows
    }

    pub fn lookup(&self, key: &[u8]) -> bool {
        self.seeds.iter().all(|&s| self.get(slot(key, s, self.m)) != 0)
    }

    /// Decrements the key's counters. Zero counters are skipped and counted
    /// in the return value; saturated counters are never decremented.
    pub fn delete(&mut self, key: &[u8]) -> u32 {
        let mut underflows = 0;
        for s in 0..self.seeds.len() {
            let at = slot(key, self.seeds[s], self.m);
            match self.get(at) {
                0 => underflows += 1,
                NIBBLE_MAX => {}
                c => self.set(at, c - 1),
            }
        }
        self.underflow_events += u64::from(underflows);
        underflows
    }

    /// `4 * m` bits.
    pub fn memory_bits(&self) -> u64 {
        u64::from(Self::COUNTER_BITS) * self.m
    }

    pub fn overflow_events(&self) -> u64 {
        self.overflow_events
    }

    pub fn underflow_events(&self) -> u64 {
        self.underflow_events
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_bloom_has_no_false_negatives() {
        let mut f = StandardBloom::new(1000, 0.01, 3).unwrap();
        for i in 0..1000 {
            f.insert(format!("k{i}").as_bytes());
        }
        assert!((0..1000).all(|i| f.lookup(format!("k{i}").as_bytes())));
    }

    #[test]
    fn ten_million_item_sizes() {
        let sbf = StandardBloom::new(10_000_000, 0.001, 1).unwrap();
        assert_eq!(sbf.memory_bits(), 143_775_876);
        assert_eq!(sbf.k(), 10);
        let mb = sbf.memory_bits() as f64 / (8.0 * 1024.0 * 1024.0);
        assert!((mb - 17.13942).abs() < 1e-4, "{mb}");

        let cbf = CountingBloom::new(10_000_000, 0.001, 1).unwrap();
        assert_eq!(cbf.memory_bits(), 4 * sbf.memory_bits());
        let mb = cbf.memory_bits() as f64 / (8.0 * 1024.0 * 1024.0);
        assert!((mb - 68.557697).abs() < 1e-4, "{mb}");
    }

    #[test]
    fn counting_bloom_roundtrip() {
        let mut f = CountingBloom::new(100, 0.01, 9).unwrap();
        f.insert(b"a");
        assert!(f.lookup(b"a"));
        assert_eq!(f.delete(b"a"), 0);
        assert!(!f.lookup(b"a"));
        assert_eq!(f.delete(b"a"), f.k());
        assert_eq!(f.underflow_events(), u64::from(f.k()));
    }

    #[test]
    fn counting_bloom_saturates_at_fifteen() {
        let mut f = CountingBloom::new(100, 0.01, 9).unwrap();
        let overflows: u32 = (0..16).map(|_| f.insert(b"x")).sum();
        assert!(overflows >= 1);
        assert_eq!(f.overflow_events(), u64::from(overflows));
        for _ in 0..20 {
            f.delete(b"x");
        }
        // Saturated counters are sticky, so the key stays visible.
        assert!(f.lookup(b"x"));
    }

    #[test]
    fn nibble_packing_isolates_neighbours() {
        let mut f = CountingBloom::new(10, 0.1, 0).unwrap();
        f.set(4, 9);
        f.set(5, 3);
        assert_eq!((f.get(4), f.get(5)), (9, 3));
        f.set(4, 0);
        assert_eq!((f.get(4), f.get(5)), (0, 3));
        assert_eq!(f.counter(f.m()), None);
    }

    #[test]
    fn sbf_and_cbf_agree_on_every_key() {
        let mut sbf = StandardBloom::new(2000, 0.01, 77).unwrap();
        let mut cbf = CountingBloom::new(2000, 0.01, 77).unwrap();
        for i in 0..2000 {
            let k = format!("in{i}");
            sbf.insert(k.as_bytes());
            cbf.insert(k.as_bytes());
        }
        for i in 0..50_000 {
            let k = format!("q{i}");
            assert_eq!(sbf.lookup(k.as_bytes()), cbf.lookup(k.as_bytes()), "{k}");
        }
    }
}
