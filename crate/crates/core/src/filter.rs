//! The countBF counting Bloom filter.
//!
//! Cells live in a row-major `x * y` array. Each of the `k` hash functions
//! selects one cell and one counter slot inside it from a single hash value
//! `h`: row `h % x`, column `h % y`, slot `h % eta`.
//!
//! The filter has no internal locking. Mutation needs `&mut self`; lookups and
//! counts take `&self` and may run concurrently.

use crate::cell::MaskTable;
use crate::error::{Error, Result};
use crate::hashing::{derive_indices_unchecked, hash64, HashSeed};
use crate::sizing::FilterPlan;

const SNAPSHOT_MAGIC: &[u8; 8] = b"COUNTBF1";

#[derive(Clone, Debug, PartialEq, Eq)]
enum Cells {
    W32(Vec<u32>),
    W64(Vec<u64>),
}

impl Cells {
    fn zeroed(beta: u32, len: usize) -> Self {
        match beta {
            32 => Cells::W32(vec![0; len]),
            _ => Cells::W64(vec![0; len]),
        }
    }

    #[inline(always)]
    fn get(&self, idx: usize) -> u64 {
        match self {
            Cells::W32(v) => u64::from(v[idx]),
            Cells::W64(v) => v[idx],
        }
    }

    #[inline(always)]
    fn set(&mut self, idx: usize, value: u64) {
        match self {
            Cells::W32(v) => v[idx] = value as u32,
            Cells::W64(v) => v[idx] = value,
        }
    }

    fn len(&self) -> usize {
        match self {
            Cells::W32(v) => v.len(),
            Cells::W64(v) => v.len(),
        }
    }
}

/// Operation tallies kept by a filter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilterStats {
    /// Calls to [`CountBf::insert`].
    pub inserted_ops: u64,
    /// Increments refused because the counter was saturated.
    pub overflow_events: u64,
    /// Decrements refused because the counter was already zero.
    pub underflow_events: u64,
}

/// Counting Bloom filter over a 2D grid of bit-packed counter cells.
#[derive(Clone, Debug)]
pub struct CountBf {
    plan: FilterPlan,
    masks: MaskTable,
    cells: Cells,
    stats: FilterStats,
}

impl CountBf {
    pub fn new(plan: FilterPlan) -> Result<Self> {
        plan.validate()?;
        let masks = MaskTable::new(plan.alpha, plan.beta)?;
        let cells = Cells::zeroed(plan.beta, plan.cells() as usize);
        Ok(Self {
            plan,
            masks,
            cells,
            stats: FilterStats::default(),
        })
    }

    /// Convenience for `CountBf::new(FilterPlan::new(..))`.
    pub fn with_capacity(n: u64, epsilon: f64, alpha: u32, beta: u32, seed: u64) -> Result<Self> {
        Self::new(FilterPlan::new(n, epsilon, alpha, beta, seed)?)
    }

    pub fn plan(&self) -> &FilterPlan {
        &self.plan
    }

    pub fn masks(&self) -> &MaskTable {
        &self.masks
    }

    pub fn stats(&self) -> FilterStats {
        self.stats
    }

    #[inline(always)]
    fn locate(&self, key: &[u8], seed: HashSeed) -> (usize, u32) {
        let h = hash64(key, seed);
        let c = derive_indices_unchecked(h, self.plan.x, self.plan.y, self.plan.eta);
        ((c.i * self.plan.y + c.j) as usize, c.l)
    }

    /// Adds `key`, incrementing one counter per hash function. Returns how
    /// many of the `k` counters were already saturated.
    pub fn insert(&mut self, key: &[u8]) -> u32 {
        let mut overflows = 0;
        for s in 0..self.plan.seeds.len() {
            let (idx, l) = self.locate(key, self.plan.seeds[s]);
            let (cell, overflow) = self.masks.incr(self.cells.get(idx), l);
            if overflow {
                overflows += 1;
            } else {
                self.cells.set(idx, cell);
            }
        }
        self.stats.inserted_ops += 1;
        self.stats.overflow_events += u64::from(overflows);
        overflows
    }

    /// True if every one of the key's `k` counters is non-zero.
    pub fn lookup(&self, key: &[u8]) -> bool {
        self.plan.seeds.iter().all(|&seed| {
            let (idx, l) = self.locate(key, seed);
            self.masks.get(self.cells.get(idx), l) != 0
        })
    }

    /// Removes one occurrence of `key`, decrementing its `k` counters.
    ///
    /// Not transactional: every non-zero, non-saturated counter is decremented
    /// even when another of the key's counters is already zero. The return
    /// value is the number of zero counters met; anything above 0 means the
    /// key was most likely never inserted.
    pub fn delete(&mut self, key: &[u8]) -> u32 {
        let mut underflows = 0;
        for s in 0..self.plan.seeds.len() {
            let (idx, l) = self.locate(key, self.plan.seeds[s]);
            let (cell, underflow) = self.masks.decr(self.cells.get(idx), l);
            if underflow {
                underflows += 1;
            } else {
                self.cells.set(idx, cell);
            }
        }
        self.stats.underflow_events += u64::from(underflows);
        underflows
    }

    /// Frequency estimate: the smallest of the key's `k` counters. Never
    /// below the true multiplicity while no counter has saturated; 0 means
    /// the key is definitely absent.
    pub fn count(&self, key: &[u8]) -> u64 {
        self.plan
            .seeds
            .iter()
            .map(|&seed| {
                let (idx, l) = self.locate(key, seed);
                self.masks.get(self.cells.get(idx), l)
            })
            .min()
            .unwrap_or(0)
    }

    /// Size of the cell array in bits, `x * y * beta`.
    pub fn memory_bits(&self) -> u64 {
        self.plan.memory_bits()
    }

    /// Fraction of the `x * y * eta` counters that are non-zero.
    pub fn occupancy(&self) -> f64 {
        let eta = self.masks.eta();
        let nonzero: u64 = (0..self.cells.len())
            .map(|idx| {
                let cell = self.cells.get(idx);
                (0..eta).filter(|&l| self.masks.get(cell, l) != 0).count() as u64
            })
            .sum();
        nonzero as f64 / (self.cells.len() as f64 * f64::from(eta))
    }

    /// Sum of every counter in the filter.
    pub fn counter_total(&self) -> u64 {
        let eta = self.masks.eta();
        (0..self.cells.len())
            .map(|idx| {
                let cell = self.cells.get(idx);
                (0..eta).map(|l| self.masks.get(cell, l)).sum::<u64>()
            })
            .sum()
    }

    /// Raw cell word at row `i`, column `j`.
    pub fn cell(&self, i: u64, j: u64) -> Option<u64> {
        (i < self.plan.x && j < self.plan.y).then(|| self.cells.get((i * self.plan.y + j) as usize))
    }

    /// Serializes the filter: `COUNTBF1`, then `x, y, alpha, beta, k` and the
    /// `k` seeds as little-endian u64, then the `x * y` cells row-major as
    /// little-endian words of `beta / 8` bytes. Statistics are not included.
    pub fn snapshot(&self) -> Vec<u8> {
        let p = &self.plan;
        let mut out = Vec::with_capacity(
            8 + 8 * (5 + p.seeds.len()) + self.cells.len() * (p.beta as usize / 8),
        );
        out.extend_from_slice(SNAPSHOT_MAGIC);
        for v in [p.x, p.y, u64::from(p.alpha), u64::from(p.beta), u64::from(p.k)] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for s in &p.seeds {
            out.extend_from_slice(&s.0.to_le_bytes());
        }
        match &self.cells {
            Cells::W32(v) => v.iter().for_each(|c| out.extend_from_slice(&c.to_le_bytes())),
            Cells::W64(v) => v.iter().for_each(|c| out.extend_from_slice(&c.to_le_bytes())),
        }
        out
    }

    /// Rebuilds a filter from [`CountBf::snapshot`] output. The plan's `n`,
    /// `epsilon` and `m_bits` are not stored and come back as 0 / NaN / 0.
    pub fn from_snapshot(bytes: &[u8]) -> Result<Self> {
        let rest = bytes
            .strip_prefix(SNAPSHOT_MAGIC)
            .ok_or(Error::Snapshot("missing COUNTBF1 header"))?;
        let mut words = rest.chunks_exact(8);
        let mut next = || {
            words
                .next()
                .map(|w| u64::from_le_bytes(w.try_into().expect("8-byte chunk")))
                .ok_or(Error::Snapshot("truncated header"))
        };
        let (x, y) = (next()?, next()?);
        let narrow = |v: u64| u32::try_from(v).map_err(|_| Error::Snapshot("field out of range"));
        let alpha = narrow(next()?)?;
        let beta = narrow(next()?)?;
        let k = narrow(next()?)?;
        if k as usize > rest.len() / 8 {
            return Err(Error::Snapshot("truncated seed list"));
        }
        let seeds = (0..k).map(|_| next().map(HashSeed)).collect::<Result<Vec<_>>>()?;
        let plan = FilterPlan {
            n: 0,
            epsilon: f64::NAN,
            m_bits: 0,
            k,
            alpha,
            beta,
            eta: crate::cell::counters_per_cell(alpha, beta)?,
            x,
            y,
            seeds,
        };
        let header = 8 + 8 * (5 + k as usize);
        let body = &bytes[header..];
        let width = beta as usize / 8;
        plan.validate()?;
        if body.len() != plan.cells() as usize * width {
            return Err(Error::Snapshot("cell payload length does not match dimensions"));
        }
        let mut filter = Self::new(plan)?;
        let used = u64::MAX >> (64 - filter.masks.eta() * alpha);
        for (idx, chunk) in body.chunks_exact(width).enumerate() {
            let cell = match width {
                4 => u64::from(u32::from_le_bytes(chunk.try_into().expect("4-byte cell"))),
                _ => u64::from_le_bytes(chunk.try_into().expect("8-byte cell")),
            };
            if cell & !used != 0 {
                return Err(Error::Snapshot("non-zero waste bits"));
            }
            filter.cells.set(idx, cell);
        }
        Ok(filter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::derive_indices;
    use std::collections::HashMap;

    fn small(alpha: u32, k: u32) -> CountBf {
        CountBf::new(FilterPlan::with_dimensions(101, 103, alpha, 64, k, 7).unwrap()).unwrap()
    }

    /// Positions computed straight from the hashing module, for cross-checks.
    fn positions(f: &CountBf, key: &[u8]) -> Vec<(u64, u64, u32)> {
        let p = f.plan();
        p.seeds
            .iter()
            .map(|&s| {
                let c = derive_indices(hash64(key, s), p.x, p.y, p.eta).unwrap();
                (c.i, c.j, c.l)
            })
            .collect()
    }

    #[test]
    fn empty_filter() {
        let f = small(8, 5);
        assert!(!f.lookup(b"anything"));
        assert_eq!(f.count(b"anything"), 0);
        assert_eq!(f.memory_bits(), 665_792);
        assert_eq!(f.occupancy(), 0.0);
        assert_eq!(f.stats(), FilterStats::default());
    }

    #[test]
    fn rejects_square_grid() {
        let mut plan = FilterPlan::with_dimensions(101, 103, 8, 64, 5, 7).unwrap();
        plan.y = 101;
        assert!(CountBf::new(plan).is_err());
    }

    #[test]
    fn insert_touches_exactly_k_counters() {
        let mut f = small(8, 5);
        assert_eq!(f.insert(b"hello"), 0);
        assert!(f.lookup(b"hello"));
        assert_eq!(f.counter_total(), 5);

        let pos = positions(&f, b"hello");
        let mut expected: HashMap<(u64, u64, u32), u64> = HashMap::new();
        for p in &pos {
            *expected.entry(*p).or_default() += 1;
        }
        for (&(i, j, l), &c) in &expected {
            let cell = f.cell(i, j).unwrap();
            assert_eq!(f.masks().read_counter(cell, l).unwrap(), c);
        }
        let eta = f.masks().eta();
        let nonzero = (0..101)
            .flat_map(|i| (0..103).map(move |j| (i, j)))
            .map(|(i, j)| {
                let cell = f.cell(i, j).unwrap();
                (0..eta).filter(|&l| f.masks().read_counter(cell, l).unwrap() > 0).count()
            })
            .sum::<usize>();
        assert_eq!(nonzero, expected.len());
    }

    #[test]
    fn three_bit_counters_saturate() {
        let mut f = small(3, 5);
        let overflows: Vec<u32> = (0..8).map(|_| f.insert(b"heavy")).collect();
        assert!(overflows[7] >= 1, "{overflows:?}");
        assert_eq!(f.count(b"heavy"), 7);
        assert_eq!(f.stats().overflow_events, overflows.iter().map(|&o| u64::from(o)).sum::<u64>());
        assert_eq!(f.stats().inserted_ops, 8);
    }

    #[test]
    fn delete_roundtrip() {
        let mut f = small(4, 5);
        f.insert(b"k1");
        assert_eq!(f.delete(b"k1"), 0);
        assert!(!f.lookup(b"k1"));
        assert_eq!(f.counter_total(), 0);
    }

    #[test]
    fn delete_on_empty_filter_underflows_every_counter() {
        let mut f = small(4, 5);
        let before = f.snapshot();
        assert_eq!(f.delete(b"ghost"), 5);
        assert_eq!(f.snapshot(), before);
        assert_eq!(f.stats().underflow_events, 5);
    }

    #[test]
    fn delete_half_keeps_the_rest() {
        let mut f = CountBf::with_capacity(1000, 0.001, 4, 64, 11).unwrap();
        let keys: Vec<String> = (0..1000).map(|i| format!("key-{i}")).collect();
        for k in &keys {
            f.insert(k.as_bytes());
        }
        assert_eq!(f.stats().overflow_events, 0);
        for k in &keys[..500] {
            f.delete(k.as_bytes());
        }
        assert!(keys[500..].iter().all(|k| f.lookup(k.as_bytes())));
        // Deleted keys survive only as false positives; a half-size filter
        // at this load leaves many of them visible, but not all.
        let ghosts = keys[..500].iter().filter(|k| f.lookup(k.as_bytes())).count();
        assert!(ghosts < 500, "{ghosts}");
    }

    #[test]
    fn count_tracks_repeats() {
        let mut f = small(8, 5);
        for _ in 0..3 {
            f.insert(b"x");
        }
        assert_eq!(f.count(b"x"), 3);
        assert_eq!(f.count(b"never"), 0);
    }

    #[test]
    fn occupancy_matches_scan() {
        let mut f = CountBf::new(FilterPlan::with_dimensions(1009, 1013, 8, 64, 3, 5).unwrap()).unwrap();
        let mut distinct = std::collections::HashSet::new();
        for i in 0..50 {
            let key = format!("item{i}");
            distinct.extend(positions(&f, key.as_bytes()));
            f.insert(key.as_bytes());
        }
        let total = 1009.0 * 1013.0 * 8.0;
        assert_eq!(f.occupancy(), distinct.len() as f64 / total);
        if distinct.len() == 150 {
            assert_eq!(f.occupancy(), 3.0 * 50.0 / total);
        }
    }

    #[test]
    fn snapshot_layout() {
        let mut f = CountBf::new(FilterPlan::with_dimensions(5, 7, 8, 32, 2, 3).unwrap()).unwrap();
        f.insert(b"a");
        let snap = f.snapshot();
        assert_eq!(&snap[..8], b"COUNTBF1");
        assert_eq!(u64::from_le_bytes(snap[8..16].try_into().unwrap()), 5);
        assert_eq!(u64::from_le_bytes(snap[32..40].try_into().unwrap()), 32);
        assert_eq!(snap.len(), 8 + 8 * 7 + 35 * 4);
        let back = CountBf::from_snapshot(&snap).unwrap();
        assert_eq!(back.snapshot(), snap);
        assert!(back.lookup(b"a"));
    }

    #[test]
    fn snapshot_rejects_garbage() {
        let f = small(8, 2);
        let snap = f.snapshot();
        assert!(CountBf::from_snapshot(b"NOTCOUNT").is_err());
        assert!(CountBf::from_snapshot(&snap[..snap.len() - 1]).is_err());
        assert!(CountBf::from_snapshot(&snap[..20]).is_err());
        let mut waste = small(7, 2).snapshot();
        let last = waste.len() - 1;
        waste[last] = 0x80;
        assert!(matches!(
            CountBf::from_snapshot(&waste),
            Err(Error::Snapshot("non-zero waste bits"))
        ));
    }

    #[test]
    fn thirty_two_bit_cells_work() {
        let mut f = CountBf::with_capacity(10_000, 0.01, 4, 32, 1).unwrap();
        assert_eq!(f.masks().eta(), 8);
        for i in 0..1000 {
            f.insert(format!("{i}").as_bytes());
        }
        assert!((0..1000).all(|i| f.lookup(format!("{i}").as_bytes())));
        assert_eq!(f.memory_bits(), f.plan().x * f.plan().y * 32);
    }
}
