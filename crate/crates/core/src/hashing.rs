//! Keyed 64-bit hashing and index derivation.
//!
//! `hash64` is MurmurHash64A (Austin Appleby) with its seed XOR-ed into the
//! initial state, followed by the MurmurHash3 `fmix64` finalizer:
//!
//! ```text
//! m = 0xc6a4a7935bd1e995, r = 47
//! h = seed ^ (len * m)
//! for each 8-byte little-endian block k:
//!     k *= m; k ^= k >> r; k *= m; h ^= k; h *= m
//! if tail: h ^= tail bytes (little-endian); h *= m
//! h ^= h >> r; h *= m; h ^= h >> r
//! h ^= h >> 33; h *= 0xff51afd7ed558ccd
//! h ^= h >> 33; h *= 0xc4ceb9fe1a85ec53
//! h ^= h >> 33
//! ```
//!
//! All arithmetic wraps modulo 2^64. The extra finalizer gives full avalanche
//! on short keys, where the plain 64A tail path mixes only once.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

const M: u64 = 0xc6a4_a793_5bd1_e995;
const R: u32 = 47;

/// Seed of one of the filter's `k` hash functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashSeed(pub u64);

impl fmt::Display for HashSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#018x}", self.0)
    }
}

#[inline]
fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^ (h >> 33)
}

/// Hashes `key` under `seed`. Stable across platforms and releases.
#[inline]
pub fn hash64(key: &[u8], seed: HashSeed) -> u64 {
    let mut h = seed.0 ^ (key.len() as u64).wrapping_mul(M);

    let mut blocks = key.chunks_exact(8);
    for block in &mut blocks {
        let mut k = u64::from_le_bytes(block.try_into().expect("8-byte block"));
        k = k.wrapping_mul(M);
        k ^= k >> R;
        k = k.wrapping_mul(M);
        h ^= k;
        h = h.wrapping_mul(M);
    }

    let tail = blocks.remainder();
    if !tail.is_empty() {
        for (i, &b) in tail.iter().enumerate() {
            h ^= u64::from(b) << (8 * i);
        }
        h = h.wrapping_mul(M);
    }

    h ^= h >> R;
    h = h.wrapping_mul(M);
    h ^= h >> R;
    fmix64(h)
}

/// One step of splitmix64; advances `state` and returns the next output.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Expands a master seed into `k` hash seeds.
///
/// The seeds are the first `k` outputs of splitmix64 started at
/// `master`. splitmix64's output function is a bijection of its state and the
/// states are distinct, so the seeds are pairwise distinct. A filter with
/// `k` seeds and one with `k' > k` seeds share the first `k`.
pub fn expand_seeds(master: u64, k: usize) -> Vec<HashSeed> {
    let mut state = master;
    (0..k).map(|_| HashSeed(splitmix64(&mut state))).collect()
}

/// Position of one counter: row `i`, column `j`, counter slot `l` inside the cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CellIndex {
    pub i: u64,
    pub j: u64,
    pub l: u32,
}

/// Splits one hash value into a cell position by three independent moduli.
pub fn derive_indices(h: u64, x: u64, y: u64, eta: u32) -> Result<CellIndex> {
    if x == 0 || y == 0 || eta == 0 {
        return Err(Error::ZeroModulus {
            x,
            y,
            eta: u64::from(eta),
        });
    }
    Ok(derive_indices_unchecked(h, x, y, eta))
}

#[inline(always)]
pub(crate) fn derive_indices_unchecked(h: u64, x: u64, y: u64, eta: u32) -> CellIndex {
    CellIndex {
        i: h % x,
        j: h % y,
        l: (h % u64::from(eta)) as u32,
    }
}

/// One row of a golden-vector file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenVector {
    pub key: Vec<u8>,
    pub seed: HashSeed,
    pub hash: u64,
}

/// Writes golden vectors as `hex(key) <TAB> seed <TAB> hash` lines, with the
/// seed in decimal and the hash as 16 lowercase hex digits.
pub fn write_golden<W: Write>(mut out: W, vectors: &[GoldenVector]) -> Result<()> {
    for v in vectors {
        let key: String = v.key.iter().map(|b| format!("{b:02x}")).collect();
        writeln!(out, "{key}\t{}\t{:016x}", v.seed.0, v.hash)?;
    }
    Ok(())
}

/// Parses a golden-vector file. Blank lines and `#` comments are skipped.
pub fn read_golden<R: BufRead>(input: R) -> Result<Vec<GoldenVector>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: &str| Error::Parse {
            line: lineno,
            reason: reason.to_string(),
        };
        let mut fields = line.split('\t');
        let (Some(key), Some(seed), Some(hash), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad("expected three tab-separated fields"));
        };
        if key.len() % 2 != 0 {
            return Err(bad("odd-length hex key"));
        }
        let key = (0..key.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&key[i..i + 2], 16))
            .collect::<std::result::Result<Vec<u8>, _>>()
            .map_err(|_| bad("invalid hex key"))?;
        let seed = seed.parse::<u64>().map_err(|_| bad("invalid seed"))?;
        let hash = u64::from_str_radix(hash, 16).map_err(|_| bad("invalid hash"))?;
        rows.push(GoldenVector {
            key,
            seed: HashSeed(seed),
            hash,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_key_is_deterministic() {
        let s = HashSeed(7);
        assert_eq!(hash64(b"", s), hash64(b"", s));
    }

    #[test]
    fn seeds_change_output() {
        // Frozen from the C reference in tests/data/hash64_oracle.c.
        assert_eq!(hash64(b"abc", HashSeed(1)), 0x2affc9149763d913);
        assert_eq!(hash64(b"abc", HashSeed(42)), 0xccf2df0d0f6022bd);
    }

    #[test]
    fn avalanche_on_key_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa5a5);
        let trials = 10_000;
        let mut flips = [0u32; 64];
        for _ in 0..trials {
            let len = rng.random_range(1..=32);
            let mut key: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            let seed = HashSeed(rng.random());
            let before = hash64(&key, seed);
            let bit = rng.random_range(0..len * 8);
            key[bit / 8] ^= 1 << (bit % 8);
            let diff = before ^ hash64(&key, seed);
            for (b, f) in flips.iter_mut().enumerate() {
                *f += ((diff >> b) & 1) as u32;
            }
        }
        for (b, &f) in flips.iter().enumerate() {
            let p = f64::from(f) / trials as f64;
            assert!((0.45..=0.55).contains(&p), "output bit {b} flipped at rate {p}");
        }
    }

    #[test]
    fn avalanche_on_seed_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5a5a);
        let trials = 10_000;
        let mut flips = [0u32; 64];
        for _ in 0..trials {
            let len = rng.random_range(0..=24);
            let key: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            let seed: u64 = rng.random();
            let flipped = seed ^ (1u64 << rng.random_range(0..64));
            let diff = hash64(&key, HashSeed(seed)) ^ hash64(&key, HashSeed(flipped));
            for (b, f) in flips.iter_mut().enumerate() {
                *f += ((diff >> b) & 1) as u32;
            }
        }
        for (b, &f) in flips.iter().enumerate() {
            let p = f64::from(f) / trials as f64;
            assert!((0.45..=0.55).contains(&p), "output bit {b} flipped at rate {p}");
        }
    }

    #[test]
    fn derive_indices_examples() {
        assert_eq!(
            derive_indices(0, 101, 103, 8).unwrap(),
            CellIndex { i: 0, j: 0, l: 0 }
        );
        assert_eq!(
            derive_indices(105, 101, 103, 8).unwrap(),
            CellIndex { i: 4, j: 2, l: 1 }
        );
    }

    #[test]
    fn derive_indices_rejects_zero_moduli() {
        assert!(derive_indices(1, 0, 3, 1).is_err());
        assert!(derive_indices(1, 3, 0, 1).is_err());
        assert!(derive_indices(1, 3, 5, 0).is_err());
    }

    #[test]
    fn grid_coverage_is_a_bijection_for_coprime_dimensions() {
        let (x, y) = (5u64, 7u64);
        let mut seen = vec![false; (x * y) as usize];
        for h in 0..x * y {
            let c = derive_indices(h, x, y, 1).unwrap();
            let slot = (c.i * y + c.j) as usize;
            assert!(!seen[slot], "h={h} revisits ({}, {})", c.i, c.j);
            seen[slot] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn grid_distribution_is_flat() {
        let (x, y) = (31u64, 37u64);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut buckets = vec![0u32; (x * y) as usize];
        let draws = 1_000_000u32;
        for _ in 0..draws {
            let c = derive_indices(rng.random(), x, y, 8).unwrap();
            buckets[(c.i * y + c.j) as usize] += 1;
        }
        let mean = f64::from(draws) / buckets.len() as f64;
        let max = f64::from(*buckets.iter().max().unwrap());
        assert!(max / mean < 1.5, "max/mean = {}", max / mean);
    }

    #[test]
    fn expanded_seeds_are_distinct_and_prefix_stable() {
        let seeds = expand_seeds(42, 64);
        let mut sorted = seeds.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 64);
        assert_eq!(&expand_seeds(42, 5)[..], &seeds[..5]);
    }

    #[test]
    fn golden_format_roundtrip() {
        let rows = vec![
            GoldenVector {
                key: b"ab".to_vec(),
                seed: HashSeed(3),
                hash: hash64(b"ab", HashSeed(3)),
            },
            GoldenVector {
                key: Vec::new(),
                seed: HashSeed(u64::MAX),
                hash: 1,
            },
        ];
        let mut buf = Vec::new();
        write_golden(&mut buf, &rows).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("6162\t3\t"));
        assert_eq!(read_golden(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn golden_parser_reports_line() {
        let err = read_golden(&b"# header\n61\t1\n"[..]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
