//! Memory, hash-count and dimension planning.
//!
//! A countBF gets half the bit budget of a standard Bloom filter sized for the
//! same `(n, epsilon)`, laid out as an `x * y` grid of cells whose sides are
//! two distinct primes near `sqrt(m / (2 * beta))`. It also uses half as many
//! hash functions.

use std::f64::consts::LN_2;

use crate::cell::counters_per_cell;
use crate::error::{Error, Result};
use crate::hashing::{expand_seeds, HashSeed};

/// Offset, in prime-sequence positions, between the pivot prime and each side.
const PRIME_OFFSET: usize = 3;

fn check_target(n: u64, epsilon: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::ZeroItems);
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidFalsePositiveRate(epsilon));
    }
    Ok(())
}

/// Bits a standard Bloom filter needs for `n` items at false positive rate
/// `epsilon`: `ceil(-n ln(epsilon) / ln(2)^2)`.
pub fn sbf_bits(n: u64, epsilon: f64) -> Result<u64> {
    check_target(n, epsilon)?;
    Ok((-(n as f64) * epsilon.ln() / (LN_2 * LN_2)).ceil() as u64)
}

/// Optimal standard Bloom filter hash count `round((m / n) ln 2)`, at least 1.
pub fn optimal_k(m: u64, n: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::ZeroItems);
    }
    // f64::round rounds half away from zero, which is half-up for positives.
    let k = (m as f64 / n as f64 * LN_2).round() as u32;
    Ok(k.max(1))
}

/// Hash count used by countBF: half the optimal count, rounded half-up, at least 1.
pub fn countbf_k(m: u64, n: u64) -> Result<u32> {
    Ok(optimal_k(m, n)?.div_ceil(2).max(1))
}

/// Deterministic primality test (trial division for small values,
/// Miller-Rabin with a base set that is exact for all 64-bit inputs).
pub fn is_prime(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Ascending primes produced by a sieve of Eratosthenes, grown on demand.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    /// All primes `<= limit`.
    pub fn up_to(limit: u64) -> Self {
        let mut composite = vec![false; limit as usize + 1];
        let mut primes = Vec::new();
        for i in 2..=limit as usize {
            if composite[i] {
                continue;
            }
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit as usize {
                composite[j] = true;
                j += i;
            }
        }
        Self { limit, primes }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn grow(&mut self) {
        *self = Self::up_to((self.limit * 2).max(64));
    }

    /// 1-based position of the smallest prime `>= q`.
    pub fn index_at_least(&mut self, q: u64) -> usize {
        loop {
            let pos = self.primes.partition_point(|&p| p < q);
            if pos < self.primes.len() {
                return pos + 1;
            }
            self.grow();
        }
    }

    /// The prime at 1-based position `index`.
    pub fn nth(&mut self, index: usize) -> u64 {
        assert!(index >= 1, "prime positions are 1-based");
        while self.primes.len() < index {
            self.grow();
        }
        self.primes[index - 1]
    }
}

/// Grid shape derived from a bit budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dimensions {
    /// Cell budget `ceil(m / (2 beta))`.
    pub cells: u64,
    /// `ceil(sqrt(cells))`.
    pub q: u64,
    /// 1-based position of the smallest prime `>= q`.
    pub prime_index: usize,
    pub x: u64,
    pub y: u64,
}

fn ceil_sqrt(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r.saturating_mul(r) > v {
        r -= 1;
    }
    while r.saturating_mul(r) < v {
        r += 1;
    }
    r
}

fn cell_budget(m: u64, beta: u32) -> (u64, u64) {
    let cells = m.div_ceil(2 * u64::from(beta));
    (cells, ceil_sqrt(cells))
}

/// Picks `x = PN[i + 3]` and `y = PN[i - 3]` around the pivot prime `PN[i]`,
/// the smallest prime `>= ceil(sqrt(ceil(m / (2 beta))))`.
pub fn dimensions(m: u64, beta: u32) -> Result<Dimensions> {
    if beta == 0 {
        return Err(Error::InvalidCellWidth(beta));
    }
    let (cells, q) = cell_budget(m, beta);
    let mut table = PrimeTable::up_to(2 * q + 64);
    let i = table.index_at_least(q);
    if i <= PRIME_OFFSET {
        return Err(Error::DimensionsTooSmall { q, index: i });
    }
    Ok(Dimensions {
        cells,
        q,
        prime_index: i,
        x: table.nth(i + PRIME_OFFSET),
        y: table.nth(i - PRIME_OFFSET),
    })
}

/// Dimensions for budgets too small for [`dimensions`]: the two smallest
/// primes `>= q`, larger one first.
pub fn fallback_dimensions(m: u64, beta: u32) -> Result<Dimensions> {
    if beta == 0 {
        return Err(Error::InvalidCellWidth(beta));
    }
    let (cells, q) = cell_budget(m, beta);
    let mut table = PrimeTable::up_to(2 * q + 64);
    let i = table.index_at_least(q);
    Ok(Dimensions {
        cells,
        q,
        prime_index: i,
        x: table.nth(i + 1),
        y: table.nth(i),
    })
}

/// Complete configuration of one countBF.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterPlan {
    /// Expected item count the plan was sized for (0 for hand-built plans).
    pub n: u64,
    pub epsilon: f64,
    /// Standard Bloom filter bit budget for `(n, epsilon)`.
    pub m_bits: u64,
    pub k: u32,
    pub alpha: u32,
    pub beta: u32,
    pub eta: u32,
    pub x: u64,
    pub y: u64,
    pub seeds: Vec<HashSeed>,
}

impl FilterPlan {
    /// Sizes a filter for `n` items at target rate `epsilon`.
    pub fn new(n: u64, epsilon: f64, alpha: u32, beta: u32, master_seed: u64) -> Result<Self> {
        let eta = counters_per_cell(alpha, beta)?;
        let m_bits = sbf_bits(n, epsilon)?;
        let k = countbf_k(m_bits, n)?;
        let dims = match dimensions(m_bits, beta) {
            Err(Error::DimensionsTooSmall { .. }) => fallback_dimensions(m_bits, beta)?,
            other => other?,
        };
        Ok(Self {
            n,
            epsilon,
            m_bits,
            k,
            alpha,
            beta,
            eta,
            x: dims.x,
            y: dims.y,
            seeds: expand_seeds(master_seed, k as usize),
        })
    }

    /// A plan with explicit dimensions, validated.
    pub fn with_dimensions(
        x: u64,
        y: u64,
        alpha: u32,
        beta: u32,
        k: u32,
        master_seed: u64,
    ) -> Result<Self> {
        let plan = Self {
            n: 0,
            epsilon: f64::NAN,
            m_bits: 0,
            k,
            alpha,
            beta,
            eta: counters_per_cell(alpha, beta)?,
            x,
            y,
            seeds: expand_seeds(master_seed, k as usize),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let eta = counters_per_cell(self.alpha, self.beta)?;
        if eta != self.eta {
            return Err(Error::InvalidCounterWidth {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        let bad = |reason| Error::InvalidDimensions {
            x: self.x,
            y: self.y,
            reason,
        };
        if self.x == self.y {
            return Err(bad("sides must differ"));
        }
        if !is_prime(self.x) || !is_prime(self.y) {
            return Err(bad("sides must be prime"));
        }
        if self.x.checked_mul(self.y).and_then(|c| usize::try_from(c).ok()).is_none() {
            return Err(bad("grid too large"));
        }
        if self.k == 0 {
            return Err(Error::ZeroHashCount);
        }
        if self.seeds.len() != self.k as usize {
            return Err(Error::SeedCount {
                expected: self.k as usize,
                got: self.seeds.len(),
            });
        }
        let mut sorted = self.seeds.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSeed(w[0].0));
        }
        Ok(())
    }

    /// Number of cells `x * y`.
    pub fn cells(&self) -> u64 {
        self.x * self.y
    }

    /// Filter size in bits, `x * y * beta`.
    pub fn memory_bits(&self) -> u64 {
        self.cells() * u64::from(self.beta)
    }

    /// `memory_bits / n`, or NaN for plans without an item count.
    pub fn bits_per_item(&self) -> f64 {
        self.memory_bits() as f64 / self.n as f64
    }
}
