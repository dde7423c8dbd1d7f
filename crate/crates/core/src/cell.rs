//! Bit algebra for one cell: `eta = beta / alpha` counters of `alpha` bits
//! packed from the least significant end of a `beta`-bit word. The top
//! `beta % alpha` bits are never used and stay zero.
//!
//! Cells are passed around as `u64` regardless of `beta`; for 32-bit cells
//! the upper half is always zero.

use crate::error::{Error, Result};

fn check_widths(alpha: u32, beta: u32) -> Result<()> {
    if beta != 32 && beta != 64 {
        return Err(Error::InvalidCellWidth(beta));
    }
    if alpha == 0 || alpha > beta {
        return Err(Error::InvalidCounterWidth { alpha, beta });
    }
    Ok(())
}

/// Number of `alpha`-bit counters that fit in a `beta`-bit cell.
pub fn counters_per_cell(alpha: u32, beta: u32) -> Result<u32> {
    check_widths(alpha, beta)?;
    Ok(beta / alpha)
}

/// Unused bits at the top of each cell.
pub fn wastage(alpha: u32, beta: u32) -> Result<u32> {
    check_widths(alpha, beta)?;
    Ok(beta % alpha)
}

/// Extract and reset masks for every counter slot of a cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskTable {
    alpha: u32,
    beta: u32,
    eta: u32,
    max: u64,
    extract: Vec<u64>,
    reset: Vec<u64>,
}

impl MaskTable {
    pub fn new(alpha: u32, beta: u32) -> Result<Self> {
        check_widths(alpha, beta)?;
        let eta = beta / alpha;
        let max = u64::MAX >> (64 - alpha);
        let word = u64::MAX >> (64 - beta);
        let extract: Vec<u64> = (0..eta).map(|l| max << (alpha * l)).collect();
        let reset = extract.iter().map(|e| !e & word).collect();
        Ok(Self {
            alpha,
            beta,
            eta,
            max,
            extract,
            reset,
        })
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    pub fn eta(&self) -> u32 {
        self.eta
    }

    /// Saturation value `2^alpha - 1`.
    pub fn max(&self) -> u64 {
        self.max
    }

    pub fn extract(&self) -> &[u64] {
        &self.extract
    }

    pub fn reset(&self) -> &[u64] {
        &self.reset
    }

    fn check_index(&self, l: u32) -> Result<()> {
        if l < self.eta {
            Ok(())
        } else {
            Err(Error::CounterIndexOutOfRange {
                index: l,
                eta: self.eta,
            })
        }
    }

    #[inline(always)]
    pub(crate) fn get(&self, cell: u64, l: u32) -> u64 {
        (cell & self.extract[l as usize]) >> (self.alpha * l)
    }

    #[inline(always)]
    pub(crate) fn put(&self, cell: u64, l: u32, value: u64) -> u64 {
        (cell & self.reset[l as usize]) | (value << (self.alpha * l))
    }

    /// Returns `(new_cell, overflowed)`. A counter already at `max` stays put.
    #[inline(always)]
    pub(crate) fn incr(&self, cell: u64, l: u32) -> (u64, bool) {
        let c = self.get(cell, l);
        if c == self.max {
            (cell, true)
        } else {
            (self.put(cell, l, c + 1), false)
        }
    }

    /// Returns `(new_cell, underflowed)`. Zero and saturated counters stay put.
    #[inline(always)]
    pub(crate) fn decr(&self, cell: u64, l: u32) -> (u64, bool) {
        let c = self.get(cell, l);
        if c == 0 {
            (cell, true)
        } else if c == self.max {
            (cell, false)
        } else {
            (self.put(cell, l, c - 1), false)
        }
    }

    /// Reads counter `l` of `cell`.
    pub fn read_counter(&self, cell: u64, l: u32) -> Result<u64> {
        self.check_index(l)?;
        Ok(self.get(cell, l))
    }

    /// Replaces counter `l` with `value`, leaving every other bit of `cell` intact.
    pub fn write_counter(&self, cell: u64, l: u32, value: u64) -> Result<u64> {
        self.check_index(l)?;
        if value > self.max {
            return Err(Error::CounterValueTooLarge {
                value,
                max: self.max,
            });
        }
        Ok(self.put(cell, l, value))
    }

    /// Adds one to counter `l` unless it is saturated. Saturation is sticky:
    /// the flag is set and the cell is returned unchanged.
    pub fn saturating_increment(&self, cell: u64, l: u32) -> Result<(u64, bool)> {
        self.check_index(l)?;
        Ok(self.incr(cell, l))
    }

    /// Subtracts one from counter `l`. A zero counter is left alone and
    /// flagged as an underflow; a saturated counter is left alone silently,
    /// since its true count is unknown.
    pub fn guarded_decrement(&self, cell: u64, l: u32) -> Result<(u64, bool)> {
        self.check_index(l)?;
        Ok(self.decr(cell, l))
    }
}
