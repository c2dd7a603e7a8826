use std::fmt;

use crate::error::{Error, Result};

/// A binary treatment vector `z` in `{0,1}^n`.
///
/// Indices are zero-based throughout the library; text formats use
/// one-based unit labels and convert at the boundary.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AssignmentVector {
    bits: Vec<u8>,
}

impl AssignmentVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("assignment must cover at least one unit"));
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::invalid(format!(
                "assignment entry {} is {}, expected 0 or 1",
                pos, bits[pos]
            )));
        }
        Ok(AssignmentVector { bits })
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        Self::new(bits.iter().map(|&b| b as u8).collect())
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "assignment must cover at least one unit");
        AssignmentVector { bits: vec![0; n] }
    }

    /// Low `n` bits of `mask`, bit `i` giving unit `i`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        assert!(n > 0 && n <= 64);
        AssignmentVector {
            bits: (0..n).map(|i| ((mask >> i) & 1) as u8).collect(),
        }
    }

    pub(crate) fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        debug_assert!(!bits.is_empty() && bits.iter().all(|&b| b <= 1));
        AssignmentVector { bits }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn is_treated(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.bits[i] as f64
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn treated_count(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn set(&mut self, i: usize, treated: bool) {
        self.bits[i] = treated as u8;
    }

    /// Copy with coordinate `i` forced to `treated`.
    pub fn with(&self, i: usize, treated: bool) -> Self {
        let mut out = self.clone();
        out.set(i, treated);
        out
    }

    pub fn toggled(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.bits[i] ^= 1;
        out
    }

    /// Number of coordinates where the two vectors differ.
    pub fn hamming(&self, other: &Self) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// `L_r` distance; on the hypercube this is `hamming^(1/r)`, and the
    /// maximum coordinate difference for `r = ∞`.
    pub fn lr_distance(&self, other: &Self, r: f64) -> f64 {
        let h = self.hamming(other) as f64;
        if r.is_infinite() {
            if h > 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            h.powf(1.0 / r)
        }
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for AssignmentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z(")?;
        for b in &self.bits {
            write!(f, "{}", b)?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for AssignmentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}
