//! The dyadic digital sequence in `[0,1)^d`.
//!
//! Write `m = n - 1` in base `b = 2^d`. Bit `j` of the `k`-th digit of `m`
//! becomes binary digit `k + 1` of coordinate `j`. Equivalently the binary
//! expansion of `m` is de-interleaved into `d` streams, one per coordinate.
//!
//! Everything here is exact: coordinates are dyadic rationals and cube counts
//! are evaluated by residue arithmetic without enumerating points.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::geometry::{Rational, Rect};

/// Largest supported dimension (`b = 65536`).
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("dimension {0} is outside the supported range 2..={MAX_DIM}")]
    Dimension(usize),
    #[error("point indices start at 1")]
    ZeroIndex,
    #[error("a prefix must contain at least one point")]
    EmptyPrefix,
    #[error("digit {digit} is not below the base {base}")]
    Digit { digit: u32, base: u32 },
    #[error("word of dimension {word} used with a sequence of dimension {sequence}")]
    DimensionMismatch { word: usize, sequence: usize },
}

/// A dyadic rational `num / 2^exp` in `[0, 1)`, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: u64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };

    /// `num / 2^exp`; returns `None` unless the value lies in `[0, 1)`.
    pub fn new(num: u64, exp: u32) -> Option<Self> {
        if exp > 64 || (exp < 64 && num >> exp != 0) {
            return None;
        }
        let mut d = Dyadic { num, exp };
        if d.num == 0 {
            d.exp = 0;
        }
        while d.exp > 0 && d.num & 1 == 0 {
            d.num >>= 1;
            d.exp -= 1;
        }
        Some(d)
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    /// Base-2 logarithm of the (reduced) denominator.
    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn to_rational(&self) -> Rational {
        // Already in lowest terms.
        Rational::new_raw(BigInt::from(self.num), BigInt::one() << self.exp)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        let a = (self.num as u128) << (e - self.exp);
        let b = (other.num as u128) << (e - other.exp);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, 1u128 << self.exp)
    }
}

/// The `n`-th element of the sequence (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SequencePoint {
    pub n: u64,
    pub coords: Vec<Dyadic>,
}

impl SequencePoint {
    pub fn to_rationals(&self) -> Vec<Rational> {
        self.coords.iter().map(Dyadic::to_rational).collect()
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.coords.iter().map(Dyadic::to_f64).collect()
    }
}

/// A word `u = (u_0, ..., u_{l-1})` of base-`2^d` digits addressing the
/// level-`l` dyadic cube `C_u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitWord {
    dim: usize,
    digits: Vec<u32>,
}

impl DigitWord {
    pub fn new(dim: usize, digits: Vec<u32>) -> Result<Self, SequenceError> {
        check_dim(dim)?;
        let base = 1u32 << dim;
        if let Some(&digit) = digits.iter().find(|&&v| v >= base) {
            return Err(SequenceError::Digit { digit, base });
        }
        Ok(DigitWord { dim, digits })
    }

    /// The empty word, addressing the whole cube.
    pub fn root(dim: usize) -> Result<Self, SequenceError> {
        DigitWord::new(dim, Vec::new())
    }

    /// The word whose digits are the lowest `level` base-`2^d` digits of `residue`.
    pub fn from_residue(dim: usize, residue: u128, level: usize) -> Result<Self, SequenceError> {
        check_dim(dim)?;
        let mask = (1u128 << dim) - 1;
        let digits = (0..level)
            .map(|k| {
                let shift = k * dim;
                if shift >= 128 {
                    0
                } else {
                    ((residue >> shift) & mask) as u32
                }
            })
            .collect();
        Ok(DigitWord { dim, digits })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// `u * v`: this word extended by one digit.
    pub fn child(&self, digit: u32) -> Result<Self, SequenceError> {
        let mut digits = self.digits.clone();
        digits.push(digit);
        DigitWord::new(self.dim, digits)
    }

    /// `r_u = sum_k u_k b^k`, saturating at `u128::MAX`.
    pub fn residue(&self) -> u128 {
        let base = 1u128 << self.dim;
        let mut place = 1u128;
        let mut residue = 0u128;
        for &digit in &self.digits {
            residue = residue.saturating_add((digit as u128).saturating_mul(place));
            place = place.saturating_mul(base);
        }
        residue
    }

    /// `b^l`, saturating at `u128::MAX`.
    pub fn modulus(&self) -> u128 {
        modulus(self.dim, self.level())
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, digit) in self.digits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{digit}")?;
        }
        f.write_str(")")
    }
}

/// `b^level` with `b = 2^dim`, saturating at `u128::MAX`.
pub fn modulus(dim: usize, level: usize) -> u128 {
    let bits = dim.saturating_mul(level);
    if bits >= 128 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

/// `#{0 <= m < count : m = residue (mod modulus)}`.
pub fn count_in_residue_class(count: u64, residue: u128, modulus: u128) -> u64 {
    let last = match (count as u128).checked_sub(1) {
        Some(last) => last,
        None => return 0,
    };
    if residue > last {
        0
    } else {
        ((last - residue) / modulus + 1) as u64
    }
}

fn check_dim(dim: usize) -> Result<(), SequenceError> {
    if (2..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(SequenceError::Dimension(dim))
    }
}

/// The sequence for a fixed dimension `d >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DigitalSequence {
    dim: usize,
}

impl DigitalSequence {
    pub fn new(dim: usize) -> Result<Self, SequenceError> {
        check_dim(dim)?;
        Ok(DigitalSequence { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `b = 2^d`.
    pub fn base(&self) -> u32 {
        1 << self.dim
    }

    /// `x_n`. Uses exactly as many base-`b` digits as `n - 1` has.
    pub fn point(&self, n: u64) -> Result<SequencePoint, SequenceError> {
        if n == 0 {
            return Err(SequenceError::ZeroIndex);
        }
        let m = n - 1;
        let bits = 64 - m.leading_zeros() as usize;
        let ndigits = bits.div_ceil(self.dim);
        let coords = (0..self.dim)
            .map(|j| {
                let mut num = 0u64;
                for k in 0..ndigits {
                    let pos = k * self.dim + j;
                    if pos < 64 && (m >> pos) & 1 == 1 {
                        num |= 1 << (ndigits - 1 - k);
                    }
                }
                Dyadic::new(num, ndigits as u32).expect("de-interleaved bits stay below one")
            })
            .collect();
        Ok(SequencePoint { n, coords })
    }

    /// `x_1, ..., x_count`.
    pub fn prefix(&self, count: u64) -> Result<Vec<SequencePoint>, SequenceError> {
        if count == 0 {
            return Err(SequenceError::EmptyPrefix);
        }
        (1..=count).map(|n| self.point(n)).collect()
    }

    /// The first `level` base-`b` digits of `n - 1`; `x_n` lies in the cube
    /// this word addresses.
    pub fn word_of(&self, n: u64, level: usize) -> Result<DigitWord, SequenceError> {
        if n == 0 {
            return Err(SequenceError::ZeroIndex);
        }
        DigitWord::from_residue(self.dim, (n - 1) as u128, level)
    }

    /// `#{1 <= n <= count : x_n in C_u}` in closed form.
    pub fn count_in_cube(&self, count: u64, word: &DigitWord) -> Result<u64, SequenceError> {
        self.check_word(word)?;
        Ok(count_in_residue_class(
            count,
            word.residue(),
            word.modulus(),
        ))
    }

    /// The half-open cube `C_u` of side `2^{-l}`.
    pub fn cube_rect(&self, word: &DigitWord) -> Result<Rect, SequenceError> {
        self.check_word(word)?;
        let level = word.level();
        let den = BigInt::one() << level;
        let side = Rational::new(BigInt::one(), den.clone());
        let mut lo = Vec::with_capacity(self.dim);
        let mut hi = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let mut num = BigInt::zero();
            for (k, &digit) in word.digits.iter().enumerate() {
                if (digit >> j) & 1 == 1 {
                    num += BigInt::one() << (level - 1 - k);
                }
            }
            let a = Rational::new(num, den.clone());
            hi.push(&a + &side);
            lo.push(a);
        }
        Ok(Rect::new(lo, hi).expect("dyadic cubes have positive side"))
    }

    fn check_word(&self, word: &DigitWord) -> Result<(), SequenceError> {
        if word.dim != self.dim {
            return Err(SequenceError::DimensionMismatch {
                word: word.dim,
                sequence: self.dim,
            });
        }
        Ok(())
    }
}
