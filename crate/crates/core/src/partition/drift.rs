use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::PartitionError;
use crate::geometry::{rat, rat_int, Rational};
use crate::sequence::modulus;

/// `L = min { l >= 0 : b^l >= count }`.
pub fn choose_level(count: u64, dim: usize) -> usize {
    let mut level = 0;
    while modulus(dim, level) < count as u128 {
        level += 1;
    }
    level
}

/// `2^{-k}` as a rational.
pub(crate) fn inv_pow2(k: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// Per-level cut budgets `Delta_l`, their running sums `S_l`, and the minimal
/// parent side lengths `sigma_l = 2^{-l} - 2 S_l`.
///
/// Only defined when the construction recurses, i.e. `count > b^2` (`L >= 3`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DriftSchedule {
    dim: usize,
    count: u64,
    level: usize,
    deltas: Vec<Rational>,
    partial_sums: Vec<Rational>,
    min_sides: Vec<Rational>,
}

/// A violated schedule inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DriftViolation {
    /// `sigma_l < (3/4) 2^{-l}`.
    MinSide { level: usize },
    /// `Delta_l > sigma_l / 6`.
    BudgetTooLarge { level: usize },
    /// `S_{L-2} > 2^{d-1} / (2^{d-1} - 1) * 2^{-L}`, or that bound exceeds `2 * 2^{-L}`.
    FinalDrift,
    /// `d (S_{L-2} + 2^{-(L-2)})^2 >= 36 d 2^{-2L}`.
    StrictRadius,
}

impl DriftSchedule {
    pub fn new(count: u64, dim: usize) -> Result<Self, PartitionError> {
        let level = choose_level(count, dim);
        if level < 3 {
            return Err(PartitionError::NoSchedule { count, dim });
        }
        let n = rat_int(count);
        let base_exp = 2 * dim - 3;
        let deltas: Vec<Rational> = (0..level - 2)
            .map(|l| Rational::from_integer(BigInt::one() << (base_exp + l * (dim - 1))) / &n)
            .collect();
        let mut partial_sums = Vec::with_capacity(level - 1);
        partial_sums.push(Rational::zero());
        for delta in &deltas {
            let next = partial_sums.last().expect("seeded with S_0") + delta;
            partial_sums.push(next);
        }
        let min_sides = (0..level - 2)
            .map(|l| inv_pow2(l) - rat(2, 1) * &partial_sums[l])
            .collect();
        Ok(DriftSchedule {
            dim,
            count,
            level,
            deltas,
            partial_sums,
            min_sides,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `L`.
    pub fn level(&self) -> usize {
        self.level
    }

    /// `Delta_0 .. Delta_{L-3}`.
    pub fn deltas(&self) -> &[Rational] {
        &self.deltas
    }

    /// `S_0 .. S_{L-2}`.
    pub fn partial_sums(&self) -> &[Rational] {
        &self.partial_sums
    }

    /// `sigma_0 .. sigma_{L-3}`.
    pub fn min_sides(&self) -> &[Rational] {
        &self.min_sides
    }

    /// `S_{L-2}`, the endpoint drift of the terminal rectangles.
    pub fn final_drift(&self) -> &Rational {
        self.partial_sums.last().expect("L >= 3")
    }

    /// Every schedule inequality the construction relies on, checked exactly.
    pub fn violations(&self) -> Vec<DriftViolation> {
        let mut out = Vec::new();
        for l in 0..self.level - 2 {
            let sigma = &self.min_sides[l];
            if *sigma < rat(3, 4) * inv_pow2(l) {
                out.push(DriftViolation::MinSide { level: l });
            }
            if self.deltas[l] > sigma / rat(6, 1) {
                out.push(DriftViolation::BudgetTooLarge { level: l });
            }
        }
        let two_l = inv_pow2(self.level);
        let half_b = Rational::from_integer(BigInt::one() << (self.dim - 1));
        let geometric = &half_b / (&half_b - Rational::one()) * &two_l;
        if *self.final_drift() > geometric || geometric > rat(2, 1) * &two_l {
            out.push(DriftViolation::FinalDrift);
        }
        let reach = self.final_drift() + inv_pow2(self.level - 2);
        let d = rat_int(self.dim as u64);
        if &d * &reach * &reach >= rat(36, 1) * &d * &two_l * &two_l {
            out.push(DriftViolation::StrictRadius);
        }
        out
    }
}
