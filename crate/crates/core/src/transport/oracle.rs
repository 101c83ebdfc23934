//! Grid oracle for `W_inf(mu_N, lambda_d)`.
//!
//! Lebesgue measure is replaced by `g^d` equal masses at the cell centres of
//! a uniform grid; each mass moves at most half a cell diagonal, so the
//! discrete bottleneck value is within `sqrt(d) / (2g)` of the true one. The
//! discrete problem is solved exactly: squared distances are integers over a
//! common denominator, and a binary search over the sorted distinct values
//! asks a max-flow whether every unit of mass can be routed within the
//! candidate radius.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use super::flow::FlowNetwork;
use crate::geometry::Rational;

/// Default limit on `N * g^d` point-cell pairs.
pub const DEFAULT_PAIR_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("no points")]
    NoPoints,
    #[error("grid resolution must be positive")]
    ZeroGrid,
    #[error("points have inconsistent dimensions")]
    DimensionMismatch,
    #[error("point {0} lies outside the unit cube")]
    OutsideCube(usize),
    #[error("{pairs} point-cell pairs exceed the budget of {budget}")]
    Budget { pairs: u128, budget: u64 },
    #[error("coordinates too fine for exact integer distances")]
    Precision,
}

/// The discrete bottleneck transport between points and grid centres.
#[derive(Clone, Debug)]
pub struct GridInstance {
    dim: usize,
    grid: usize,
    points: usize,
    cells: usize,
    /// Squared distances scaled by `scale^2`, row-major by point.
    dist: Vec<u128>,
    /// Sorted distinct values of `dist`.
    candidates: Vec<u128>,
    scale: BigInt,
}

/// Result of [`winfty_oracle_grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridOracle {
    /// Exact squared bottleneck distance of the discrete problem.
    pub value_sq: Rational,
    pub value: f64,
    /// Half the cell diagonal, `sqrt(d) / (2g)`.
    pub error: f64,
    pub grid: usize,
}

impl GridInstance {
    pub fn new(points: &[Vec<Rational>], grid: usize, budget: u64) -> Result<Self, OracleError> {
        let dim = points.first().ok_or(OracleError::NoPoints)?.len();
        if grid == 0 {
            return Err(OracleError::ZeroGrid);
        }
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(OracleError::DimensionMismatch);
        }
        let zero = Rational::zero();
        let one = Rational::one();
        if let Some(i) = points
            .iter()
            .position(|p| p.iter().any(|x| *x < zero || *x >= one))
        {
            return Err(OracleError::OutsideCube(i));
        }
        let cells = (grid as u128)
            .checked_pow(dim as u32)
            .ok_or(OracleError::Budget {
                pairs: u128::MAX,
                budget,
            })?;
        let pairs = cells * points.len() as u128;
        if pairs > budget as u128 {
            return Err(OracleError::Budget { pairs, budget });
        }
        let cells = cells as usize;

        let scale = points
            .iter()
            .flatten()
            .fold(BigInt::from(2 * grid), |acc, x| acc.lcm(x.denom()));
        let to_int = |x: &Rational| -> Result<i128, OracleError> {
            (x.numer() * (&scale / x.denom()))
                .to_i128()
                .ok_or(OracleError::Precision)
        };
        let scaled: Vec<Vec<i128>> = points
            .iter()
            .map(|p| p.iter().map(to_int).collect())
            .collect::<Result<_, _>>()?;
        let step = (&scale / BigInt::from(2 * grid))
            .to_i128()
            .ok_or(OracleError::Precision)?;
        // Centre of index i on an axis: (2i + 1) * step.
        let centres: Vec<i128> = (0..grid as i128).map(|i| (2 * i + 1) * step).collect();

        let dist = scaled
            .par_iter()
            .map(|p| {
                (0..cells)
                    .map(|c| {
                        let mut idx = c;
                        let mut sum = 0u128;
                        for &coord in p {
                            let diff = (coord - centres[idx % grid]).unsigned_abs();
                            idx /= grid;
                            sum = diff
                                .checked_mul(diff)
                                .and_then(|sq| sum.checked_add(sq))
                                .ok_or(OracleError::Precision)?;
                        }
                        Ok(sum)
                    })
                    .collect::<Result<Vec<u128>, OracleError>>()
            })
            .collect::<Result<Vec<_>, _>>()?
            .concat();
        let mut candidates = dist.clone();
        candidates.par_sort_unstable();
        candidates.dedup();
        Ok(GridInstance {
            dim,
            grid,
            points: points.len(),
            cells,
            dist,
            candidates,
            scale,
        })
    }

    /// Number of distinct candidate radii.
    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    /// Candidate `index` as an exact squared distance.
    pub fn candidate_sq(&self, index: usize) -> Rational {
        Rational::new(
            BigInt::from(self.candidates[index]),
            &self.scale * &self.scale,
        )
    }

    /// Whether all mass can be moved using only pairs within candidate `index`.
    pub fn feasible(&self, index: usize) -> bool {
        let threshold = self.candidates[index];
        let g = (self.points as u64).gcd(&(self.cells as u64));
        // Integer masses: each cell supplies N/g units, each point absorbs G/g.
        let supply = (self.points as u64 / g) as i64;
        let demand = (self.cells as u64 / g) as i64;
        let source = 0;
        let sink = 1 + self.cells + self.points;
        let mut net = FlowNetwork::new(sink + 1);
        for c in 0..self.cells {
            net.add_edge(source, 1 + c, supply);
        }
        for p in 0..self.points {
            net.add_edge(1 + self.cells + p, sink, demand);
            let row = &self.dist[p * self.cells..(p + 1) * self.cells];
            for (c, &d) in row.iter().enumerate() {
                if d <= threshold {
                    net.add_edge(1 + c, 1 + self.cells + p, supply);
                }
            }
        }
        net.max_flow(source, sink) == supply * self.cells as i64
    }

    /// Index of the smallest feasible candidate, by binary search.
    pub fn bottleneck_index(&self) -> usize {
        let (mut lo, mut hi) = (0, self.candidates.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.feasible(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    pub fn solve(&self) -> GridOracle {
        let value_sq = self.candidate_sq(self.bottleneck_index());
        GridOracle {
            value: value_sq.to_f64().unwrap_or(f64::NAN).sqrt(),
            value_sq,
            error: (self.dim as f64).sqrt() / (2.0 * self.grid as f64),
            grid: self.grid,
        }
    }
}

/// Bottleneck value and error band with the default pair budget.
pub fn winfty_oracle_grid(
    points: &[Vec<Rational>],
    grid: usize,
) -> Result<GridOracle, OracleError> {
    winfty_oracle_grid_with_budget(points, grid, DEFAULT_PAIR_BUDGET)
}

pub fn winfty_oracle_grid_with_budget(
    points: &[Vec<Rational>],
    grid: usize,
    budget: u64,
) -> Result<GridOracle, OracleError> {
    Ok(GridInstance::new(points, grid, budget)?.solve())
}
