//! Equal-mass transport partitions for prefixes of the digital sequence.
//!
//! For `N <= b^2` the cube is cut into `N` slabs along the first axis. Otherwise
//! the unit cube is refined level by level: each rectangle `R_u` is split into
//! `b` children by `d` successive single-axis cuts whose lower volumes are the
//! exact child point counts over `N`. At level `L - 2` every rectangle is
//! sliced along the first axis into cells of volume `1/N`, and the cells are
//! matched to the points of the corresponding dyadic cube.

mod drift;
pub mod format;
mod verify;

use num_traits::Signed;
use rayon::prelude::*;
use thiserror::Error;

use crate::exact;
use crate::geometry::{rat_int, GeometryError, Rational, Rect};
use crate::sequence::{count_in_residue_class, modulus, DigitalSequence, SequenceError};

pub use drift::{choose_level, DriftSchedule, DriftViolation};
pub use verify::{
    radius_check, verify_partition, CheckKind, CheckOutcome, VerificationReport, VerifyMode,
    Witness,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("N = {count} <= b^2 for d = {dim}; the recursive construction needs N > b^2")]
    NoSchedule { count: u64, dim: usize },
    #[error("expected {expected} child counts, got {got}")]
    ChildCountLength { expected: usize, got: usize },
    #[error("child {digit} has zero points")]
    ZeroChildCount { digit: usize },
    #[error("rectangle volume {volume} does not equal {mass}/{count}")]
    VolumeMismatch {
        volume: Box<Rational>,
        mass: u64,
        count: u64,
    },
    #[error("word {word}: {slabs} slabs but {points} points")]
    CountMismatch {
        word: usize,
        slabs: usize,
        points: usize,
    },
}

/// One cut performed while splitting a rectangle into its children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutRecord {
    /// Level `l` of the parent word.
    pub level: usize,
    /// Residue `r_u` of the parent word.
    pub parent: usize,
    /// Coordinate being cut (0-based).
    pub axis: usize,
    /// Bits already fixed on the preceding axes.
    pub prefix: usize,
    pub position: Rational,
    /// Midpoint of the interval being cut.
    pub midpoint: Rational,
}

impl CutRecord {
    pub fn displacement(&self) -> Rational {
        (&self.position - &self.midpoint).abs()
    }
}

/// The `b` children of a rectangle together with the cuts that produced them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub children: Vec<Rect>,
    pub cuts: Vec<CutRecord>,
}

/// Splits `parent` into `b = 2^d` children with volumes `counts[v] / count`.
///
/// Axis `k` is cut once per bit prefix on the preceding axes; child `v` takes
/// the side selected by bit `k` of `v`. `parent` must have volume
/// `sum(counts) / count` and every child count must be positive.
pub fn split_children(parent: &Rect, counts: &[u64], count: u64) -> Result<Split, PartitionError> {
    let dim = parent.dim();
    let base = 1usize << dim;
    if counts.len() != base {
        return Err(PartitionError::ChildCountLength {
            expected: base,
            got: counts.len(),
        });
    }
    if let Some(digit) = counts.iter().position(|&c| c == 0) {
        return Err(PartitionError::ZeroChildCount { digit });
    }
    let mass: u64 = counts.iter().sum();
    check_volume(parent, mass, count)?;

    let mut nodes = vec![parent.clone()];
    let mut cuts = Vec::with_capacity(base - 1);
    for axis in 0..dim {
        let mask = (1usize << axis) - 1;
        let mut next = vec![None; nodes.len() * 2];
        for (prefix, rect) in nodes.into_iter().enumerate() {
            let lower: u64 = (0..base)
                .filter(|&v| v & mask == prefix && (v >> axis) & 1 == 0)
                .map(|v| counts[v])
                .sum();
            let cut = rect.cut(axis, &Rational::new(lower.into(), count.into()))?;
            cuts.push(CutRecord {
                level: 0,
                parent: 0,
                axis,
                prefix,
                midpoint: rect.midpoint(axis),
                position: cut.position,
            });
            next[prefix] = Some(cut.left);
            next[prefix | (1 << axis)] = Some(cut.right);
        }
        nodes = next
            .into_iter()
            .map(|r| r.expect("every prefix is cut"))
            .collect();
    }
    Ok(Split {
        children: nodes,
        cuts,
    })
}

fn check_volume(rect: &Rect, mass: u64, count: u64) -> Result<(), PartitionError> {
    if !rect.has_volume(&Rational::new(mass.into(), count.into())) {
        return Err(PartitionError::VolumeMismatch {
            volume: Box::new(rect.volume()),
            mass,
            count,
        });
    }
    Ok(())
}

/// Rectangles `R_u` for every level `0..=L-2`, indexed by the residue `r_u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectHierarchy {
    pub dim: usize,
    pub count: u64,
    pub levels: Vec<Vec<Rect>>,
    pub cuts: Vec<CutRecord>,
}

impl RectHierarchy {
    pub fn terminal(&self) -> &[Rect] {
        self.levels.last().expect("level 0 always present")
    }
}

/// Point counts `M(u)` for every word of length `level`, indexed by residue.
pub fn level_counts(count: u64, dim: usize, level: usize) -> Vec<u64> {
    let m = modulus(dim, level);
    (0..m as usize)
        .map(|r| count_in_residue_class(count, r as u128, m))
        .collect()
}

/// The level-`(L-2)` rectangle family, built top-down from the unit cube.
pub fn rectangle_partition(count: u64, dim: usize) -> Result<RectHierarchy, PartitionError> {
    DigitalSequence::new(dim)?;
    let level = choose_level(count, dim);
    if level < 3 {
        return Err(PartitionError::NoSchedule { count, dim });
    }
    let base = 1usize << dim;
    let mut levels = vec![vec![Rect::unit(dim)]];
    let mut cuts = Vec::new();
    for l in 0..level - 2 {
        let child_counts = level_counts(count, dim, l + 1);
        let parents = levels.last().expect("seeded");
        let stride = parents.len();
        let splits: Vec<Split> = parents
            .par_iter()
            .enumerate()
            .map(|(r, rect)| {
                let counts: Vec<u64> = (0..base).map(|v| child_counts[r + v * stride]).collect();
                split_children(rect, &counts, count)
            })
            .collect::<Result<_, _>>()?;
        let mut next = vec![None; stride * base];
        for (r, split) in splits.into_iter().enumerate() {
            for (v, child) in split.children.into_iter().enumerate() {
                next[r + v * stride] = Some(child);
            }
            cuts.extend(split.cuts.into_iter().map(|mut c| {
                c.level = l;
                c.parent = r;
                c
            }));
        }
        levels.push(
            next.into_iter()
                .map(|r| r.expect("every child placed"))
                .collect(),
        );
    }
    Ok(RectHierarchy {
        dim,
        count,
        levels,
        cuts,
    })
}

/// Slices `rect` (volume `mass / count`) along the first axis into `mass`
/// cells of volume `1 / count`, in increasing order.
pub fn terminal_slabs(rect: &Rect, mass: u64, count: u64) -> Result<Vec<Rect>, PartitionError> {
    if mass == 0 {
        return Err(PartitionError::VolumeMismatch {
            volume: Box::new(rect.volume()),
            mass,
            count,
        });
    }
    check_volume(rect, mass, count)?;
    let width = exact::div(
        &Rational::new(1.into(), count.into()),
        &rect.cross_section(0),
    );
    let mut slabs = Vec::with_capacity(mass as usize);
    let mut lo = rect.lo()[0].clone();
    for r in 1..=mass {
        let hi = if r == mass {
            rect.hi()[0].clone()
        } else {
            exact::add(&rect.lo()[0], &exact::mul(&width, &rat_int(r)))
        };
        let mut slab_lo = rect.lo().to_vec();
        let mut slab_hi = rect.hi().to_vec();
        slab_lo[0] = lo;
        slab_hi[0] = hi.clone();
        slabs.push(Rect::new(slab_lo, slab_hi)?);
        lo = hi;
    }
    Ok(slabs)
}

/// Matches points to slabs word by word: indices ascending against slabs in
/// increasing first-coordinate order. Returns `(n, slab)` sorted by `n`.
pub fn assign_points(
    slabs_by_word: Vec<Vec<Rect>>,
    points_by_word: Vec<Vec<u64>>,
) -> Result<Vec<(u64, Rect)>, PartitionError> {
    let mut pairs = Vec::new();
    for (word, (mut slabs, mut points)) in slabs_by_word.into_iter().zip(points_by_word).enumerate()
    {
        if slabs.len() != points.len() {
            return Err(PartitionError::CountMismatch {
                word,
                slabs: slabs.len(),
                points: points.len(),
            });
        }
        points.sort_unstable();
        slabs.sort_by(|a, b| exact::cmp(&a.lo()[0], &b.lo()[0]));
        pairs.extend(points.into_iter().zip(slabs));
    }
    pairs.sort_by_key(|(n, _)| *n);
    Ok(pairs)
}

/// A cell `A_n` attached to the point `x_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub n: u64,
    pub point: Vec<Rational>,
    pub rect: Rect,
}

/// `N` cells, `cells[i]` belonging to `x_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportPartition {
    pub dim: usize,
    pub count: u64,
    pub level: usize,
    pub fallback: bool,
    pub cells: Vec<Cell>,
}

/// A partition together with the intermediate objects of its construction.
#[derive(Clone, Debug)]
pub struct Construction {
    pub partition: TransportPartition,
    /// `None` on the fallback path.
    pub schedule: Option<DriftSchedule>,
    /// `None` on the fallback path.
    pub hierarchy: Option<RectHierarchy>,
}

impl Construction {
    pub fn run(count: u64, dim: usize) -> Result<Self, PartitionError> {
        let seq = DigitalSequence::new(dim)?;
        if count == 0 {
            return Err(SequenceError::EmptyPrefix.into());
        }
        let level = choose_level(count, dim);
        let base = seq.base() as u128;
        let fallback = count as u128 <= base * base;
        let (pairs, schedule, hierarchy) = if fallback {
            let slabs = terminal_slabs(&Rect::unit(dim), count, count)?;
            let pairs = (1..=count).zip(slabs).collect();
            (pairs, None, None)
        } else {
            let schedule = DriftSchedule::new(count, dim)?;
            let hierarchy = rectangle_partition(count, dim)?;
            let terminal_level = level - 2;
            let masses = level_counts(count, dim, terminal_level);
            let stride = masses.len() as u64;
            let slabs_by_word = hierarchy
                .terminal()
                .par_iter()
                .zip(&masses)
                .map(|(rect, &mass)| terminal_slabs(rect, mass, count))
                .collect::<Result<Vec<_>, _>>()?;
            let points_by_word = (0..stride)
                .map(|r| (r + 1..=count).step_by(stride as usize).collect())
                .collect();
            let pairs = assign_points(slabs_by_word, points_by_word)?;
            (pairs, Some(schedule), Some(hierarchy))
        };
        let cells = pairs
            .into_par_iter()
            .map(|(n, rect)| {
                Ok(Cell {
                    n,
                    point: seq.point(n)?.to_rationals(),
                    rect,
                })
            })
            .collect::<Result<Vec<_>, SequenceError>>()?;
        Ok(Construction {
            partition: TransportPartition {
                dim,
                count,
                level,
                fallback,
                cells,
            },
            schedule,
            hierarchy,
        })
    }
}

/// The transport partition for the first `count` points in dimension `dim`.
pub fn build_partition(count: u64, dim: usize) -> Result<TransportPartition, PartitionError> {
    Ok(Construction::run(count, dim)?.partition)
}
