//! Exact verification of a [`TransportPartition`].
//!
//! Nothing here trusts the builder. Tree mode groups cells by the dyadic word
//! of their point (recomputed from the index) and certifies disjointness
//! bottom-up through bounding boxes; oblivious mode compares every pair of
//! cells after compressing endpoints to integer ranks.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::{choose_level, DriftSchedule, TransportPartition};
use crate::exact;
use crate::geometry::{rat, rat_int, sq_radius_within, Rational, Rect};
use crate::sequence::{modulus, DigitWord, DigitalSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Disjointness through the word hierarchy, `O(N log N)`.
    Tree,
    /// Pairwise disjointness ignoring any structure, `O(N^2)` worst case.
    Oblivious,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    /// Metadata, cell indexing and point coordinates.
    Structure,
    Volume,
    Disjoint,
    Coverage,
    Radius,
    Drift,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::Structure,
        CheckKind::Volume,
        CheckKind::Disjoint,
        CheckKind::Coverage,
        CheckKind::Radius,
        CheckKind::Drift,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Structure => "structure",
            CheckKind::Volume => "volume",
            CheckKind::Disjoint => "disjoint",
            CheckKind::Coverage => "coverage",
            CheckKind::Radius => "radius",
            CheckKind::Drift => "drift",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Cell(u64),
    Pair(u64, u64),
    Word {
        level: usize,
        residue: usize,
    },
    Words {
        level: usize,
        first: usize,
        second: usize,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Cell(n) => write!(f, "cell {n}"),
            Witness::Pair(a, b) => write!(f, "cells {a} and {b}"),
            Witness::Word { level, residue } => write!(f, "word r={residue} at level {level}"),
            Witness::Words {
                level,
                first,
                second,
            } => write!(f, "words r={first} and r={second} at level {level}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<Witness>,
}

impl CheckOutcome {
    fn pass(kind: CheckKind, detail: impl Into<String>) -> Self {
        CheckOutcome {
            kind,
            passed: true,
            detail: detail.into(),
            witness: None,
        }
    }

    fn fail(kind: CheckKind, detail: impl Into<String>, witness: Option<Witness>) -> Self {
        CheckOutcome {
            kind,
            passed: false,
            detail: detail.into(),
            witness,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.kind.name(), self.detail)?;
        if let Some(w) = &self.witness {
            write!(f, " (witness: {w})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub mode: VerifyMode,
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, kind: CheckKind) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.kind == kind)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.failures().next()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        Ok(())
    }
}

/// Runs every check. Failures are reported, never raised.
pub fn verify_partition(p: &TransportPartition, mode: VerifyMode) -> VerificationReport {
    let structure = structure_check(p);
    if !structure.passed {
        let mut checks = vec![structure];
        checks.extend(
            CheckKind::ALL[1..]
                .iter()
                .map(|&kind| CheckOutcome::fail(kind, "not run: structure check failed", None)),
        );
        return VerificationReport { mode, checks };
    }
    let disjoint = match mode {
        VerifyMode::Tree => tree_disjoint(p),
        VerifyMode::Oblivious => oblivious_disjoint(p),
    };
    let checks = vec![
        structure,
        volume_check(p),
        disjoint,
        coverage_check(p),
        radius_check(p, &rat(6, 1)),
        drift_check(p),
    ];
    VerificationReport { mode, checks }
}

fn structure_check(p: &TransportPartition) -> CheckOutcome {
    let kind = CheckKind::Structure;
    let seq = match DigitalSequence::new(p.dim) {
        Ok(seq) => seq,
        Err(e) => return CheckOutcome::fail(kind, e.to_string(), None),
    };
    if p.count == 0 || p.cells.len() as u64 != p.count {
        return CheckOutcome::fail(
            kind,
            format!("N = {} but {} cells", p.count, p.cells.len()),
            None,
        );
    }
    let level = choose_level(p.count, p.dim);
    if p.level != level {
        return CheckOutcome::fail(
            kind,
            format!("level {} but expected {level}", p.level),
            None,
        );
    }
    let base = seq.base() as u128;
    if p.fallback != (p.count as u128 <= base * base) {
        return CheckOutcome::fail(kind, "fallback flag disagrees with N <= b^2", None);
    }
    let bad = p.cells.par_iter().enumerate().position_first(|(i, cell)| {
        cell.n != i as u64 + 1
            || cell.rect.dim() != p.dim
            || seq
                .point(cell.n)
                .map_or(true, |x| x.to_rationals() != cell.point)
    });
    match bad {
        Some(i) => CheckOutcome::fail(
            kind,
            "cell index, dimension or point coordinates do not match the sequence",
            Some(Witness::Cell(i as u64 + 1)),
        ),
        None => CheckOutcome::pass(kind, format!("d={} N={} L={}", p.dim, p.count, p.level)),
    }
}

fn volume_check(p: &TransportPartition) -> CheckOutcome {
    let target = Rational::new(1.into(), p.count.into());
    match p
        .cells
        .par_iter()
        .position_first(|c| !c.rect.has_volume(&target))
    {
        Some(i) => CheckOutcome::fail(
            CheckKind::Volume,
            format!("volume {} != 1/{}", p.cells[i].rect.volume(), p.count),
            Some(Witness::Cell(p.cells[i].n)),
        ),
        None => CheckOutcome::pass(
            CheckKind::Volume,
            format!("every cell has volume 1/{}", p.count),
        ),
    }
}

fn coverage_check(p: &TransportPartition) -> CheckOutcome {
    let kind = CheckKind::Coverage;
    let unit = Rect::unit(p.dim);
    if let Some(i) = p
        .cells
        .par_iter()
        .position_first(|c| !unit.contains(&c.rect))
    {
        return CheckOutcome::fail(
            kind,
            "cell leaves the unit cube",
            Some(Witness::Cell(p.cells[i].n)),
        );
    }
    // When every cell has volume 1/N the sum is exact without adding.
    let target = Rational::new(1.into(), p.count.into());
    let total = if p.cells.par_iter().all(|c| c.rect.has_volume(&target)) {
        Rational::new(p.cells.len().into(), p.count.into())
    } else {
        p.cells.iter().fold(Rational::zero(), |acc, c| {
            exact::add(&acc, &c.rect.volume())
        })
    };
    if total.is_one() {
        CheckOutcome::pass(
            kind,
            "cells lie in the unit cube and their volumes sum to 1",
        )
    } else {
        CheckOutcome::fail(kind, format!("volumes sum to {total}"), None)
    }
}

/// Every cell lies in the ball of radius `constant * sqrt(d) * N^{-1/d}` around its point.
pub fn radius_check(p: &TransportPartition, constant: &Rational) -> CheckOutcome {
    // The bound is monotone in the squared distance, so only the farthest
    // cell needs the exact power comparison.
    let farthest = p
        .cells
        .par_iter()
        .map(|c| (c.rect.max_sq_dist(&c.point), c.n))
        .reduce_with(|a, b| match exact::cmp(&b.0, &a.0) {
            Ordering::Greater => b,
            Ordering::Equal if b.1 < a.1 => b,
            _ => a,
        });
    let Some((radius_sq, n)) = farthest else {
        return CheckOutcome::fail(CheckKind::Radius, "no cells", None);
    };
    match sq_radius_within(&radius_sq, constant, p.count, p.dim) {
        false => CheckOutcome::fail(
            CheckKind::Radius,
            format!("max squared distance {radius_sq} exceeds ({constant})^2 d N^(-2/d)"),
            Some(Witness::Cell(n)),
        ),
        true => CheckOutcome::pass(
            CheckKind::Radius,
            format!("every cell within {constant}*sqrt(d)*N^(-1/d) of its point"),
        ),
    }
}

/// Level at which cells are grouped by the word of their point.
fn group_level(p: &TransportPartition) -> usize {
    if p.fallback {
        0
    } else {
        p.level - 2
    }
}

/// Cell indices grouped by `(n - 1) mod b^level`.
fn groups(p: &TransportPartition, level: usize) -> Vec<Vec<usize>> {
    let stride = modulus(p.dim, level) as usize;
    let mut out = vec![Vec::new(); stride];
    for (i, cell) in p.cells.iter().enumerate() {
        out[((cell.n - 1) % stride as u64) as usize].push(i);
    }
    out
}

fn group_boxes(p: &TransportPartition, groups: &[Vec<usize>]) -> Vec<Option<Rect>> {
    groups
        .par_iter()
        .map(|g| Rect::bounding_box(g.iter().map(|&i| &p.cells[i].rect)))
        .collect()
}

/// Bounding boxes one level up: parent `r` gathers children `r + v * stride`.
fn parent_boxes(children: &[Option<Rect>], base: usize) -> Vec<Option<Rect>> {
    let stride = children.len() / base;
    (0..stride)
        .map(|r| Rect::bounding_box((0..base).filter_map(|v| children[r + v * stride].as_ref())))
        .collect()
}

fn tree_disjoint(p: &TransportPartition) -> CheckOutcome {
    let kind = CheckKind::Disjoint;
    let level = group_level(p);
    let groups = groups(p, level);
    let within = groups.par_iter().find_map_first(|g| {
        let mut order: Vec<usize> = g
            .iter()
            .copied()
            .filter(|&i| !p.cells[i].rect.is_empty())
            .collect();
        order.sort_by(|&a, &b| exact::cmp(&p.cells[a].rect.lo()[0], &p.cells[b].rect.lo()[0]));
        let sorted = order
            .windows(2)
            .all(|w| exact::le(&p.cells[w[0]].rect.hi()[0], &p.cells[w[1]].rect.lo()[0]));
        if sorted {
            return None;
        }
        // Not a first-axis stack; compare the word's cells pairwise.
        order.iter().enumerate().find_map(|(k, &a)| {
            order[k + 1..].iter().find_map(|&b| {
                let (ca, cb) = (&p.cells[a], &p.cells[b]);
                (!ca.rect.disjoint(&cb.rect))
                    .then_some(Witness::Pair(ca.n.min(cb.n), ca.n.max(cb.n)))
            })
        })
    });
    if let Some(w) = within {
        return CheckOutcome::fail(kind, "overlapping slabs within a word", Some(w));
    }
    let base = 1usize << p.dim;
    let mut boxes = group_boxes(p, &groups);
    for l in (1..=level).rev() {
        let stride = boxes.len() / base;
        let clash = (0..stride).into_par_iter().find_map_first(|r| {
            for v in 0..base {
                for w in v + 1..base {
                    if let (Some(a), Some(b)) = (&boxes[r + v * stride], &boxes[r + w * stride]) {
                        if !a.disjoint(b) {
                            return Some(Witness::Words {
                                level: l,
                                first: r + v * stride,
                                second: r + w * stride,
                            });
                        }
                    }
                }
            }
            None
        });
        if let Some(w) = clash {
            return CheckOutcome::fail(kind, "sibling word boxes overlap", Some(w));
        }
        boxes = parent_boxes(&boxes, base);
    }
    CheckOutcome::pass(kind, format!("tree mode, grouped at level {level}"))
}

fn oblivious_disjoint(p: &TransportPartition) -> CheckOutcome {
    let kind = CheckKind::Disjoint;
    let dim = p.dim;
    let ranks: Vec<Vec<Rational>> = (0..dim)
        .map(|j| {
            let mut v: Vec<Rational> = p
                .cells
                .iter()
                .flat_map(|c| [c.rect.lo()[j].clone(), c.rect.hi()[j].clone()])
                .collect();
            v.sort_unstable_by(exact::cmp);
            v.dedup_by(|a, b| exact::cmp(a, b) == Ordering::Equal);
            v
        })
        .collect();
    let rank = |j: usize, x: &Rational| {
        ranks[j]
            .binary_search_by(|y| exact::cmp(y, x))
            .expect("collected above") as u32
    };
    let cells: Vec<(Vec<u32>, Vec<u32>, u64)> = p
        .cells
        .iter()
        .filter(|c| !c.rect.is_empty())
        .map(|c| {
            (
                (0..dim).map(|j| rank(j, &c.rect.lo()[j])).collect(),
                (0..dim).map(|j| rank(j, &c.rect.hi()[j])).collect(),
                c.n,
            )
        })
        .collect();
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&i| (cells[i].0[0], cells[i].2));
    for (pos, &a) in order.iter().enumerate() {
        let (alo, ahi, an) = &cells[a];
        for &b in &order[pos + 1..] {
            let (blo, bhi, bn) = &cells[b];
            if blo[0] >= ahi[0] {
                break;
            }
            if (0..dim).all(|j| alo[j] < bhi[j] && blo[j] < ahi[j]) {
                return CheckOutcome::fail(
                    kind,
                    "cells overlap",
                    Some(Witness::Pair(*an.min(bn), *an.max(bn))),
                );
            }
        }
    }
    CheckOutcome::pass(kind, "oblivious pairwise comparison")
}

fn drift_check(p: &TransportPartition) -> CheckOutcome {
    let kind = CheckKind::Drift;
    if p.fallback {
        return CheckOutcome::pass(kind, "not applicable (N <= b^2)");
    }
    let schedule = match DriftSchedule::new(p.count, p.dim) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::fail(kind, e.to_string(), None),
    };
    let violations = schedule.violations();
    if !violations.is_empty() {
        return CheckOutcome::fail(
            kind,
            format!("schedule inequalities fail: {violations:?}"),
            None,
        );
    }
    let seq = DigitalSequence::new(p.dim).expect("checked by structure");
    let top = p.level - 2;
    let groups = groups(p, top);
    let mut boxes = group_boxes(p, &groups);
    let n = rat_int(p.count);
    let untiled = groups
        .par_iter()
        .zip(&boxes)
        .position_first(|(g, bbox)| match bbox {
            Some(b) => !b.has_volume(&(rat_int(g.len() as u64) / &n)),
            None => true,
        });
    if let Some(r) = untiled {
        return CheckOutcome::fail(
            kind,
            "cells of a word do not tile their bounding box",
            Some(Witness::Word {
                level: top,
                residue: r,
            }),
        );
    }
    let base = 1usize << p.dim;
    for l in (0..=top).rev() {
        let bound = &schedule.partial_sums()[l];
        let bad = boxes.par_iter().enumerate().position_first(|(r, bbox)| {
            let Some(rect) = bbox else { return true };
            let word = DigitWord::from_residue(p.dim, r as u128, l).expect("valid dimension");
            let cube = seq.cube_rect(&word).expect("same dimension");
            (0..p.dim).any(|j| {
                exact::lt(bound, &exact::sub(&rect.lo()[j], &cube.lo()[j]).abs())
                    || exact::lt(bound, &exact::sub(&rect.hi()[j], &cube.hi()[j]).abs())
            })
        });
        if let Some(r) = bad {
            return CheckOutcome::fail(
                kind,
                format!("endpoint drift exceeds S_{l} = {bound}"),
                Some(Witness::Word {
                    level: l,
                    residue: r,
                }),
            );
        }
        if l > 0 {
            boxes = parent_boxes(&boxes, base);
        }
    }
    CheckOutcome::pass(
        kind,
        format!(
            "endpoints within S_l of dyadic cubes for l = 0..={top}; S_(L-2) = {}",
            schedule.final_drift()
        ),
    )
}
