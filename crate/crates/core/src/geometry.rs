//! Exact half-open boxes over `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact;

pub type Rational = BigRational;

/// `num / den` as a `Rational`. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(value: u64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("a box needs at least one axis")]
    NoAxes,
    #[error("axis {axis} has lo > hi")]
    Inverted { axis: usize },
    #[error("axis {axis} has zero width")]
    EmptyAxis { axis: usize },
    #[error("axis {axis} is out of range for a {dim}-dimensional box")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("cut target {target} is not strictly between 0 and the box volume {volume}")]
    CutTarget {
        target: Box<Rational>,
        volume: Box<Rational>,
    },
    #[error("half-sum input has odd length {0}")]
    OddLength(usize),
    #[error("half-sum values are not of the form {{m, m+1}}")]
    NotTwoValued,
    #[error("subset has {got} indices, expected {expected}")]
    SubsetSize { got: usize, expected: usize },
    #[error("subset index {0} is out of range or repeated")]
    BadIndex(usize),
}

/// The half-open box `prod_j [lo_j, hi_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    lo: Vec<Rational>,
    hi: Vec<Rational>,
}

/// Result of slicing a box with the hyperplane `x_axis = position`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub left: Rect,
    pub right: Rect,
    pub position: Rational,
}

impl Rect {
    /// A box with positive width on every axis.
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self, GeometryError> {
        let rect = Rect::new_allow_empty(lo, hi)?;
        if let Some(axis) = (0..rect.dim()).find(|&j| rect.lo[j] == rect.hi[j]) {
            return Err(GeometryError::EmptyAxis { axis });
        }
        Ok(rect)
    }

    /// Like [`Rect::new`] but admits zero-width (degenerate) axes.
    pub fn new_allow_empty(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return Err(GeometryError::DimensionMismatch(lo.len(), hi.len()));
        }
        if lo.is_empty() {
            return Err(GeometryError::NoAxes);
        }
        if let Some(axis) = (0..lo.len()).find(|&j| lo[j] > hi[j]) {
            return Err(GeometryError::Inverted { axis });
        }
        Ok(Rect { lo, hi })
    }

    /// `[0,1)^dim`.
    pub fn unit(dim: usize) -> Self {
        Rect {
            lo: vec![Rational::zero(); dim],
            hi: vec![Rational::one(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[Rational] {
        &self.lo
    }

    pub fn hi(&self) -> &[Rational] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> Rational {
        exact::sub(&self.hi[axis], &self.lo[axis])
    }

    pub fn midpoint(&self, axis: usize) -> Rational {
        exact::div(&exact::add(&self.lo[axis], &self.hi[axis]), &rat(2, 1))
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| a == b)
    }

    pub fn volume(&self) -> Rational {
        let (num, den) = self.volume_raw();
        exact::reduce(num, den)
    }

    /// Whether the volume equals `value`, decided without reducing.
    pub fn has_volume(&self, value: &Rational) -> bool {
        let (num, den) = self.volume_raw();
        num * value.denom() == den * value.numer()
    }

    /// Volume as an unreduced fraction with positive denominator.
    fn volume_raw(&self) -> (BigInt, BigInt) {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (lo, hi) in self.lo.iter().zip(&self.hi) {
            num *= hi.numer() * lo.denom() - lo.numer() * hi.denom();
            den *= hi.denom() * lo.denom();
        }
        (num, den)
    }

    /// Area of the cross-section orthogonal to `axis`.
    pub fn cross_section(&self, axis: usize) -> Rational {
        (0..self.dim())
            .filter(|&j| j != axis)
            .fold(Rational::one(), |acc, j| exact::mul(&acc, &self.side(j)))
    }

    /// Splits along `axis` so that the lower part has volume exactly `target`.
    ///
    /// The cut sits at `lo + target / A` where `A` is the cross-section, so
    /// `|position - midpoint| * A = |target - volume / 2|` holds identically.
    pub fn cut(&self, axis: usize, target: &Rational) -> Result<Cut, GeometryError> {
        if axis >= self.dim() {
            return Err(GeometryError::AxisOutOfRange {
                axis,
                dim: self.dim(),
            });
        }
        let volume = self.volume();
        if !target.is_positive() || *target >= volume {
            return Err(GeometryError::CutTarget {
                target: Box::new(target.clone()),
                volume: Box::new(volume),
            });
        }
        let position = exact::add(
            &self.lo[axis],
            &exact::div(target, &self.cross_section(axis)),
        );
        let mut left = self.clone();
        let mut right = self.clone();
        left.hi[axis] = position.clone();
        right.lo[axis] = position.clone();
        Ok(Cut {
            left,
            right,
            position,
        })
    }

    /// Whether the half-open boxes share no point.
    pub fn disjoint(&self, other: &Rect) -> bool {
        debug_assert_eq!(self.dim(), other.dim());
        self.is_empty()
            || other.is_empty()
            || (0..self.dim()).any(|j| {
                exact::le(&self.hi[j], &other.lo[j]) || exact::le(&other.hi[j], &self.lo[j])
            })
    }

    /// Whether `other` is a subset of `self`.
    pub fn contains(&self, other: &Rect) -> bool {
        other.is_empty()
            || (0..self.dim()).all(|j| {
                exact::le(&self.lo[j], &other.lo[j]) && exact::le(&other.hi[j], &self.hi[j])
            })
    }

    pub fn contains_point(&self, x: &[Rational]) -> bool {
        x.len() == self.dim()
            && (0..self.dim())
                .all(|j| exact::le(&self.lo[j], &x[j]) && exact::lt(&x[j], &self.hi[j]))
    }

    /// `max |y - x|^2` over the closure of the box, attained at a corner.
    pub fn max_sq_dist(&self, x: &[Rational]) -> Rational {
        debug_assert_eq!(x.len(), self.dim());
        (0..self.dim()).fold(Rational::zero(), |acc, j| {
            let a = exact::sub(&x[j], &self.lo[j]).abs();
            let b = exact::sub(&self.hi[j], &x[j]).abs();
            let far = if exact::lt(&b, &a) { a } else { b };
            exact::add(&acc, &exact::mul(&far, &far))
        })
    }

    /// Smallest box containing all of `rects`.
    pub fn bounding_box<'a, I>(rects: I) -> Option<Rect>
    where
        I: IntoIterator<Item = &'a Rect>,
    {
        let mut iter = rects.into_iter();
        let mut bbox = iter.next()?.clone();
        for r in iter {
            for j in 0..bbox.dim() {
                if exact::lt(&r.lo[j], &bbox.lo[j]) {
                    bbox.lo[j] = r.lo[j].clone();
                }
                if exact::lt(&bbox.hi[j], &r.hi[j]) {
                    bbox.hi[j] = r.hi[j].clone();
                }
            }
        }
        Some(bbox)
    }
}

/// Decides `squared_radius <= c^2 * d * count^{-2/d}` exactly, via
/// `count^2 * squared_radius^d <= (c^2 * d)^d`.
pub fn sq_radius_within(
    squared_radius: &Rational,
    constant: &Rational,
    count: u64,
    dim: usize,
) -> bool {
    // Cross-multiplied, so no reductions: with r = p/q and c = a/e,
    // N^2 p^d e^{2d} <= (a^2 d)^d q^d.
    let (p, q) = (squared_radius.numer(), squared_radius.denom());
    let (a, e) = (constant.numer(), constant.denom());
    let n = BigInt::from(count);
    let lhs = &n * &n * num_traits::pow(p.clone(), dim) * num_traits::pow(e * e, dim);
    let rhs = num_traits::pow(a * a * BigInt::from(dim), dim) * num_traits::pow(q.clone(), dim);
    lhs <= rhs
}

/// Whether `rect` lies in the closed ball of radius `c * sqrt(d) * count^{-1/d}`
/// around `x`.
pub fn within_radius(
    rect: &Rect,
    x: &[Rational],
    constant: &Rational,
    count: u64,
    dim: usize,
) -> bool {
    sq_radius_within(&rect.max_sq_dist(x), constant, count, dim)
}

/// `|sum_{i in subset} c_i - (1/2) sum_i c_i|` for a `{m, m+1}`-valued list.
pub fn half_sum_deviation(counts: &[i64], subset: &[usize]) -> Result<Rational, GeometryError> {
    if !counts.len().is_multiple_of(2) {
        return Err(GeometryError::OddLength(counts.len()));
    }
    if let (Some(min), Some(max)) = (counts.iter().min(), counts.iter().max()) {
        if max - min > 1 {
            return Err(GeometryError::NotTwoValued);
        }
    }
    let expected = counts.len() / 2;
    if subset.len() != expected {
        return Err(GeometryError::SubsetSize {
            got: subset.len(),
            expected,
        });
    }
    let mut seen = vec![false; counts.len()];
    let mut partial = 0i128;
    for &i in subset {
        if i >= counts.len() || seen[i] {
            return Err(GeometryError::BadIndex(i));
        }
        seen[i] = true;
        partial += counts[i] as i128;
    }
    let total: i128 = counts.iter().map(|&c| c as i128).sum();
    let twice = (2 * partial - total).abs();
    Ok(Rational::new(BigInt::from(twice), BigInt::from(2)))
}
