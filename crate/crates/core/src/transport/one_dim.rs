//! Exact one-dimensional transport on `[0, 1]` and the van der Corput scan.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::geometry::{rat_int, Rational};
use crate::sequence::Dyadic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OneDimError {
    #[error("no points")]
    NoPoints,
    #[error("point {0} lies outside [0, 1)")]
    OutOfRange(Rational),
    #[error("scan length {0} is outside 1..=2^24")]
    ScanLength(u64),
}

/// `x_n` of the base-2 van der Corput sequence: the bit reversal of `n - 1`.
pub fn van_der_corput(n: u64) -> Dyadic {
    assert!(n >= 1, "indices start at 1");
    let m = n - 1;
    let bits = 64 - m.leading_zeros();
    if bits == 0 {
        return Dyadic::ZERO;
    }
    let reversed = m.reverse_bits() >> (64 - bits);
    Dyadic::new(reversed, bits).expect("reversed bits stay below one")
}

fn sorted_checked(points: &[Rational]) -> Result<Vec<Rational>, OneDimError> {
    if points.is_empty() {
        return Err(OneDimError::NoPoints);
    }
    let one = Rational::one();
    if let Some(x) = points.iter().find(|x| x.is_negative() || **x >= one) {
        return Err(OneDimError::OutOfRange(x.clone()));
    }
    let mut sorted = points.to_vec();
    sorted.sort();
    Ok(sorted)
}

/// `int_a^b |c - x| dx`.
fn abs_integral(c: &Rational, a: &Rational, b: &Rational) -> Rational {
    let two = rat_int(2);
    let ua = c - a;
    let ub = c - b;
    if !ub.is_negative() {
        (&ua * &ua - &ub * &ub) / two
    } else if !ua.is_positive() {
        (&ub * &ub - &ua * &ua) / two
    } else {
        (&ua * &ua + &ub * &ub) / two
    }
}

/// `W_1(mu_N, lambda_1) = int_0^1 |F(x) - x| dx`, exactly.
pub fn w1_exact_1d(points: &[Rational]) -> Result<Rational, OneDimError> {
    let sorted = sorted_checked(points)?;
    let n = rat_int(sorted.len() as u64);
    let mut total = Rational::zero();
    let mut left = Rational::zero();
    for (i, x) in sorted
        .iter()
        .chain(std::iter::once(&Rational::one()))
        .enumerate()
    {
        if *x > left {
            total += abs_integral(&(rat_int(i as u64) / &n), &left, x);
            left = x.clone();
        }
    }
    Ok(total)
}

/// `W_inf(mu_N, lambda_1)`: the `i`-th smallest point serves `[(i-1)/N, i/N]`.
pub fn winfty_exact_1d(points: &[Rational]) -> Result<Rational, OneDimError> {
    let sorted = sorted_checked(points)?;
    let n = rat_int(sorted.len() as u64);
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let a = (x - rat_int(i as u64) / &n).abs();
            let b = (x - rat_int(i as u64 + 1) / &n).abs();
            if a > b {
                a
            } else {
                b
            }
        })
        .max()
        .expect("non-empty"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionRow {
    pub count: u64,
    /// `N * W_1(mu_N, lambda_1)`.
    pub scaled_w1: Rational,
    /// Running maximum of `scaled_w1` over the dyadic block `[2^j, 2^{j+1})`
    /// containing `count`, up to and including `count`.
    pub block_max: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMax {
    /// `j` for the block `[2^j, 2^{j+1})`.
    pub block: u32,
    pub argmax: u64,
    pub value: Rational,
    /// Whether the block is fully covered by the scan.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionTable {
    pub rows: Vec<ObstructionRow>,
    pub blocks: Vec<BlockMax>,
}

/// `N * W_1` for the first `count` van der Corput points, given as integers
/// over `2^bits` in increasing order.
fn scaled_w1_dyadic(sorted: &[u64], bits: u32) -> Rational {
    let n = sorted.len() as i128;
    let full = 1i128 << bits;
    // With X = 2^bits x and C the count at or below x:
    //   N W_1 = 2^{-2 bits} int_0^{2^bits} |C 2^bits - N X| dX,
    // and 2N times each piece's integral is an integer.
    let mut acc = 0u128;
    let mut left = 0i128;
    for (c, x) in sorted
        .iter()
        .map(|&x| x as i128)
        .chain(std::iter::once(full))
        .enumerate()
    {
        if x > left {
            let alpha = c as i128 * full;
            let ua = alpha - n * left;
            let ub = alpha - n * x;
            let (a2, b2) = ((ua * ua) as u128, (ub * ub) as u128);
            acc += if ub >= 0 {
                a2 - b2
            } else if ua <= 0 {
                b2 - a2
            } else {
                a2 + b2
            };
            left = x;
        }
    }
    Rational::new(
        BigInt::from(acc),
        BigInt::from(2 * n) << (2 * bits as usize),
    )
}

/// `N * W_1` for `N = 1..=n_max` along the van der Corput sequence, with
/// blockwise maxima over `[2^j, 2^{j+1})`.
pub fn obstruction_scan(n_max: u64) -> Result<ObstructionTable, OneDimError> {
    if n_max == 0 || n_max > 1 << 24 {
        return Err(OneDimError::ScanLength(n_max));
    }
    let bits = 64 - (n_max - 1).leading_zeros();
    let mut sorted: Vec<u64> = Vec::with_capacity(n_max as usize);
    let mut rows = Vec::with_capacity(n_max as usize);
    let mut blocks: Vec<BlockMax> = Vec::new();
    for count in 1..=n_max {
        let x = van_der_corput(count);
        let scaled = x.numerator() << (bits - x.exponent());
        let at = sorted.partition_point(|&y| y < scaled);
        sorted.insert(at, scaled);
        let value = scaled_w1_dyadic(&sorted, bits);
        let block = 63 - count.leading_zeros();
        match blocks.last_mut() {
            Some(b) if b.block == block => {
                if value > b.value {
                    b.value = value.clone();
                    b.argmax = count;
                }
            }
            _ => blocks.push(BlockMax {
                block,
                argmax: count,
                value: value.clone(),
                complete: false,
            }),
        }
        let current = blocks.last_mut().expect("just pushed");
        current.complete = count == (2u64 << block) - 1;
        rows.push(ObstructionRow {
            count,
            scaled_w1: value,
            block_max: current.value.clone(),
        });
    }
    Ok(ObstructionTable { rows, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    #[test]
    fn van_der_corput_prefix() {
        let got: Vec<_> = (1..=8).map(|n| van_der_corput(n).to_rational()).collect();
        let want = [
            (0, 1),
            (1, 2),
            (1, 4),
            (3, 4),
            (1, 8),
            (5, 8),
            (3, 8),
            (7, 8),
        ];
        assert_eq!(
            got,
            want.iter().map(|&(p, q)| rat(p, q)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn w1_examples() {
        assert_eq!(w1_exact_1d(&[rat(0, 1)]).unwrap(), rat(1, 2));
        assert_eq!(w1_exact_1d(&[rat(0, 1), rat(1, 2)]).unwrap(), rat(1, 4));
        for k in 0..6 {
            let pts: Vec<_> = (0..1i64 << k).map(|j| rat(j, 1 << k)).collect();
            assert_eq!(w1_exact_1d(&pts).unwrap(), rat(1, 2 << k));
        }
        // {0, 1/2, 1/4}: 15/288 + 21/288 + 36/288.
        assert_eq!(
            w1_exact_1d(&[rat(0, 1), rat(1, 2), rat(1, 4)]).unwrap(),
            rat(1, 4)
        );
    }

    #[test]
    fn w1_matches_quadrature() {
        let pts = [rat(1, 3), rat(2, 7), rat(9, 10), rat(2, 7)];
        let exact = w1_exact_1d(&pts).unwrap();
        let f: Vec<f64> = pts
            .iter()
            .map(|x| num_traits::ToPrimitive::to_f64(x).unwrap())
            .collect();
        let steps = 200_000;
        let quad: f64 = (0..steps)
            .map(|i| {
                let x = (i as f64 + 0.5) / steps as f64;
                let cdf = f.iter().filter(|&&p| p <= x).count() as f64 / f.len() as f64;
                (cdf - x).abs() / steps as f64
            })
            .sum();
        let exact = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        assert!((quad - exact).abs() < 1e-5, "{quad} vs {exact}");
    }

    #[test]
    fn winfty_examples() {
        assert_eq!(winfty_exact_1d(&[rat(0, 1)]).unwrap(), rat(1, 1));
        assert_eq!(winfty_exact_1d(&[rat(1, 2)]).unwrap(), rat(1, 2));
        assert_eq!(winfty_exact_1d(&[rat(0, 1), rat(1, 2)]).unwrap(), rat(1, 2));
    }

    #[test]
    fn one_dim_rejects_bad_points() {
        assert_eq!(w1_exact_1d(&[]), Err(OneDimError::NoPoints));
        assert!(matches!(
            winfty_exact_1d(&[rat(1, 1)]),
            Err(OneDimError::OutOfRange(_))
        ));
        assert!(matches!(
            w1_exact_1d(&[rat(-1, 2)]),
            Err(OneDimError::OutOfRange(_))
        ));
    }

    #[test]
    fn integer_kernel_matches_rational_formula() {
        let table = obstruction_scan(300).unwrap();
        let mut pts = Vec::new();
        for row in &table.rows {
            pts.push(van_der_corput(row.count).to_rational());
            let direct = w1_exact_1d(&pts).unwrap() * rat_int(row.count);
            assert_eq!(row.scaled_w1, direct, "N={}", row.count);
        }
    }

    #[test]
    fn scan_examples() {
        let t = obstruction_scan(2).unwrap();
        assert_eq!(t.rows[0].scaled_w1, rat(1, 2));
        assert_eq!(t.rows[1].scaled_w1, rat(1, 2));
        let t = obstruction_scan(3).unwrap();
        assert_eq!(t.rows[2].scaled_w1, rat(3, 4));
        assert_eq!(t.blocks[1].argmax, 3);
        assert!(t.blocks[1].complete);
        let t = obstruction_scan(1024).unwrap();
        for row in &t.rows {
            if row.count.is_power_of_two() {
                assert_eq!(row.scaled_w1, rat(1, 2));
            }
        }
        assert!(!t.blocks.last().unwrap().complete);
        assert!(obstruction_scan(0).is_err());
    }
}
