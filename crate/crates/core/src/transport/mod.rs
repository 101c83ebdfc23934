//! Wasserstein bounds derived from transport partitions.
//!
//! A verified partition `A_1..A_N` couples `mu_N` with Lebesgue measure by
//! sending the mass of `A_n` to `x_n`; the largest distance from a point to a
//! corner of its cell bounds `W_inf`, and hence every `W_p`. The volumetric
//! lower bound and the grid oracle bracket the true value from the other side.

mod flow;
pub mod one_dim;
pub mod oracle;

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{rat_int, sq_radius_within, Rational};
use crate::partition::{verify_partition, TransportPartition, VerificationReport, VerifyMode};

pub use flow::FlowNetwork;
pub use one_dim::{
    obstruction_scan, van_der_corput, w1_exact_1d, winfty_exact_1d, ObstructionTable,
};
pub use oracle::{
    winfty_oracle_grid, winfty_oracle_grid_with_budget, GridInstance, GridOracle, OracleError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("partition failed verification:\n{0}")]
    Unverified(Box<VerificationReport>),
    #[error("Wasserstein exponent must be at least 1, got {0}")]
    Exponent(String),
}

/// A partition that passed [`verify_partition`].
#[derive(Clone, Debug)]
pub struct VerifiedPartition<'a> {
    partition: &'a TransportPartition,
    report: VerificationReport,
}

impl<'a> VerifiedPartition<'a> {
    pub fn new(
        partition: &'a TransportPartition,
        mode: VerifyMode,
    ) -> Result<Self, TransportError> {
        let report = verify_partition(partition, mode);
        if !report.passed() {
            return Err(TransportError::Unverified(Box::new(report)));
        }
        Ok(VerifiedPartition { partition, report })
    }

    pub fn partition(&self) -> &TransportPartition {
        self.partition
    }

    pub fn report(&self) -> &VerificationReport {
        &self.report
    }
}

/// Certified `W_inf(mu_N, lambda_d) <= sqrt(radius_sq)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingCertificate {
    pub count: u64,
    pub dim: usize,
    /// `max_n max_{y in A_n} |y - x_n|^2`, exact.
    pub radius_sq: Rational,
    /// Cell attaining `radius_sq`.
    pub witness: u64,
    /// `sqrt(radius_sq)` in floating point.
    pub radius: f64,
    /// `36 d`: the theorem bound is `radius_sq <= 36 d N^{-2/d}`.
    pub theorem_constant_sq: Rational,
    /// `N^2 radius_sq^d <= (36 d)^d`, decided exactly.
    pub within_theorem_bound: bool,
}

impl CouplingCertificate {
    /// `6 sqrt(d) N^{-1/d}`.
    pub fn theorem_radius(&self) -> f64 {
        theorem_bound(self.count, self.dim)
    }

    /// `radius_sq <= c^2 d N^{-2/d}`, exactly.
    pub fn within_constant(&self, constant: &Rational) -> bool {
        sq_radius_within(&self.radius_sq, constant, self.count, self.dim)
    }
}

/// The coupling radius of a verified partition.
pub fn winfty_upper(verified: &VerifiedPartition<'_>) -> CouplingCertificate {
    let p = verified.partition();
    let (radius_sq, witness) = p
        .cells
        .par_iter()
        .map(|c| (c.rect.max_sq_dist(&c.point), c.n))
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .expect("verified partitions are non-empty");
    let constant_sq = rat_int(36 * p.dim as u64);
    let within = sq_radius_within(&radius_sq, &rat_int(6), p.count, p.dim);
    CouplingCertificate {
        count: p.count,
        dim: p.dim,
        radius: radius_sq.to_f64().unwrap_or(f64::NAN).sqrt(),
        radius_sq,
        witness,
        theorem_constant_sq: constant_sq,
        within_theorem_bound: within,
    }
}

/// A Wasserstein exponent `p` in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self, TransportError> {
        if p.is_nan() || p < 1.0 {
            return Err(TransportError::Exponent(p.to_string()));
        }
        Ok(if p.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        })
    }
}

impl FromStr for Exponent {
    type Err = TransportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| TransportError::Exponent(s.to_string()))
                .and_then(Exponent::new),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

/// `W_p <= W_inf`, so the certificate radius bounds every `p`.
pub fn wp_upper(certificate: &CouplingCertificate, _p: Exponent) -> f64 {
    certificate.radius
}

/// Volume of the unit ball in `R^dim`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    // omega_0 = 1, omega_1 = 2, omega_d = 2 pi / d * omega_{d-2}.
    let mut omega = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if dim.is_multiple_of(2) { 2 } else { 3 };
    while k <= dim {
        omega *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    omega
}

/// `(N omega_d)^{-1/d}`: `N` balls of radius `r` must hold unit mass, so any
/// `N`-point measure has `W_inf >= r`.
pub fn volumetric_lower_winfty(count: u64, dim: usize) -> f64 {
    (count as f64 * unit_ball_volume(dim)).powf(-1.0 / dim as f64)
}

/// `6 sqrt(d) N^{-1/d}`.
pub fn theorem_bound(count: u64, dim: usize) -> f64 {
    constant_bound(6.0, count, dim)
}

/// `c sqrt(d) N^{-1/d}`.
pub fn constant_bound(constant: f64, count: u64, dim: usize) -> f64 {
    constant * (dim as f64).sqrt() * (count as f64).powf(-1.0 / dim as f64)
}

/// Upper and lower `W_p` bounds with an optional oracle reading.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub count: u64,
    pub dim: usize,
    pub p: Exponent,
    pub upper: f64,
    /// `W_inf` volumetric bound; only reported for `p = inf`.
    pub lower: Option<f64>,
    pub oracle_value: Option<f64>,
    pub oracle_error: Option<f64>,
}

impl BoundReport {
    pub fn new(certificate: &CouplingCertificate, p: Exponent) -> Self {
        let lower = matches!(p, Exponent::Infinity)
            .then(|| volumetric_lower_winfty(certificate.count, certificate.dim));
        BoundReport {
            count: certificate.count,
            dim: certificate.dim,
            p,
            upper: wp_upper(certificate, p),
            lower,
            oracle_value: None,
            oracle_error: None,
        }
    }

    pub fn with_oracle(mut self, oracle: &GridOracle) -> Self {
        self.oracle_value = Some(oracle.value);
        self.oracle_error = Some(oracle.error);
        self
    }

    /// `lower <= upper` and the oracle band meets `[lower, upper]`.
    pub fn consistent(&self) -> bool {
        let lower_ok = self.lower.is_none_or(|l| l <= self.upper);
        let oracle_ok = match (self.oracle_value, self.oracle_error) {
            (Some(v), Some(e)) => v - e <= self.upper && self.lower.is_none_or(|l| v + e >= l),
            _ => true,
        };
        lower_ok && oracle_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;
    use crate::partition::build_partition;

    #[test]
    fn single_point_certificate() {
        let p = build_partition(1, 2).unwrap();
        let v = VerifiedPartition::new(&p, VerifyMode::Tree).unwrap();
        let c = winfty_upper(&v);
        assert_eq!(c.radius_sq, rat(2, 1));
        assert_eq!(c.theorem_constant_sq, rat(72, 1));
        assert!(c.within_theorem_bound);
        assert!((c.radius - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn n100_certificate() {
        let p = build_partition(100, 2).unwrap();
        let c = winfty_upper(&VerifiedPartition::new(&p, VerifyMode::Tree).unwrap());
        assert!(c.radius_sq <= rat(72, 100));
        assert!(c.radius <= 0.8486);
        for p in [1.0, 2.0, f64::INFINITY] {
            assert_eq!(wp_upper(&c, Exponent::new(p).unwrap()), c.radius);
        }
    }

    #[test]
    fn refuses_unverified() {
        let mut p = build_partition(20, 2).unwrap();
        p.cells.pop();
        assert!(matches!(
            VerifiedPartition::new(&p, VerifyMode::Tree),
            Err(TransportError::Unverified(_))
        ));
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::Finite(2.0));
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("nan".parse::<Exponent>().is_err());
        assert!("x".parse::<Exponent>().is_err());
    }

    #[test]
    fn volumetric_examples() {
        assert!((volumetric_lower_winfty(100, 2) - 0.056_418_958_354_775_6).abs() < 1e-12);
        assert!((volumetric_lower_winfty(1, 2) - 0.564_189_583_547_756_3).abs() < 1e-12);
        let v3 = (8.0 * 4.0 * std::f64::consts::PI / 3.0).powf(-1.0 / 3.0);
        assert!((volumetric_lower_winfty(8, 3) - v3).abs() < 1e-12);
        assert!((v3 - 0.310).abs() < 1e-3);
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn report_consistency() {
        let p = build_partition(16, 2).unwrap();
        let c = winfty_upper(&VerifiedPartition::new(&p, VerifyMode::Tree).unwrap());
        let r = BoundReport::new(&c, Exponent::Infinity);
        assert!(r.consistent());
        assert_eq!(BoundReport::new(&c, Exponent::Finite(2.0)).lower, None);
    }
}
