//! Text serialization of partitions.
//!
//! A partition is a JSON document; every rational is a `"p/q"` string with
//! `q > 0` so files carry no floating point at all:
//!
//! ```text
//! {
//!   "format": "dyadic-transport-partition",
//!   "version": 1,
//!   "d": 2, "n": 4, "level": 1, "fallback": true,
//!   "cells": [
//!     { "n": 1, "point": ["0/1", "0/1"], "lo": ["0/1", "0/1"], "hi": ["1/4", "1/1"] },
//!     ...
//!   ]
//! }
//! ```

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Cell, TransportPartition};
use crate::geometry::{Rational, Rect};

pub const FORMAT_NAME: &str = "dyadic-transport-partition";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a rational \"p/q\": {0:?}")]
    Rational(String),
    #[error("unsupported format {name:?} version {version}")]
    Version { name: String, version: u32 },
    #[error("cell {n}: {reason}")]
    Cell { n: u64, reason: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionDoc {
    format: String,
    version: u32,
    d: usize,
    n: u64,
    level: usize,
    fallback: bool,
    cells: Vec<CellDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellDoc {
    n: u64,
    point: Vec<String>,
    lo: Vec<String>,
    hi: Vec<String>,
}

/// `p/q` in lowest terms, denominator always written.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q` (optional sign on `p`, `q > 0`); the result is normalized.
pub fn parse_rational(s: &str) -> Result<Rational, FormatError> {
    let err = || FormatError::Rational(s.to_string());
    let (p, q) = s.split_once('/').ok_or_else(err)?;
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|c| c.is_ascii_digit());
    let p_digits = p.strip_prefix('-').unwrap_or(p);
    if !digits(p_digits) || !digits(q) {
        return Err(err());
    }
    let p: BigInt = p.parse().map_err(|_| err())?;
    let q: BigInt = q.parse().map_err(|_| err())?;
    if q.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(p, q))
}

fn to_doc(p: &TransportPartition) -> PartitionDoc {
    let strings = |v: &[Rational]| v.iter().map(format_rational).collect();
    PartitionDoc {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
        d: p.dim,
        n: p.count,
        level: p.level,
        fallback: p.fallback,
        cells: p
            .cells
            .iter()
            .map(|c| CellDoc {
                n: c.n,
                point: strings(&c.point),
                lo: strings(c.rect.lo()),
                hi: strings(c.rect.hi()),
            })
            .collect(),
    }
}

fn from_doc(doc: PartitionDoc) -> Result<TransportPartition, FormatError> {
    if doc.format != FORMAT_NAME || doc.version != FORMAT_VERSION {
        return Err(FormatError::Version {
            name: doc.format,
            version: doc.version,
        });
    }
    let parse_all = |v: &[String]| {
        v.iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
    };
    let cells = doc
        .cells
        .into_iter()
        .map(|c| {
            let point = parse_all(&c.point)?;
            let rect =
                Rect::new_allow_empty(parse_all(&c.lo)?, parse_all(&c.hi)?).map_err(|e| {
                    FormatError::Cell {
                        n: c.n,
                        reason: e.to_string(),
                    }
                })?;
            Ok(Cell {
                n: c.n,
                point,
                rect,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    Ok(TransportPartition {
        dim: doc.d,
        count: doc.n,
        level: doc.level,
        fallback: doc.fallback,
        cells,
    })
}

pub fn write_partition<W: Write>(writer: W, p: &TransportPartition) -> Result<(), FormatError> {
    serde_json::to_writer_pretty(writer, &to_doc(p))?;
    Ok(())
}

pub fn read_partition<R: Read>(reader: R) -> Result<TransportPartition, FormatError> {
    from_doc(serde_json::from_reader(reader)?)
}

pub fn to_string(p: &TransportPartition) -> String {
    serde_json::to_string_pretty(&to_doc(p)).expect("serializing strings cannot fail")
}

pub fn from_str(s: &str) -> Result<TransportPartition, FormatError> {
    from_doc(serde_json::from_str(s)?)
}
