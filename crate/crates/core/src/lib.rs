//! Exact equal-mass transport partitions for prefixes of the dyadic digital
//! sequence in `[0,1)^d`, with certified Wasserstein bounds.
//!
//! * [`sequence`]: the point sequence, dyadic words and closed-form cube counts.
//! * [`geometry`]: exact half-open boxes over big rationals.
//! * [`partition`]: the construction, its verifier and the file format.
//! * [`transport`]: Wasserstein certificates, lower bounds and numerical oracles.
//! * [`cli`]: the command-line front end.

pub mod cli;
mod exact;
pub mod geometry;
pub mod partition;
pub mod sequence;
pub mod transport;

pub use geometry::{Rational, Rect};
pub use partition::{build_partition, verify_partition, TransportPartition, VerifyMode};
pub use sequence::{DigitWord, DigitalSequence, SequencePoint};
