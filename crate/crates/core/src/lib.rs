//! Constant composition distribution matching by arithmetic coding.
//!
//! Two matchers share one interface shape:
//!
//! * [`fp_ccdm`]: full-precision matching over exact rationals. Its working precision
//!   grows linearly with the block length; it serves as the reference.
//! * [`log_ccdm`]: the interval width is tracked in the log domain through three
//!   lookup tables ([`tables`]), so matching needs only table reads, additions,
//!   subtractions and shifts, with a register of `log2 M + log2 N` bits.
//!
//! [`analysis`] reproduces rate, storage and precision trade-offs; [`verify`] holds the
//! exhaustive small-block suite.

pub mod analysis;
pub mod composition;
pub mod fp_ccdm;
pub mod log_ccdm;
pub mod tables;
pub mod verify;

pub use composition::{CcSequence, Composition, CompositionError, IndexWord};
pub use log_ccdm::{ImageCheck, LogError, LogMatcher, MatcherParams, RegisterMode};
pub use tables::{TableConfig, TableError, TableSet};
