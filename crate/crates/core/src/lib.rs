//! Exact combinatorics for tame cyclic covers `z^m = prod (x - x_i)^{a_i}` of
//! the projective line in characteristic `p`: p-rank bounds, generic
//! ordinarity, two-component degeneration certificates, and a finite-field
//! oracle computing actual p-ranks of explicit curves.

pub mod arith;
pub mod bounds;
pub mod degen;
pub mod error;
pub mod families;
pub mod oracle;

pub use arith::{CoverType, PrimeClass};
pub use error::{Error, ErrorKind, Result};
