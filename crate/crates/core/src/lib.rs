//! Stable-population tools for inferring fertility and mortality from
//! child-woman ratios and growth rates.
//!
//! The pipeline runs from model life tables ([`lifetable`]) and fertility age
//! patterns ([`fertility`]) through the stable solution ([`stable`]) to grid
//! sweeps and inversion ([`grid`], [`contour`]), census series ([`census`])
//! and cohort-component projection ([`projection`]).

// Negated comparisons reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod census;
pub mod contour;
pub mod data;
pub mod error;
pub mod fertility;
pub mod format;
pub mod grid;
pub mod lifetable;
pub mod projection;
pub mod stable;

pub use error::{Error, Result};
