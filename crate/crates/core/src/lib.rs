//! A laboratory for sequential combinatorial auctions.
//!
//! The crate implements posted-price mechanisms (single-item balanced prices,
//! supporting-clause prices for XOS bidders, the subgood price certificate),
//! the random-score-generator allocation rule with its phantom-price
//! thresholds, and the fixed-point search for score generators on a
//! discretized grid. Everything is checkable by exact enumeration on small
//! instances; Monte Carlo estimators with reproducible sub-streams cover the
//! rest.

pub mod allocation;
pub mod error;
mod exact;
pub mod fixedpoint;
pub mod harness;
pub mod mechanisms;
pub mod montecarlo;
pub mod rsg;
pub mod valuations;

pub use error::{Error, Result};
