//! Valuation functions, class checkers and finite-support valuation
//! distributions.

mod distribution;
mod item_set;
mod spec;

pub(crate) use distribution::normalize_probabilities;
pub use distribution::{
    sample_index, sample_valuation, BidderDistribution, Instance, Profiles, SupportEntry,
    MAX_PROFILES, PROBABILITY_TOLERANCE,
};
pub use item_set::{ItemSet, Items, Subsets, MAX_ITEMS};
pub(crate) use spec::{argmax_clause, tolerance};
pub use spec::{ClassCheck, SetFunction, ValuationClass, ValuationSpec, ValueTable, Violation};
