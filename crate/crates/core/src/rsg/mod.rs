//! Random score generators and the phantom-threshold allocation rule.

mod algorithm;
mod generator;
mod mirror;

pub use algorithm::{
    beating, bidder_score_law, bidder_score_outcomes, correa_cristi_outcome, max_law,
    phantom_price_law, run_correa_cristi, sample_phantom_prices, ScoreLaw,
};
pub use generator::{Irsg, Rsg, ScoreDistribution, ScoreEntry};
pub use mirror::{
    expected_welfare_cc, mirror_sides_exact, mirror_sides_mc, MirrorEstimate, MirrorSides,
};
