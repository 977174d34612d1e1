//! Sequential posted-price mechanisms, balanced prices and subgood
//! certificates.

mod balanced;
mod game;
mod posted;
mod prices;
mod subgood;
mod trace;

pub use balanced::{
    balanced_prices_xos, check_balanced, supporting_clause_prices, BalanceReport, BalanceViolation,
};
pub use game::{solve_zero_sum, GameSolution};
pub use posted::{
    expected_max_value, expected_welfare_exact, posted_price_outcome, run_posted_price,
    single_item_price, ExpectedOutcome,
};
pub use prices::{PriceVector, PricingRule};
pub use subgood::{
    solve_subgood, subgood_certified, subgood_lhs, verify_subgood, SubgoodSolution,
    MAX_SUBGOOD_ITEMS,
};
pub use trace::{all_orders, check_order, identity_order, MechanismTrace, Purchase};
