use rand::Rng;
use serde::{Deserialize, Serialize};

use super::prices::PriceVector;
use super::trace::{check_order, MechanismTrace, Purchase};
use crate::allocation::demand_set;
use crate::error::{Error, Result};
use crate::exact::profile_expectation;
use crate::valuations::{Instance, ItemSet, SetFunction, MAX_PROFILES};

fn check_prices(inst: &Instance, prices: &PriceVector) -> Result<()> {
    if prices.len() != inst.m() {
        return Err(Error::Parameter(format!(
            "{} prices for {} items",
            prices.len(),
            inst.m()
        )));
    }
    Ok(())
}

/// Runs the posted-price mechanism on a fixed valuation profile (support
/// indices per bidder). Each arriving bidder buys their demand set among the
/// remaining items.
pub fn posted_price_outcome(
    inst: &Instance,
    prices: &PriceVector,
    order: &[usize],
    profile: &[usize],
) -> MechanismTrace {
    let mut remaining = ItemSet::full(inst.m());
    let mut purchases = Vec::with_capacity(order.len());
    for &i in order {
        let v = inst.table(i, profile[i]);
        let demand = demand_set(v, prices, remaining);
        remaining = remaining.difference(demand.set);
        let value = v.value(demand.set);
        let payment = prices.price_of(demand.set);
        purchases.push(Purchase {
            bidder: i,
            support_index: profile[i],
            set: demand.set,
            value,
            payment,
            utility: value - payment,
            scores: None,
        });
    }
    MechanismTrace::from_purchases(order.to_vec(), purchases, None)
}

/// Samples every bidder's valuation (one draw each, in arrival order) and
/// runs the posted-price mechanism.
pub fn run_posted_price<R: Rng + ?Sized>(
    inst: &Instance,
    prices: &PriceVector,
    order: &[usize],
    rng: &mut R,
) -> Result<MechanismTrace> {
    check_order(order, inst.n())?;
    check_prices(inst, prices)?;
    let mut profile = vec![0; inst.n()];
    for &i in order {
        profile[i] = crate::valuations::sample_valuation(inst.bidder(i), rng).0;
    }
    Ok(posted_price_outcome(inst, prices, order, &profile))
}

/// Exact expectations of a mechanism's outcome.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedOutcome {
    pub welfare: f64,
    pub revenue: f64,
    pub utility: f64,
}

/// Exact `E[welfare]`, `E[revenue]` and `E[utility]` by enumerating every
/// valuation profile. `welfare` is `revenue + utility`.
pub fn expected_welfare_exact(
    inst: &Instance,
    prices: &PriceVector,
    order: &[usize],
) -> Result<ExpectedOutcome> {
    check_order(order, inst.n())?;
    check_prices(inst, prices)?;
    let [revenue, utility] = profile_expectation(inst, MAX_PROFILES, |profile| {
        let t = posted_price_outcome(inst, prices, order, profile);
        Ok([t.revenue, t.total_utility])
    })?;
    Ok(ExpectedOutcome {
        welfare: revenue + utility,
        revenue,
        utility,
    })
}

/// `E[max_i v_i]` for a single-item instance, by exact enumeration.
pub fn expected_max_value(inst: &Instance) -> Result<f64> {
    if inst.m() != 1 {
        return Err(Error::InvalidShape(format!(
            "single-item pricing needs m = 1, instance has m = {}",
            inst.m()
        )));
    }
    let item = ItemSet::singleton(0);
    let [e] = profile_expectation(inst, MAX_PROFILES, |profile| {
        let max = inst
            .profile_tables(profile)
            .iter()
            .map(|v| v.value(item))
            .fold(0.0, f64::max);
        Ok([max])
    })?;
    Ok(e)
}

/// The balanced single-item price `½·E[max_i v_i]`.
pub fn single_item_price(inst: &Instance) -> Result<PriceVector> {
    PriceVector::new(vec![0.5 * expected_max_value(inst)?])
}
