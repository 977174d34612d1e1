use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::valuations::ItemSet;

/// What happened when one bidder arrived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Purchase {
    pub bidder: usize,
    /// Index of the realized valuation in the bidder's support.
    pub support_index: usize,
    pub set: ItemSet,
    pub value: f64,
    pub payment: f64,
    pub utility: f64,
    /// Realized score vector, for score-based mechanisms.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scores: Option<Vec<f64>>,
}

/// Full record of one run of a sequential mechanism.
///
/// `welfare` is defined as `revenue + total_utility`, so the accounting
/// identity holds bit-exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismTrace {
    pub order: Vec<usize>,
    /// One entry per bidder, in arrival order.
    pub purchases: Vec<Purchase>,
    pub revenue: f64,
    pub total_utility: f64,
    pub welfare: f64,
    /// Phantom thresholds `p'_j`, for score-based mechanisms.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phantom_prices: Option<Vec<f64>>,
}

impl MechanismTrace {
    pub(crate) fn from_purchases(
        order: Vec<usize>,
        purchases: Vec<Purchase>,
        phantom_prices: Option<Vec<f64>>,
    ) -> Self {
        let revenue: f64 = purchases.iter().map(|p| p.payment).fold(0.0, |a, b| a + b);
        let total_utility: f64 = purchases.iter().map(|p| p.utility).fold(0.0, |a, b| a + b);
        MechanismTrace {
            order,
            purchases,
            revenue,
            total_utility,
            welfare: revenue + total_utility,
            phantom_prices,
        }
    }

    /// `Σ_i v_i(x_i)` summed directly (equal to `welfare` up to rounding).
    pub fn value_total(&self) -> f64 {
        self.purchases
            .iter()
            .map(|p| p.value)
            .fold(0.0, |a, b| a + b)
    }

    /// Purchased sets indexed by bidder.
    pub fn allocation(&self) -> Vec<ItemSet> {
        let mut parts = vec![ItemSet::EMPTY; self.purchases.len()];
        for p in &self.purchases {
            parts[p.bidder] = p.set;
        }
        parts
    }
}

/// Checks `order` is a permutation of `0..n`.
pub fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::Parameter(format!(
            "arrival order has {} entries for {n} bidders",
            order.len()
        )));
    }
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Parameter(format!(
                "arrival order {order:?} is not a permutation of 0..{n}"
            )));
        }
    }
    Ok(())
}

pub fn identity_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_orders(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = identity_order(n);
    loop {
        out.push(cur.clone());
        // Next lexicographic permutation.
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}
