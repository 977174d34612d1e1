//! Price-and-lottery certificates on a subset of items.
//!
//! For prices `p` on `U` and a distribution `δ` over subsets `S ⊆ U`, the
//! guarantee is `g = min_{T⊆U} [p(T) + Σ_S δ_S (v(S∖T) − p(S))]`. For fixed
//! `p` the best `δ` is the row strategy of the zero-sum game with payoff
//! `A[S][T] = p(T) + v(S∖T) − p(S)`, so only `p` needs a grid search.

use serde::{Deserialize, Serialize};

use super::game::solve_zero_sum;
use crate::error::{Error, Result};
use crate::valuations::{tolerance, ItemSet, SetFunction};

/// Largest `|U|` the grid search accepts.
pub const MAX_SUBGOOD_ITEMS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgoodSolution {
    pub items: ItemSet,
    /// Length-`m` price vector, zero outside `items`.
    pub prices: Vec<f64>,
    /// `(S, δ_S)` for every `S ⊆ items`, in ascending mask order.
    pub delta: Vec<(ItemSet, f64)>,
    pub guarantee: f64,
    /// `v(U)/g`; `None` when `g = 0`.
    pub alpha_achieved: Option<f64>,
}

/// `p(T) + Σ_S δ_S (v(S∖T) − p(S))`.
pub fn subgood_lhs<V: SetFunction + ?Sized>(
    v: &V,
    prices: &[f64],
    delta: &[(ItemSet, f64)],
    t: ItemSet,
) -> f64 {
    let p = |s: ItemSet| s.iter().map(|j| prices[j]).sum::<f64>();
    p(t) + delta
        .iter()
        .map(|&(s, q)| q * (v.value(s.difference(t)) - p(s)))
        .sum::<f64>()
}

fn min_over_t<V: SetFunction + ?Sized>(
    v: &V,
    prices: &[f64],
    delta: &[(ItemSet, f64)],
    u: ItemSet,
) -> f64 {
    u.subsets()
        .map(|t| subgood_lhs(v, prices, delta, t))
        .fold(f64::INFINITY, f64::min)
}

/// Grid search over `p ∈ {k·v(U)/resolution}^U` with the optimal `δ` for
/// each grid point. Ties keep the first grid point in lexicographic order.
pub fn solve_subgood<V: SetFunction + ?Sized>(
    v: &V,
    u: ItemSet,
    resolution: usize,
) -> Result<SubgoodSolution> {
    let m = v.items();
    if !u.fits(m) {
        return Err(Error::Parameter(format!(
            "{u} is not a subset of {m} items"
        )));
    }
    if u.len() > MAX_SUBGOOD_ITEMS {
        return Err(Error::capacity(
            "subgood item set",
            u.len() as u128,
            MAX_SUBGOOD_ITEMS as u128,
        ));
    }
    if resolution == 0 {
        return Err(Error::Parameter(
            "grid resolution must be at least 1".into(),
        ));
    }
    let top = v.value(u);
    let subsets: Vec<ItemSet> = u.subsets().collect();
    let items: Vec<usize> = u.iter().collect();

    let mut best: Option<SubgoodSolution> = None;
    let mut steps = vec![0usize; items.len()];
    loop {
        let mut prices = vec![0.0; m];
        for (&j, &k) in items.iter().zip(&steps) {
            prices[j] = top * k as f64 / resolution as f64;
        }
        let p = |s: ItemSet| s.iter().map(|j| prices[j]).sum::<f64>();
        let payoff: Vec<Vec<f64>> = subsets
            .iter()
            .map(|&s| {
                subsets
                    .iter()
                    .map(|&t| p(t) + v.value(s.difference(t)) - p(s))
                    .collect()
            })
            .collect();
        let game = solve_zero_sum(&payoff);
        let delta: Vec<(ItemSet, f64)> = subsets.iter().copied().zip(game.row_strategy).collect();
        // Re-evaluate so the reported guarantee is exactly the certified one.
        let g = min_over_t(v, &prices, &delta, u);
        if best.as_ref().is_none_or(|b| g > b.guarantee) {
            best = Some(SubgoodSolution {
                items: u,
                prices,
                delta,
                guarantee: g,
                alpha_achieved: None,
            });
        }

        let Some(pos) = steps.iter().rposition(|&k| k < resolution) else {
            break;
        };
        steps[pos] += 1;
        for k in &mut steps[pos + 1..] {
            *k = 0;
        }
    }
    let mut sol = best.expect("grid has at least one point");
    if sol.guarantee <= 0.0 {
        sol.guarantee = sol.guarantee.max(0.0);
    } else {
        sol.alpha_achieved = Some(top / sol.guarantee);
    }
    Ok(sol)
}

/// `min_{T⊆U} LHS(T) − v(U)/α_achieved` (target 0 when `α_achieved` is
/// `None`).
pub fn verify_subgood<V: SetFunction + ?Sized>(
    sol: &SubgoodSolution,
    v: &V,
    u: ItemSet,
) -> Result<f64> {
    let m = v.items();
    if sol.prices.len() != m || !u.fits(m) {
        return Err(Error::Parameter(format!(
            "solution has {} prices for {m} items",
            sol.prices.len()
        )));
    }
    let mut total = 0.0;
    for &(s, q) in &sol.delta {
        if !(q.is_finite() && q >= 0.0) || !s.is_subset_of(u) {
            return Err(Error::MalformedSpec(format!(
                "δ entry ({s}, {q}) is not a probability on subsets of {u}"
            )));
        }
        total += q;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::MalformedSpec(format!("δ sums to {total}, not 1")));
    }
    let target = sol.alpha_achieved.map_or(0.0, |a| v.value(u) / a);
    Ok(min_over_t(v, &sol.prices, &sol.delta, u) - target)
}

/// True when `verify_subgood` reports a slack no worse than rounding.
pub fn subgood_certified<V: SetFunction + ?Sized>(
    sol: &SubgoodSolution,
    v: &V,
    u: ItemSet,
) -> Result<bool> {
    let slack = verify_subgood(sol, v, u)?;
    Ok(slack >= -tolerance(sol.guarantee, 0.0))
}
