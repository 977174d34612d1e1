use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::prices::{PriceVector, PricingRule};
use crate::allocation::{
    feasible_allocations, optimal_allocation, optimal_allocation_within, Allocation, Profile,
};
use crate::error::{Error, Result};
use crate::exact::profile_expectation_vec;
use crate::valuations::{argmax_clause, tolerance, Instance, ItemSet, ValuationSpec, MAX_PROFILES};

/// Per-profile supporting-clause prices: every item `j` in `opt.parts[i]`
/// is priced at `a_{i,j}`, where `a_i` is the smallest-index clause of `v_i`
/// attaining `v_i(opt.parts[i])`. Unallocated items are priced at zero.
pub fn supporting_clause_prices(
    valuations: &[&ValuationSpec],
    opt: &Allocation,
    m: usize,
) -> Result<PriceVector> {
    if valuations.len() != opt.parts.len() {
        return Err(Error::Parameter(format!(
            "{} valuations for {} allocation parts",
            valuations.len(),
            opt.parts.len()
        )));
    }
    let mut prices = vec![0.0; m];
    for (v, &part) in valuations.iter().zip(&opt.parts) {
        if part.is_empty() {
            continue;
        }
        let clauses = v.xos_clauses().ok_or_else(|| Error::WrongClass {
            class: "xos",
            detail: format!(
                "{} valuation has no clause representation",
                v.variant_name()
            ),
        })?;
        let k = argmax_clause(&clauses, part);
        for j in part.iter() {
            prices[j] = clauses[k][j];
        }
    }
    PriceVector::new(prices)
}

/// Balanced prices for XOS bidders: `½ · E_ṽ[supporting-clause price of
/// each item under OPT(ṽ)]`, where the factor `½ = α/(1+αβ)` comes from
/// `(1,1)`-balancedness.
///
/// Every support valuation must carry clauses (additive, unit-demand or
/// xos).
pub fn balanced_prices_xos(inst: &Instance) -> Result<PriceVector> {
    for (i, d) in inst.bidders().iter().enumerate() {
        for (k, e) in d.support().iter().enumerate() {
            if e.valuation.xos_clauses().is_none() {
                return Err(Error::WrongClass {
                    class: "xos",
                    detail: format!(
                        "bidder {i}, support entry {k} is {}",
                        e.valuation.variant_name()
                    ),
                });
            }
        }
    }
    let m = inst.m();
    let expected = profile_expectation_vec(inst, MAX_PROFILES, m, |profile| {
        let (opt, _) = optimal_allocation(&Profile::new(inst.profile_tables(profile)))?;
        let specs: Vec<&ValuationSpec> = profile
            .iter()
            .enumerate()
            .map(|(i, &k)| inst.valuation(i, k))
            .collect();
        Ok(supporting_clause_prices(&specs, &opt, m)?.into_inner())
    })?;
    PriceVector::new(expected.into_iter().map(|p| 0.5 * p).collect())
}

/// A witness that one balancedness condition fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceViolation {
    /// 1 or 2.
    pub condition: u8,
    pub x: Allocation,
    /// The offending `x' ∈ F_x` for condition 2.
    pub x_prime: Option<Allocation>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub alpha: f64,
    pub beta: f64,
    pub cond1_ok: bool,
    pub cond2_ok: bool,
    /// `min_x [Σ p_i(x_i) − (OPT − OPT(F_x))/α]`.
    pub cond1_slack: f64,
    /// `min_x min_{x'} [β·OPT(F_x) − Σ p_i(x'_i)]`.
    pub cond2_slack: f64,
    pub worst_slack: f64,
    pub allocations_checked: usize,
    pub violation: Option<BalanceViolation>,
}

impl BalanceReport {
    pub fn balanced(&self) -> bool {
        self.cond1_ok && self.cond2_ok
    }
}

/// Checks `(α, β)`-balancedness of `rule` on one valuation profile with
/// respect to the optimal allocation rule, enumerating every feasible `x`.
///
/// `F_x` is the set of allocations that use only items left unallocated by
/// `x`, so `OPT(v, F_x)` is the optimum on the remaining items.
pub fn check_balanced<P: PricingRule + ?Sized>(
    profile: &Profile<'_>,
    rule: &P,
    alpha: f64,
    beta: f64,
) -> Result<BalanceReport> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Parameter(format!(
            "need α > 0 and β ≥ 0, got α = {alpha}, β = {beta}"
        )));
    }
    let n = profile.n();
    let full = ItemSet::full(profile.m());
    let (_, opt) = optimal_allocation(profile)?;

    let mut rest_opt: HashMap<ItemSet, f64> = HashMap::new();
    let mut rest_max_price: HashMap<ItemSet, (f64, Allocation)> = HashMap::new();

    let mut report = BalanceReport {
        alpha,
        beta,
        cond1_ok: true,
        cond2_ok: true,
        cond1_slack: f64::INFINITY,
        cond2_slack: f64::INFINITY,
        worst_slack: f64::INFINITY,
        allocations_checked: 0,
        violation: None,
    };

    for x in feasible_allocations(n, full)? {
        report.allocations_checked += 1;
        let rest = full.difference(x.allocated());
        let opt_rest = match rest_opt.get(&rest) {
            Some(&v) => v,
            None => {
                let v = optimal_allocation_within(profile, rest)?.1;
                rest_opt.insert(rest, v);
                v
            }
        };

        let paid: f64 = x
            .parts
            .iter()
            .enumerate()
            .map(|(i, &s)| rule.set_price(i, s))
            .sum();
        let need = (opt - opt_rest) / alpha;
        let slack1 = paid - need;
        report.cond1_slack = report.cond1_slack.min(slack1);
        if slack1 < -tolerance(paid, need) && report.cond1_ok {
            report.cond1_ok = false;
            report.violation.get_or_insert(BalanceViolation {
                condition: 1,
                x: x.clone(),
                x_prime: None,
                lhs: paid,
                rhs: need,
            });
        }

        if let std::collections::hash_map::Entry::Vacant(slot) = rest_max_price.entry(rest) {
            let mut best: Option<(f64, Allocation)> = None;
            for xp in feasible_allocations(n, rest)? {
                let total: f64 = xp
                    .parts
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| rule.set_price(i, s))
                    .sum();
                if best.as_ref().is_none_or(|b| total > b.0) {
                    best = Some((total, xp));
                }
            }
            slot.insert(best.expect("F_x contains the empty allocation"));
        }
        let (max_paid, xp) = &rest_max_price[&rest];
        let cap = beta * opt_rest;
        let slack2 = cap - max_paid;
        report.cond2_slack = report.cond2_slack.min(slack2);
        if slack2 < -tolerance(*max_paid, cap) && report.cond2_ok {
            report.cond2_ok = false;
            report.violation.get_or_insert(BalanceViolation {
                condition: 2,
                x: x.clone(),
                x_prime: Some(xp.clone()),
                lhs: *max_paid,
                rhs: cap,
            });
        }
    }
    report.worst_slack = report.cond1_slack.min(report.cond2_slack);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::expected_welfare_exact;
    use crate::valuations::ValueTable;

    fn add(w: &[f64]) -> ValuationSpec {
        ValuationSpec::Additive {
            weights: w.to_vec(),
        }
    }

    #[test]
    fn balanced_price_examples() {
        let inst = Instance::deterministic(1, vec![add(&[1.0])]).unwrap();
        let p = balanced_prices_xos(&inst).unwrap();
        assert_eq!(&p[..], &[0.5]);
        let e = expected_welfare_exact(&inst, &p, &[0]).unwrap();
        assert_eq!(e.welfare, 1.0);

        let inst = Instance::deterministic(1, vec![add(&[2.0]), add(&[1.0])]).unwrap();
        assert_eq!(&balanced_prices_xos(&inst).unwrap()[..], &[1.0]);

        let inst = Instance::deterministic(2, vec![add(&[1.0, 0.0]), add(&[0.0, 2.0])]).unwrap();
        assert_eq!(&balanced_prices_xos(&inst).unwrap()[..], &[0.5, 1.0]);
    }

    #[test]
    fn non_xos_support_rejected() {
        let inst = Instance::deterministic(
            2,
            vec![ValuationSpec::SqrtAdditive {
                weights: vec![1.0, 1.0],
            }],
        )
        .unwrap();
        assert!(matches!(
            balanced_prices_xos(&inst),
            Err(Error::WrongClass { .. })
        ));
    }

    #[test]
    fn xos_clause_prices() {
        let v = ValuationSpec::Xos {
            clauses: vec![vec![1.0, 1.0], vec![3.0, 0.0]],
        };
        let w = add(&[0.0, 2.5]);
        let opt = Allocation::new(vec![ItemSet::singleton(0), ItemSet::singleton(1)]);
        let p = supporting_clause_prices(&[&v, &w], &opt, 2).unwrap();
        assert_eq!(&p[..], &[3.0, 2.5]);
    }

    fn tables(specs: &[ValuationSpec]) -> Vec<ValueTable> {
        specs.iter().map(|s| s.tabulate().unwrap()).collect()
    }

    #[test]
    fn supporting_clause_rule_is_one_one_balanced() {
        let specs = vec![
            ValuationSpec::Xos {
                clauses: vec![vec![1.0, 1.0], vec![1.5, 0.0]],
            },
            ValuationSpec::UnitDemand {
                weights: vec![0.5, 1.2],
            },
        ];
        let t = tables(&specs);
        let profile = Profile::from_tables(&t);
        let (opt, _) = optimal_allocation(&profile).unwrap();
        let refs: Vec<&ValuationSpec> = specs.iter().collect();
        let p = supporting_clause_prices(&refs, &opt, 2).unwrap();
        let r = check_balanced(&profile, &p, 1.0, 1.0).unwrap();
        assert!(r.balanced(), "{r:?}");
        assert_eq!(r.allocations_checked, 9);
    }

    #[test]
    fn zero_prices_fail_condition_one() {
        let t = tables(&[add(&[1.0, 2.0])]);
        let profile = Profile::from_tables(&t);
        let r = check_balanced(&profile, &PriceVector::zeros(2), 3.0, 1.0).unwrap();
        assert!(r.cond2_ok);
        assert!(!r.cond1_ok);
        let v = r.violation.unwrap();
        assert_eq!(v.condition, 1);
    }

    #[test]
    fn beta_zero_fails_condition_two() {
        let t = tables(&[add(&[1.0, 2.0])]);
        let profile = Profile::from_tables(&t);
        let p = PriceVector::new(vec![0.5, 0.0]).unwrap();
        let r = check_balanced(&profile, &p, 1.0, 0.0).unwrap();
        assert!(!r.cond2_ok);
        assert!(check_balanced(&profile, &p, 0.0, 1.0).is_err());
    }

    #[test]
    fn bidder_specific_rule() {
        let t = tables(&[add(&[1.0]), add(&[2.0])]);
        let profile = Profile::from_tables(&t);
        let rule = |i: usize, s: ItemSet| if i == 1 { 2.0 * s.len() as f64 } else { 0.0 };
        let r = check_balanced(&profile, &rule, 1.0, 1.0).unwrap();
        assert!(r.cond2_ok);
        // Handing the item to the free bidder loses 2 and collects nothing.
        assert!(!r.cond1_ok);
        let v = r.violation.unwrap();
        assert_eq!(v.x.parts, vec![ItemSet::singleton(0), ItemSet::EMPTY]);
    }
}
