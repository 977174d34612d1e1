use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::algorithm::{
    beating, bidder_score_outcomes, correa_cristi_outcome, max_law, phantom_price_law,
    sample_phantom_prices,
};
use super::generator::Irsg;
use crate::error::Result;
use crate::exact::{check_product, odometer};
use crate::mechanisms::{check_order, identity_order};
use crate::montecarlo::{estimate, Estimate};
use crate::valuations::{sample_valuation, Instance, SetFunction, MAX_PROFILES};

/// Both sides of the mirror inequality `E[ALG] ≥ ½·Σ_i E[v_i(W_i)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl MirrorSides {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs - 1e-9
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorEstimate {
    pub lhs: Estimate,
    pub rhs: Estimate,
}

/// Exact expected welfare of the score-threshold allocation under `order`.
pub fn expected_welfare_cc(inst: &Instance, irsg: &Irsg, order: &[usize]) -> Result<f64> {
    check_order(order, inst.n())?;
    let law = phantom_price_law(inst, irsg)?;
    let outcomes: Vec<Vec<(usize, &[f64], f64)>> = (0..inst.n())
        .map(|i| bidder_score_outcomes(inst, irsg, i))
        .collect();
    let radix: Vec<usize> = outcomes.iter().map(Vec::len).collect();
    check_product(
        "score profiles",
        radix.iter().copied().chain([law.len()]),
        MAX_PROFILES,
    )?;
    let profiles: Vec<Vec<usize>> = odometer(&radix).collect();
    let terms: Vec<(f64, f64)> = profiles
        .par_iter()
        .map(|idx| {
            let mut prob = 1.0;
            let real: Vec<(usize, &[f64])> = idx
                .iter()
                .enumerate()
                .map(|(i, &o)| {
                    let (k, b, p) = outcomes[i][o];
                    prob *= p;
                    (k, b)
                })
                .collect();
            let w: f64 = law
                .iter()
                .map(|(pp, q)| q * correa_cristi_outcome(inst, order, &real, pp).welfare)
                .sum();
            (prob, w)
        })
        .collect();
    Ok(terms.iter().map(|(p, w)| p * w).sum())
}

/// Exact sides for the identity arrival order. `W_i` uses two independent
/// phantom threshold profiles `p'` and `p''`.
pub fn mirror_sides_exact(inst: &Instance, irsg: &Irsg) -> Result<MirrorSides> {
    let lhs = expected_welfare_cc(inst, irsg, &identity_order(inst.n()))?;
    let law = phantom_price_law(inst, irsg)?;
    let doubled = max_law(inst.m(), &[law.clone(), law])?;
    let mut rhs = 0.0;
    for i in 0..inst.n() {
        let outcomes = bidder_score_outcomes(inst, irsg, i);
        check_product(
            "score profiles",
            [outcomes.len(), doubled.len()],
            MAX_PROFILES,
        )?;
        for (k, b, p) in outcomes {
            let v = inst.table(i, k);
            let inner: f64 = doubled
                .iter()
                .map(|(f, q)| q * v.value(beating(b, f)))
                .sum();
            rhs += p * inner;
        }
    }
    Ok(MirrorSides {
        lhs,
        rhs: 0.5 * rhs,
    })
}

/// Monte Carlo estimates of both sides, identity order. Each sample draws
/// `p'`, then `p''`, then the real profile.
pub fn mirror_sides_mc(
    inst: &Instance,
    irsg: &Irsg,
    samples: u64,
    seed: u64,
) -> Result<MirrorEstimate> {
    irsg.check_aligned(inst)?;
    let order = identity_order(inst.n());
    let [lhs, rhs] = estimate(seed, samples, |rng| {
        let p1 = sample_phantom_prices(inst, irsg, rng);
        let p2 = sample_phantom_prices(inst, irsg, rng);
        let both: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a.max(*b)).collect();
        let mut real: Vec<(usize, &[f64])> = Vec::with_capacity(inst.n());
        for i in 0..inst.n() {
            let (k, _) = sample_valuation(inst.bidder(i), rng);
            real.push((k, irsg.generator(i, k).sample(rng)));
        }
        let alg = correa_cristi_outcome(inst, &order, &real, &p1).welfare;
        let w: f64 = real
            .iter()
            .enumerate()
            .map(|(i, &(k, b))| inst.table(i, k).value(beating(b, &both)))
            .sum();
        Ok([alg, 0.5 * w])
    })?;
    Ok(MirrorEstimate { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rsg::generator::{ScoreDistribution, ScoreEntry};
    use crate::valuations::ValuationSpec;

    fn unit_instance() -> Instance {
        Instance::deterministic(1, vec![ValuationSpec::Additive { weights: vec![1.0] }]).unwrap()
    }

    fn uniform_12(inst: &Instance) -> Irsg {
        Irsg::from_fn(inst, |_, _| {
            ScoreDistribution::new(
                1,
                vec![
                    ScoreEntry {
                        q: 0.5,
                        scores: vec![1.0],
                    },
                    ScoreEntry {
                        q: 0.5,
                        scores: vec![2.0],
                    },
                ],
            )
        })
        .unwrap()
    }

    #[test]
    fn uniform_scores_exact_sides() {
        let inst = unit_instance();
        let s = mirror_sides_exact(&inst, &uniform_12(&inst)).unwrap();
        assert_eq!(s.lhs, 0.25);
        assert_eq!(s.rhs, 1.0 / 16.0);
        assert!(s.holds());
    }

    #[test]
    fn degenerate_generators_give_zero() {
        let inst = unit_instance();
        let point = Irsg::from_fn(&inst, |_, _| ScoreDistribution::point(vec![3.0])).unwrap();
        for g in [point, Irsg::zeros(&inst)] {
            let s = mirror_sides_exact(&inst, &g).unwrap();
            assert_eq!((s.lhs, s.rhs), (0.0, 0.0));
            let e = mirror_sides_mc(&inst, &g, 1000, 3).unwrap();
            assert_eq!((e.lhs.mean, e.lhs.half_width), (0.0, 0.0));
        }
    }

    #[test]
    fn monte_carlo_matches_exact() {
        let inst = unit_instance();
        let g = uniform_12(&inst);
        let e = mirror_sides_mc(&inst, &g, 100_000, 11).unwrap();
        assert!((e.lhs.mean - 0.25).abs() < 0.01);
        assert!(e.lhs.within_sigmas(0.25, 4.0));
        assert!(e.rhs.within_sigmas(1.0 / 16.0, 4.0));
        assert_eq!(e, mirror_sides_mc(&inst, &g, 100_000, 11).unwrap());
    }
}
