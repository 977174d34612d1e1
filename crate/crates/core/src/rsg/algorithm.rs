use std::collections::BTreeMap;

use rand::Rng;

use super::generator::Irsg;
use crate::error::{Error, Result};
use crate::mechanisms::{check_order, MechanismTrace, Purchase};
use crate::valuations::{sample_valuation, Instance, ItemSet, SetFunction, MAX_PROFILES};

/// A finite law over score vectors, sorted by vector.
pub type ScoreLaw = Vec<(Vec<f64>, f64)>;

fn key(v: &[f64]) -> Vec<u64> {
    // Scores are non-negative with -0.0 folded, so bit order is value order.
    v.iter().map(|x| x.to_bits()).collect()
}

fn unkey(k: &[u64]) -> Vec<f64> {
    k.iter().map(|b| f64::from_bits(*b)).collect()
}

/// Law of the coordinatewise maximum of independent score vectors, one law
/// per factor. The empty product is the point mass on the zero vector.
pub fn max_law(m: usize, factors: &[ScoreLaw]) -> Result<ScoreLaw> {
    let mut law: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    law.insert(key(&vec![0.0; m]), 1.0);
    for f in factors {
        let size = (law.len() as u128) * (f.len() as u128);
        if size > MAX_PROFILES {
            return Err(Error::capacity("score profiles", size, MAX_PROFILES));
        }
        let mut next: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (a, pa) in &law {
            for (b, pb) in f {
                let k: Vec<u64> = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| f64::from_bits(*x).max(*y).to_bits())
                    .collect();
                *next.entry(k).or_insert(0.0) += pa * pb;
            }
        }
        law = next;
    }
    Ok(law.into_iter().map(|(k, p)| (unkey(&k), p)).collect())
}

/// Joint law of `(support index, score vector)` for bidder `i`, flattened
/// as `(k, scores, probability)`.
pub fn bidder_score_outcomes<'a>(
    inst: &Instance,
    irsg: &'a Irsg,
    i: usize,
) -> Vec<(usize, &'a [f64], f64)> {
    (0..inst.support_len(i))
        .flat_map(|k| {
            let q = inst.q(i, k);
            irsg.generator(i, k)
                .entries()
                .iter()
                .map(move |e| (k, e.scores.as_slice(), q * e.q))
        })
        .collect()
}

/// Marginal score law of bidder `i` (valuation drawn, then scores).
pub fn bidder_score_law(inst: &Instance, irsg: &Irsg, i: usize) -> ScoreLaw {
    let mut law: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    for (_, b, p) in bidder_score_outcomes(inst, irsg, i) {
        *law.entry(key(b)).or_insert(0.0) += p;
    }
    law.into_iter().map(|(k, p)| (unkey(&k), p)).collect()
}

/// Exact law of the phantom thresholds `p'_j = max_i b'_{i,j}`.
pub fn phantom_price_law(inst: &Instance, irsg: &Irsg) -> Result<ScoreLaw> {
    irsg.check_aligned(inst)?;
    let factors: Vec<ScoreLaw> = (0..inst.n())
        .map(|i| bidder_score_law(inst, irsg, i))
        .collect();
    max_law(inst.m(), &factors)
}

/// Items whose score strictly beats the threshold.
pub fn beating(scores: &[f64], threshold: &[f64]) -> ItemSet {
    ItemSet::from_items((0..scores.len()).filter(|&j| scores[j] > threshold[j]))
}

/// Runs the allocation on fixed draws. `real[i] = (support index, scores)`.
/// Payments are zero, so utility equals value.
pub fn correa_cristi_outcome(
    inst: &Instance,
    order: &[usize],
    real: &[(usize, &[f64])],
    phantom: &[f64],
) -> MechanismTrace {
    let mut remaining = ItemSet::full(inst.m());
    let mut purchases = Vec::with_capacity(order.len());
    for &i in order {
        let (k, b) = real[i];
        let set = remaining.intersection(beating(b, phantom));
        remaining = remaining.difference(set);
        let value = inst.table(i, k).value(set);
        purchases.push(Purchase {
            bidder: i,
            support_index: k,
            set,
            value,
            payment: 0.0,
            utility: value,
            scores: Some(b.to_vec()),
        });
    }
    MechanismTrace::from_purchases(order.to_vec(), purchases, Some(phantom.to_vec()))
}

/// Draws the phantom profile `(v'_i, b'_i)` for every bidder in index order
/// and returns `p'`.
pub fn sample_phantom_prices<R: Rng + ?Sized>(
    inst: &Instance,
    irsg: &Irsg,
    rng: &mut R,
) -> Vec<f64> {
    let mut p = vec![0.0; inst.m()];
    for i in 0..inst.n() {
        let (k, _) = sample_valuation(inst.bidder(i), rng);
        for (pj, b) in p.iter_mut().zip(irsg.generator(i, k).sample(rng)) {
            *pj = f64::max(*pj, *b);
        }
    }
    p
}

/// One run: phantom draws first, then each bidder in `order` reveals `v_i`,
/// draws `b_i ∼ S_i(v_i)` and takes `R_i ∩ {j : b_{i,j} > p'_j}`.
pub fn run_correa_cristi<R: Rng + ?Sized>(
    inst: &Instance,
    irsg: &Irsg,
    order: &[usize],
    rng: &mut R,
) -> Result<MechanismTrace> {
    irsg.check_aligned(inst)?;
    check_order(order, inst.n())?;
    let phantom = sample_phantom_prices(inst, irsg, rng);
    let mut real: Vec<(usize, &[f64])> = vec![(0, &[][..]); inst.n()];
    for &i in order {
        let (k, _) = sample_valuation(inst.bidder(i), rng);
        real[i] = (k, irsg.generator(i, k).sample(rng));
    }
    Ok(correa_cristi_outcome(inst, order, &real, &phantom))
}
