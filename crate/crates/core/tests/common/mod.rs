//! Random instance generators and brute-force oracles shared by the
//! integration tests. Nothing here calls into the library's solvers.

#![allow(dead_code)]

use prophet_lab::rsg::{Irsg, ScoreDistribution, ScoreEntry};
use prophet_lab::valuations::{
    BidderDistribution, Instance, ItemSet, SupportEntry, ValuationSpec, ValueTable,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k` positive probabilities summing to one.
pub fn probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn weights(rng: &mut ChaCha8Rng, m: usize, hi: f64) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.0..hi)).collect()
}

pub fn xos(rng: &mut ChaCha8Rng, m: usize, max_clauses: usize) -> ValuationSpec {
    let k = rng.random_range(1..=max_clauses);
    ValuationSpec::Xos {
        clauses: (0..k).map(|_| weights(rng, m, 1.0)).collect(),
    }
}

/// A random monotone subadditive table, built by increasing set size:
/// `v(S)` is drawn between `max_j v(S∖j)` and `min v(A) + v(S∖A)`.
pub fn subadditive_table(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; 1 << m];
    let mut masks: Vec<u32> = (1..1u32 << m).collect();
    masks.sort_by_key(|s| s.count_ones());
    for s in masks {
        if s.count_ones() == 1 {
            v[s as usize] = rng.random_range(0.0..1.0);
            continue;
        }
        let lo = (0..m)
            .filter(|j| s >> j & 1 == 1)
            .map(|j| v[(s & !(1 << j)) as usize])
            .fold(0.0, f64::max);
        let mut hi = f64::INFINITY;
        let mut a = (s - 1) & s;
        while a > 0 {
            hi = f64::min(hi, v[a as usize] + v[(s & !a) as usize]);
            a = (a - 1) & s;
        }
        v[s as usize] = lo + rng.random_range(0.0..=1.0) * (hi - lo);
    }
    v
}

/// Any subadditive variant, table included.
pub fn subadditive_spec(rng: &mut ChaCha8Rng, m: usize) -> ValuationSpec {
    match rng.random_range(0..5) {
        0 => ValuationSpec::Additive {
            weights: weights(rng, m, 1.0),
        },
        1 => ValuationSpec::UnitDemand {
            weights: weights(rng, m, 1.0),
        },
        2 => xos(rng, m, 3),
        3 => ValuationSpec::SqrtAdditive {
            weights: weights(rng, m, 1.0),
        },
        _ => ValuationSpec::Table {
            values: subadditive_table(rng, m),
        },
    }
}

pub fn instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    max_support: usize,
    mut spec: impl FnMut(&mut ChaCha8Rng) -> ValuationSpec,
) -> Instance {
    let bidders = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=max_support);
            let q = probs(rng, k);
            let support = q
                .into_iter()
                .map(|q| SupportEntry {
                    q,
                    valuation: spec(rng),
                })
                .collect();
            BidderDistribution::new(support).expect("generated support is valid")
        })
        .collect();
    Instance::new(m, bidders).expect("generated instance is valid")
}

/// Scores on a quarter grid so ties with the thresholds are common.
pub fn irsg(rng: &mut ChaCha8Rng, inst: &Instance, max_support: usize) -> Irsg {
    let m = inst.m();
    Irsg::from_fn(inst, |_, _| {
        let k = rng.random_range(1..=max_support);
        let q = probs(rng, k);
        let entries = q
            .into_iter()
            .map(|q| ScoreEntry {
                q,
                scores: (0..m)
                    .map(|_| rng.random_range(0..=6) as f64 * 0.25)
                    .collect(),
            })
            .collect();
        ScoreDistribution::new(m, entries)
    })
    .expect("generated generator is valid")
}

/// Every profile of support indices with its probability, last bidder
/// fastest.
pub fn profiles(inst: &Instance) -> Vec<(Vec<usize>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for i in 0..inst.n() {
        let mut next = Vec::new();
        for (p, q) in &out {
            for k in 0..inst.support_len(i) {
                let mut p = p.clone();
                p.push(k);
                next.push((p, q * inst.q(i, k)));
            }
        }
        out = next;
    }
    out
}

/// Best welfare by recursion over items: each item goes to some bidder or
/// to nobody.
pub fn opt_recursive(tables: &[&ValueTable], m: usize) -> f64 {
    fn go(tables: &[&ValueTable], m: usize, item: usize, parts: &mut [ItemSet]) -> f64 {
        if item == m {
            return tables
                .iter()
                .zip(parts.iter())
                .map(|(v, &s)| v.values()[s.index()])
                .fold(0.0, |a, b| a + b);
        }
        let mut best = go(tables, m, item + 1, parts);
        for i in 0..parts.len() {
            parts[i] = parts[i].with(item);
            best = best.max(go(tables, m, item + 1, parts));
            parts[i] = parts[i].without(item);
        }
        best
    }
    go(tables, m, 0, &mut vec![ItemSet::EMPTY; tables.len()])
}

pub fn expected_opt(inst: &Instance) -> f64 {
    profiles(inst)
        .iter()
        .map(|(p, q)| q * opt_recursive(&inst.profile_tables(p), inst.m()))
        .sum()
}

pub fn expected_max_single(inst: &Instance) -> f64 {
    profiles(inst)
        .iter()
        .map(|(p, q)| {
            q * p
                .iter()
                .enumerate()
                .map(|(i, &k)| inst.valuation(i, k).eval(ItemSet::singleton(0)))
                .fold(0.0, f64::max)
        })
        .sum()
}

/// One bidder's joint draws: (probability, support index, scores).
fn draws<'a>(inst: &'a Instance, g: &'a Irsg, i: usize) -> Vec<(f64, usize, &'a [f64])> {
    let mut out = Vec::new();
    for k in 0..inst.support_len(i) {
        for e in g.generator(i, k).entries() {
            out.push((inst.q(i, k) * e.q, k, &e.scores[..]));
        }
    }
    out
}

/// A joint draw: probability and `(support index, scores)` per bidder.
type JointDraw<'a> = (f64, Vec<(usize, &'a [f64])>);

/// Every joint draw across bidders, last bidder fastest.
fn joint<'a>(inst: &'a Instance, g: &'a Irsg) -> Vec<JointDraw<'a>> {
    let mut out: Vec<JointDraw<'a>> = vec![(1.0, Vec::new())];
    for i in 0..inst.n() {
        let d = draws(inst, g, i);
        out = out
            .into_iter()
            .flat_map(|(q, v)| {
                d.iter().map(move |&(r, k, b)| {
                    let mut v = v.clone();
                    v.push((k, b));
                    (q * r, v)
                })
            })
            .collect();
    }
    out
}

fn phantom(inst: &Instance, draw: &[(usize, &[f64])]) -> Vec<f64> {
    let mut p = vec![0.0; inst.m()];
    for (_, b) in draw {
        for j in 0..p.len() {
            p[j] = f64::max(p[j], b[j]);
        }
    }
    p
}

/// Exact `E[ALG]` of the phantom-threshold rule in identity order, summing
/// over every phantom draw and every real draw.
pub fn mirror_lhs(inst: &Instance, g: &Irsg) -> f64 {
    let all = joint(inst, g);
    let mut total = 0.0;
    for (qp, ph) in &all {
        let p = phantom(inst, ph);
        for (qr, real) in &all {
            let mut left = ItemSet::full(inst.m());
            let mut w = 0.0;
            for (i, &(k, b)) in real.iter().enumerate() {
                let won =
                    ItemSet::from_items((0..inst.m()).filter(|&j| left.contains(j) && b[j] > p[j]));
                left = left.difference(won);
                w += inst.valuation(i, k).eval(won);
            }
            total += qp * qr * w;
        }
    }
    total
}

/// `½·Σ_i E[v_i({j : b_ij > max(p'_j, p''_j)})]` with two independent
/// phantom draws.
pub fn mirror_rhs(inst: &Instance, g: &Irsg) -> f64 {
    let all = joint(inst, g);
    let mut total = 0.0;
    for (q1, a) in &all {
        let p1 = phantom(inst, a);
        for (q2, b) in &all {
            let p2 = phantom(inst, b);
            for i in 0..inst.n() {
                for (r, k, s) in draws(inst, g, i) {
                    let w = ItemSet::from_items((0..inst.m()).filter(|&j| s[j] > p1[j].max(p2[j])));
                    total += q1 * q2 * r * inst.valuation(i, k).eval(w);
                }
            }
        }
    }
    0.5 * total
}

/// The two sides of the helper inequality for score vector `f` against
/// i.i.d. prices drawn from `law` (a list of `(vector, probability)`).
pub fn helper1_sides(
    v: &[f64],
    m: usize,
    f: &[f64],
    law: &[(Vec<f64>, f64)],
    eps: f64,
) -> (f64, f64) {
    let mut lhs = -f.iter().sum::<f64>();
    for (a, qa) in law {
        for (b, qb) in law {
            let won = (0..m)
                .filter(|&j| f[j] > a[j].max(b[j]))
                .fold(0u32, |s, j| s | 1 << j);
            lhs += qa * qb * v[won as usize];
        }
    }
    let mean: Vec<f64> = (0..m)
        .map(|j| law.iter().map(|(p, q)| q * p[j]).sum())
        .collect();
    let rhs = (0..1u32 << m)
        .map(|x| {
            v[x as usize] / 3.0
                - (0..m)
                    .filter(|j| x >> j & 1 == 1)
                    .map(|j| mean[j] + eps)
                    .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    (lhs, rhs)
}

/// `max_{p, λ} min_T LHS(T)` for a single item with `v({0}) = top`, on a
/// uniform grid of `steps + 1` points per axis. Returns
/// `(value, p, λ)` where `λ = δ_{0}`.
pub fn subgood_single_item(top: f64, steps: usize) -> (f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for a in 0..=steps {
        let p = top * a as f64 / steps as f64;
        for b in 0..=steps {
            let lam = b as f64 / steps as f64;
            // T = ∅: λ(v − p). T = {0}: p + λ(0 − p).
            let worst = f64::min(lam * (top - p), p - lam * p);
            if worst > best.0 {
                best = (worst, p, lam);
            }
        }
    }
    best
}

/// Writes one line to stderr without going through the test harness's
/// output capture.
pub fn announce(line: &str) {
    use std::io::Write;
    let mut e = std::io::stderr().lock();
    let _ = writeln!(e, "{line}");
}
