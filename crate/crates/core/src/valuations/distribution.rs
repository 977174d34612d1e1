use rand::Rng;
use serde::{Deserialize, Serialize};

use super::item_set::MAX_ITEMS;
use super::spec::{ValuationClass, ValuationSpec, ValueTable};
use crate::error::{Error, Result};

/// Probabilities must sum to one within this tolerance (plus a few ulps of
/// summation error) before they are renormalized.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Default cap on the number of valuation profiles an exact expectation may
/// enumerate.
pub const MAX_PROFILES: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub q: f64,
    pub valuation: ValuationSpec,
}

/// A finite-support distribution over one bidder's valuations.
///
/// Deserialization does not validate; [`Instance::new`] checks and
/// renormalizes every distribution it receives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BidderDistribution {
    support: Vec<SupportEntry>,
}

/// Renormalizes `probs` in place after checking they form a distribution.
pub(crate) fn normalize_probabilities(probs: &mut [f64]) -> Result<(), (Option<usize>, String)> {
    if probs.is_empty() {
        return Err((None, "empty support".into()));
    }
    if let Some(k) = probs.iter().position(|q| !q.is_finite() || *q <= 0.0) {
        return Err((Some(k), format!("probability {} is not positive", probs[k])));
    }
    let total: f64 = probs.iter().sum();
    let slack = PROBABILITY_TOLERANCE + 4.0 * probs.len() as f64 * f64::EPSILON;
    if (total - 1.0).abs() > slack {
        return Err((None, format!("probabilities sum to {total}, not 1")));
    }
    for q in probs.iter_mut() {
        *q /= total;
    }
    Ok(())
}

impl BidderDistribution {
    /// Validates probabilities and renormalizes them to sum to one. On
    /// failure returns the offending support index, if any, and a reason.
    pub fn new(mut support: Vec<SupportEntry>) -> Result<Self, (Option<usize>, String)> {
        let mut probs: Vec<f64> = support.iter().map(|e| e.q).collect();
        normalize_probabilities(&mut probs)?;
        for (e, q) in support.iter_mut().zip(probs) {
            e.q = q;
        }
        Ok(BidderDistribution { support })
    }

    /// Point mass on one valuation.
    pub fn deterministic(valuation: ValuationSpec) -> Self {
        BidderDistribution {
            support: vec![SupportEntry { q: 1.0, valuation }],
        }
    }

    pub fn support(&self) -> &[SupportEntry] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Draws a support index with the support probabilities. Consumes exactly one
/// uniform `f64` from `rng`, whatever the support size.
pub fn sample_index<R: Rng + ?Sized>(probs: impl IntoIterator<Item = f64>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, q) in probs.into_iter().enumerate() {
        acc += q;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// Draws one valuation from `d`.
pub fn sample_valuation<'a, R: Rng + ?Sized>(
    d: &'a BidderDistribution,
    rng: &mut R,
) -> (usize, &'a ValuationSpec) {
    let k = sample_index(d.support.iter().map(|e| e.q), rng);
    (k, &d.support[k].valuation)
}

/// `m` items and one valuation distribution per bidder.
///
/// Construction validates every support valuation (structure, item count,
/// normalization and monotonicity) and caches its value table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    m: usize,
    bidders: Vec<BidderDistribution>,
    tables: Vec<Vec<ValueTable>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawInstance {
    m: usize,
    bidders: Vec<BidderDistribution>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        Instance::new(raw.m, raw.bidders)
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance {
            m: inst.m,
            bidders: inst.bidders,
        }
    }
}

impl Instance {
    pub fn new(m: usize, bidders: Vec<BidderDistribution>) -> Result<Self> {
        if m == 0 || m > MAX_ITEMS {
            return Err(Error::InvalidShape(format!(
                "item count {m} outside 1..={MAX_ITEMS}"
            )));
        }
        if bidders.is_empty() {
            return Err(Error::InvalidShape("no bidders".into()));
        }
        let mut bidders = bidders;
        for (i, d) in bidders.iter_mut().enumerate() {
            let mut probs: Vec<f64> = d.support.iter().map(|e| e.q).collect();
            normalize_probabilities(&mut probs).map_err(|(support, reason)| {
                Error::InvalidInstance {
                    bidder: i,
                    support,
                    reason,
                }
            })?;
            for (e, q) in d.support.iter_mut().zip(probs) {
                e.q = q;
            }
        }
        let mut tables = Vec::with_capacity(bidders.len());
        for (i, d) in bidders.iter().enumerate() {
            let mut row = Vec::with_capacity(d.len());
            for (k, e) in d.support.iter().enumerate() {
                let invalid = |reason: String| Error::InvalidInstance {
                    bidder: i,
                    support: Some(k),
                    reason,
                };
                let table = e
                    .valuation
                    .tabulate()
                    .map_err(|err| invalid(err.to_string()))?;
                let items = table.values().len().trailing_zeros() as usize;
                if items != m {
                    return Err(invalid(format!(
                        "valuation over {items} items, instance has {m}"
                    )));
                }
                let check = table.check(ValuationClass::NormalizedMonotone);
                if let Some(w) = check.witness {
                    return Err(invalid(format!(
                        "not normalized and monotone: v({}) = {} exceeds v({}) = {}",
                        w.s, w.lhs, w.t, w.rhs
                    )));
                }
                row.push(table);
            }
            tables.push(row);
        }
        Ok(Instance { m, bidders, tables })
    }

    /// Every bidder's valuation is known in advance.
    pub fn deterministic(m: usize, valuations: Vec<ValuationSpec>) -> Result<Self> {
        Instance::new(
            m,
            valuations
                .into_iter()
                .map(BidderDistribution::deterministic)
                .collect(),
        )
    }

    /// Runs an additional class check on every support valuation.
    pub fn require_class(&self, class: ValuationClass) -> Result<()> {
        for (i, row) in self.tables.iter().enumerate() {
            for (k, t) in row.iter().enumerate() {
                let check = match class {
                    ValuationClass::XosConsistent => {
                        self.bidders[i].support[k].valuation.check_class(class)?
                    }
                    _ => t.check(class),
                };
                if !check.holds {
                    return Err(Error::InvalidInstance {
                        bidder: i,
                        support: Some(k),
                        reason: format!("valuation is not {class:?}: {:?}", check.witness),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.bidders.len()
    }

    pub fn bidders(&self) -> &[BidderDistribution] {
        &self.bidders
    }

    pub fn bidder(&self, i: usize) -> &BidderDistribution {
        &self.bidders[i]
    }

    pub fn support_len(&self, i: usize) -> usize {
        self.bidders[i].len()
    }

    pub fn q(&self, i: usize, k: usize) -> f64 {
        self.bidders[i].support[k].q
    }

    pub fn valuation(&self, i: usize, k: usize) -> &ValuationSpec {
        &self.bidders[i].support[k].valuation
    }

    pub fn table(&self, i: usize, k: usize) -> &ValueTable {
        &self.tables[i][k]
    }

    /// Largest `v(M)` over every support valuation of every bidder.
    pub fn v_max(&self) -> f64 {
        self.tables
            .iter()
            .flatten()
            .map(ValueTable::grand)
            .fold(0.0, f64::max)
    }

    /// Number of valuation profiles, saturating.
    pub fn profile_count(&self) -> u128 {
        self.bidders
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
    }

    /// Errors when the profile count exceeds `limit`.
    pub fn require_profiles(&self, limit: u128) -> Result<u128> {
        let count = self.profile_count();
        if count > limit {
            return Err(Error::capacity("valuation profiles", count, limit));
        }
        Ok(count)
    }

    /// Every valuation profile, as support indices with its probability.
    /// Order: last bidder varies fastest.
    pub fn profiles(&self) -> Profiles<'_> {
        Profiles {
            radix: self.bidders.iter().map(BidderDistribution::len).collect(),
            inst: self,
            next: Some(vec![0; self.n()]),
        }
    }

    /// Value tables for one profile.
    pub fn profile_tables(&self, indices: &[usize]) -> Vec<&ValueTable> {
        indices
            .iter()
            .enumerate()
            .map(|(i, &k)| &self.tables[i][k])
            .collect()
    }

    pub fn profile_probability(&self, indices: &[usize]) -> f64 {
        indices
            .iter()
            .enumerate()
            .map(|(i, &k)| self.q(i, k))
            .product()
    }

    /// Draws one support index per bidder, in bidder order.
    pub fn sample_profile<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.bidders
            .iter()
            .map(|d| sample_valuation(d, rng).0)
            .collect()
    }
}

/// Mixed-radix odometer over support indices.
pub struct Profiles<'a> {
    inst: &'a Instance,
    radix: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Profiles<'_> {
    type Item = (Vec<usize>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut pos = succ.len();
        let advanced = loop {
            if pos == 0 {
                break false;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.radix[pos] {
                break true;
            }
            succ[pos] = 0;
        };
        if advanced {
            self.next = Some(succ);
        }
        let p = self.inst.profile_probability(&cur);
        Some((cur, p))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::valuations::{ItemSet, SetFunction};

    fn entry(q: f64, w: f64) -> SupportEntry {
        SupportEntry {
            q,
            valuation: ValuationSpec::Additive { weights: vec![w] },
        }
    }

    #[test]
    fn probabilities_within_tolerance_are_renormalized() {
        let d = BidderDistribution::new(vec![entry(0.5, 1.0), entry(0.499999999999, 2.0)]).unwrap();
        let total: f64 = d.support().iter().map(|e| e.q).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(BidderDistribution::new(vec![entry(0.5, 1.0), entry(0.4999, 2.0)]).is_err());
        assert!(BidderDistribution::new(vec![entry(1.0, 1.0), entry(0.0, 2.0)]).is_err());
        assert!(BidderDistribution::new(vec![]).is_err());
    }

    #[test]
    fn point_mass_always_index_zero_and_consumes_one_draw() {
        let d = BidderDistribution::deterministic(ValuationSpec::Additive { weights: vec![1.0] });
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            assert_eq!(sample_valuation(&d, &mut a).0, 0);
            let _: f64 = b.random();
        }
        let x: u64 = a.random();
        let y: u64 = b.random();
        assert_eq!(x, y);
    }

    #[test]
    fn fair_coin_frequency() {
        let d = BidderDistribution::new(vec![entry(0.5, 1.0), entry(0.5, 2.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let ones = (0..draws)
            .filter(|_| sample_valuation(&d, &mut rng).0 == 1)
            .count();
        let freq = ones as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    #[test]
    fn instance_validation_names_the_bidder() {
        let bad = BidderDistribution::deterministic(ValuationSpec::Table {
            values: vec![0.0, 2.0, 1.0, 1.0],
        });
        let good = BidderDistribution::deterministic(ValuationSpec::Additive {
            weights: vec![1.0, 1.0],
        });
        match Instance::new(2, vec![good.clone(), bad]) {
            Err(Error::InvalidInstance {
                bidder, support, ..
            }) => {
                assert_eq!((bidder, support), (1, Some(0)))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Instance::new(3, vec![good.clone()]),
            Err(Error::InvalidInstance { bidder: 0, .. })
        ));
        assert!(Instance::new(0, vec![good.clone()]).is_err());
        assert!(Instance::new(17, vec![good]).is_err());
        assert!(Instance::new(2, vec![]).is_err());
    }

    #[test]
    fn profile_odometer() {
        let inst = Instance::new(
            1,
            vec![
                BidderDistribution::new(vec![entry(0.25, 1.0), entry(0.75, 2.0)]).unwrap(),
                BidderDistribution::deterministic(ValuationSpec::Additive { weights: vec![3.0] }),
                BidderDistribution::new(vec![entry(0.5, 1.0), entry(0.5, 0.0)]).unwrap(),
            ],
        )
        .unwrap();
        let all: Vec<_> = inst.profiles().collect();
        assert_eq!(inst.profile_count(), 4);
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].0, vec![0, 0, 0]);
        assert_eq!(all[1].0, vec![0, 0, 1]);
        assert_eq!(all[3].0, vec![1, 0, 1]);
        let total: f64 = all.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(inst.v_max(), 3.0);
        assert_eq!(inst.table(0, 1).value(ItemSet::full(1)), 2.0);
    }
}
