//! Feasible allocations, welfare, exact welfare maximization and buyer
//! demand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::profile_expectation;
use crate::valuations::{Instance, ItemSet, SetFunction, ValueTable, MAX_PROFILES};

/// Cap on `(n+1)^|available|` assignment vectors for exact optimization.
pub const MAX_ASSIGNMENTS: u128 = 10_000_000;

/// One item set per bidder.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub parts: Vec<ItemSet>,
}

impl Allocation {
    /// Everyone receives nothing.
    pub fn empty(n: usize) -> Self {
        Allocation {
            parts: vec![ItemSet::EMPTY; n],
        }
    }

    pub fn new(parts: Vec<ItemSet>) -> Self {
        Allocation { parts }
    }

    /// Parts are pairwise disjoint.
    pub fn is_feasible(&self) -> bool {
        let mut seen = ItemSet::EMPTY;
        for &p in &self.parts {
            if !p.is_disjoint(seen) {
                return false;
            }
            seen = seen.union(p);
        }
        true
    }

    /// Union of all parts.
    pub fn allocated(&self) -> ItemSet {
        self.parts
            .iter()
            .fold(ItemSet::EMPTY, |acc, &p| acc.union(p))
    }

    /// Builds the allocation encoded by an owner per item (`None` keeps the
    /// item unallocated).
    pub fn from_owners(n: usize, owners: &[Option<usize>]) -> Self {
        let mut parts = vec![ItemSet::EMPTY; n];
        for (j, owner) in owners.iter().enumerate() {
            if let Some(i) = owner {
                parts[*i] = parts[*i].with(j);
            }
        }
        Allocation { parts }
    }
}

/// One realized valuation per bidder.
#[derive(Clone, Debug)]
pub struct Profile<'a> {
    vals: Vec<&'a ValueTable>,
}

impl<'a> Profile<'a> {
    pub fn new(vals: Vec<&'a ValueTable>) -> Self {
        Profile { vals }
    }

    pub fn from_tables(tables: &'a [ValueTable]) -> Self {
        Profile {
            vals: tables.iter().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.vals.len()
    }

    pub fn m(&self) -> usize {
        self.vals.first().map_or(0, |v| v.items())
    }

    pub fn valuation(&self, i: usize) -> &'a ValueTable {
        self.vals[i]
    }

    pub fn valuations(&self) -> &[&'a ValueTable] {
        &self.vals
    }

    fn sum_values(&self, parts: &[ItemSet]) -> f64 {
        self.vals
            .iter()
            .zip(parts)
            .map(|(v, &s)| v.value(s))
            .fold(0.0, |a, b| a + b)
    }
}

/// `Σ_i v_i(x_i)`.
pub fn welfare(profile: &Profile<'_>, x: &Allocation) -> Result<f64> {
    if x.parts.len() != profile.n() {
        return Err(Error::Infeasible(format!(
            "{} parts for {} bidders",
            x.parts.len(),
            profile.n()
        )));
    }
    if !x.is_feasible() {
        return Err(Error::Infeasible(format!(
            "overlapping parts {:?}",
            x.parts
        )));
    }
    let m = profile.m();
    if let Some(p) = x.parts.iter().find(|p| !p.fits(m)) {
        return Err(Error::Infeasible(format!(
            "part {p} uses items outside 0..{m}"
        )));
    }
    Ok(profile.sum_values(&x.parts))
}

/// Welfare-maximizing allocation over all items.
pub fn optimal_allocation(profile: &Profile<'_>) -> Result<(Allocation, f64)> {
    optimal_allocation_within(profile, ItemSet::full(profile.m()))
}

/// Welfare-maximizing allocation using only items in `available`.
///
/// Enumerates every assignment of each available item to a bidder or to
/// nobody. Ties go to the lexicographically smallest owner vector over the
/// available items in ascending order, with "nobody" ordered first.
pub fn optimal_allocation_within(
    profile: &Profile<'_>,
    available: ItemSet,
) -> Result<(Allocation, f64)> {
    let n = profile.n();
    let items: Vec<usize> = available.iter().collect();
    let count = (n as u128 + 1).saturating_pow(items.len() as u32);
    if count > MAX_ASSIGNMENTS {
        return Err(Error::capacity(
            "allocation enumeration",
            count,
            MAX_ASSIGNMENTS,
        ));
    }

    // owner[k] == 0 means nobody, otherwise bidder owner[k] - 1.
    let mut owner = vec![0usize; items.len()];
    let mut parts = vec![ItemSet::EMPTY; n];
    let mut best_parts = parts.clone();
    let mut best = profile.sum_values(&parts);
    loop {
        let mut pos = items.len();
        let advanced = loop {
            if pos == 0 {
                break false;
            }
            pos -= 1;
            let j = items[pos];
            if owner[pos] > 0 {
                parts[owner[pos] - 1] = parts[owner[pos] - 1].without(j);
            }
            owner[pos] += 1;
            if owner[pos] <= n {
                parts[owner[pos] - 1] = parts[owner[pos] - 1].with(j);
                break true;
            }
            owner[pos] = 0;
        };
        if !advanced {
            break;
        }
        let w = profile.sum_values(&parts);
        if w > best {
            best = w;
            best_parts.copy_from_slice(&parts);
        }
    }
    Ok((Allocation::new(best_parts), best))
}

/// Exact `E[OPT]` over every valuation profile of `inst`.
pub fn expected_optimal_welfare(inst: &Instance) -> Result<f64> {
    let [e] = profile_expectation(inst, MAX_PROFILES, |profile| {
        Ok([optimal_allocation(&Profile::new(inst.profile_tables(profile)))?.1])
    })?;
    Ok(e)
}

/// Every feasible allocation of items in `available` to `n` bidders, as the
/// owner-vector odometer of [`optimal_allocation_within`] visits them.
pub fn feasible_allocations(n: usize, available: ItemSet) -> Result<FeasibleAllocations> {
    let items: Vec<usize> = available.iter().collect();
    let count = (n as u128 + 1).saturating_pow(items.len() as u32);
    if count > MAX_ASSIGNMENTS {
        return Err(Error::capacity(
            "allocation enumeration",
            count,
            MAX_ASSIGNMENTS,
        ));
    }
    Ok(FeasibleAllocations {
        n,
        owner: vec![0; items.len()],
        items,
        done: false,
    })
}

pub struct FeasibleAllocations {
    n: usize,
    items: Vec<usize>,
    owner: Vec<usize>,
    done: bool,
}

impl Iterator for FeasibleAllocations {
    type Item = Allocation;

    fn next(&mut self) -> Option<Allocation> {
        if self.done {
            return None;
        }
        let mut parts = vec![ItemSet::EMPTY; self.n];
        for (k, &j) in self.items.iter().enumerate() {
            if self.owner[k] > 0 {
                parts[self.owner[k] - 1] = parts[self.owner[k] - 1].with(j);
            }
        }
        let mut pos = self.items.len();
        self.done = loop {
            if pos == 0 {
                break true;
            }
            pos -= 1;
            self.owner[pos] += 1;
            if self.owner[pos] <= self.n {
                break false;
            }
            self.owner[pos] = 0;
        };
        Some(Allocation::new(parts))
    }
}

/// A utility-maximizing purchase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    pub set: ItemSet,
    pub utility: f64,
}

/// `argmax_{T ⊆ available} v(T) − p(T)`.
///
/// Ties prefer fewer items, then the smaller bitmask, so the empty set wins
/// any tie at utility zero.
pub fn demand_set<V: SetFunction + ?Sized>(v: &V, prices: &[f64], available: ItemSet) -> Demand {
    let mut best = Demand {
        set: ItemSet::EMPTY,
        utility: v.value(ItemSet::EMPTY),
    };
    for t in available.subsets().skip(1) {
        let cost: f64 = t.iter().map(|j| prices[j]).sum();
        let u = v.value(t) - cost;
        if u > best.utility || (u == best.utility && t.len() < best.set.len()) {
            best = Demand { set: t, utility: u };
        }
    }
    best
}
