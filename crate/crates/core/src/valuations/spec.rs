use serde::{Deserialize, Serialize};

use super::item_set::{ItemSet, MAX_ITEMS};
use crate::error::{Error, Result};

/// Absolute-plus-relative tolerance used by the class checkers.
pub(crate) fn tolerance(a: f64, b: f64) -> f64 {
    1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Anything that assigns a value to every subset of `{0, .., m-1}`.
pub trait SetFunction {
    fn items(&self) -> usize;
    fn value(&self, set: ItemSet) -> f64;
}

/// A valuation function over `m` items.
///
/// The JSON form is internally tagged on `"type"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ValuationSpec {
    /// `v(S) = sum of w_j over S`.
    Additive { weights: Vec<f64> },
    /// `v(S) = max of w_j over S`.
    UnitDemand { weights: Vec<f64> },
    /// `v(S) = max over clauses a of a(S)`.
    Xos { clauses: Vec<Vec<f64>> },
    /// `v(S) = sqrt(sum of w_j over S)`.
    SqrtAdditive { weights: Vec<f64> },
    /// Explicit `2^m` values indexed by bitmask.
    Table { values: Vec<f64> },
}

fn check_weights(what: &str, w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::MalformedSpec(format!("{what} is empty")));
    }
    if w.len() > MAX_ITEMS {
        return Err(Error::MalformedSpec(format!(
            "{what} has {} entries, more than {MAX_ITEMS} items",
            w.len()
        )));
    }
    if let Some(x) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::MalformedSpec(format!(
            "{what} contains {x}; entries must be finite and non-negative"
        )));
    }
    Ok(())
}

impl ValuationSpec {
    pub fn variant_name(&self) -> &'static str {
        match self {
            ValuationSpec::Additive { .. } => "additive",
            ValuationSpec::UnitDemand { .. } => "unit_demand",
            ValuationSpec::Xos { .. } => "xos",
            ValuationSpec::SqrtAdditive { .. } => "sqrt_additive",
            ValuationSpec::Table { .. } => "table",
        }
    }

    /// Checks structure and value ranges, returning the item count.
    pub fn validate(&self) -> Result<usize> {
        match self {
            ValuationSpec::Additive { weights }
            | ValuationSpec::UnitDemand { weights }
            | ValuationSpec::SqrtAdditive { weights } => {
                check_weights("weights", weights)?;
                Ok(weights.len())
            }
            ValuationSpec::Xos { clauses } => {
                let first = clauses
                    .first()
                    .ok_or_else(|| Error::MalformedSpec("xos valuation has no clauses".into()))?;
                for (k, c) in clauses.iter().enumerate() {
                    check_weights(&format!("clause {k}"), c)?;
                    if c.len() != first.len() {
                        return Err(Error::MalformedSpec(format!(
                            "clause {k} has {} weights, clause 0 has {}",
                            c.len(),
                            first.len()
                        )));
                    }
                }
                Ok(first.len())
            }
            ValuationSpec::Table { values } => {
                let len = values.len();
                if len < 2 || !len.is_power_of_two() || len > 1 << MAX_ITEMS {
                    return Err(Error::MalformedSpec(format!(
                        "table has {len} entries; expected 2^m for 1 <= m <= {MAX_ITEMS}"
                    )));
                }
                if let Some(x) = values.iter().find(|x| !x.is_finite() || **x < 0.0) {
                    return Err(Error::MalformedSpec(format!(
                        "table contains {x}; values must be finite and non-negative"
                    )));
                }
                Ok(len.trailing_zeros() as usize)
            }
        }
    }

    /// Item count, assuming a structurally valid spec.
    pub fn item_count(&self) -> usize {
        match self {
            ValuationSpec::Additive { weights }
            | ValuationSpec::UnitDemand { weights }
            | ValuationSpec::SqrtAdditive { weights } => weights.len(),
            ValuationSpec::Xos { clauses } => clauses.first().map_or(0, Vec::len),
            ValuationSpec::Table { values } => values.len().trailing_zeros() as usize,
        }
    }

    /// `v(S)`. The valuation must be valid and `S` must fit its item count.
    pub fn eval(&self, set: ItemSet) -> f64 {
        match self {
            // Folding from +0.0 keeps v(∅) from printing as -0.
            ValuationSpec::Additive { weights } => {
                set.iter().map(|j| weights[j]).fold(0.0, |a, b| a + b)
            }
            ValuationSpec::UnitDemand { weights } => {
                set.iter().map(|j| weights[j]).fold(0.0, f64::max)
            }
            ValuationSpec::Xos { clauses } => clauses
                .iter()
                .map(|c| clause_value(c, set))
                .fold(0.0, f64::max),
            ValuationSpec::SqrtAdditive { weights } => set
                .iter()
                .map(|j| weights[j])
                .fold(0.0, |a, b| a + b)
                .sqrt(),
            ValuationSpec::Table { values } => values[set.index()],
        }
    }

    /// Validating form of [`eval`](Self::eval).
    pub fn checked_eval(&self, set: ItemSet) -> Result<f64> {
        let m = self.validate()?;
        if !set.fits(m) {
            return Err(Error::MalformedSpec(format!(
                "set {set} refers to items outside 0..{m}"
            )));
        }
        Ok(self.eval(set))
    }

    /// All `2^m` values, indexed by bitmask.
    pub fn tabulate(&self) -> Result<ValueTable> {
        let m = self.validate()?;
        let values = match self {
            ValuationSpec::Table { values } => values.clone(),
            _ => ItemSet::full(m).subsets().map(|s| self.eval(s)).collect(),
        };
        Ok(ValueTable { m, values })
    }

    /// Additive clauses whose pointwise maximum is this valuation, for the
    /// variants that carry them explicitly.
    pub fn xos_clauses(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            ValuationSpec::Additive { weights } => Some(vec![weights.clone()]),
            ValuationSpec::UnitDemand { weights } => Some(
                (0..weights.len())
                    .map(|j| {
                        let mut c = vec![0.0; weights.len()];
                        c[j] = weights[j];
                        c
                    })
                    .collect(),
            ),
            ValuationSpec::Xos { clauses } => Some(clauses.clone()),
            _ => None,
        }
    }

    /// Smallest clause index attaining `v(S)`.
    pub fn supporting_clause(&self, set: ItemSet) -> Result<usize> {
        match self {
            ValuationSpec::Xos { clauses } => {
                self.validate()?;
                Ok(argmax_clause(clauses, set))
            }
            other => Err(Error::WrongVariant {
                expected: "xos",
                found: other.variant_name(),
            }),
        }
    }

    /// Runs a class checker by full enumeration of the value table.
    ///
    /// `XosConsistent` compares against [`xos_clauses`](Self::xos_clauses);
    /// variants without explicit clauses are rejected.
    pub fn check_class(&self, class: ValuationClass) -> Result<ClassCheck> {
        let table = self.tabulate()?;
        match class {
            ValuationClass::XosConsistent => {
                let clauses = self.xos_clauses().ok_or_else(|| Error::WrongVariant {
                    expected: "additive, unit_demand or xos",
                    found: self.variant_name(),
                })?;
                Ok(table.check_xos_clauses(&clauses))
            }
            other => Ok(table.check(other)),
        }
    }
}

impl SetFunction for ValuationSpec {
    fn items(&self) -> usize {
        self.item_count()
    }

    fn value(&self, set: ItemSet) -> f64 {
        self.eval(set)
    }
}

pub(crate) fn clause_value(clause: &[f64], set: ItemSet) -> f64 {
    set.iter().map(|j| clause[j]).fold(0.0, |a, b| a + b)
}

pub(crate) fn argmax_clause(clauses: &[Vec<f64>], set: ItemSet) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (k, c) in clauses.iter().enumerate() {
        let value = clause_value(c, set);
        if value > best_value {
            best = k;
            best_value = value;
        }
    }
    best
}

/// A valuation materialized as its `2^m` values.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    m: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        ValuationSpec::Table { values }.tabulate()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `v(M)`.
    pub fn grand(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn check(&self, class: ValuationClass) -> ClassCheck {
        let witness = match class {
            ValuationClass::NormalizedMonotone => self.normalized_monotone_violation(),
            ValuationClass::Submodular => self.submodular_violation(),
            ValuationClass::Subadditive => self.subadditive_violation(),
            ValuationClass::XosConsistent => {
                // A bare table carries no clauses to compare against.
                return ClassCheck {
                    class,
                    holds: false,
                    witness: None,
                };
            }
        };
        ClassCheck {
            class,
            holds: witness.is_none(),
            witness,
        }
    }

    /// True iff `v(S) = max_k a_k(S)` for every `S` and every clause is
    /// non-negative with the right length.
    pub fn check_xos_clauses(&self, clauses: &[Vec<f64>]) -> ClassCheck {
        let class = ValuationClass::XosConsistent;
        let malformed = clauses.is_empty()
            || clauses
                .iter()
                .any(|c| c.len() != self.m || c.iter().any(|x| !x.is_finite() || *x < 0.0));
        if malformed {
            return ClassCheck {
                class,
                holds: false,
                witness: None,
            };
        }
        for s in ItemSet::full(self.m).subsets() {
            let k = argmax_clause(clauses, s);
            let best = clause_value(&clauses[k], s);
            let v = self.value(s);
            if (v - best).abs() > tolerance(v, best) {
                return ClassCheck {
                    class,
                    holds: false,
                    witness: Some(Violation {
                        s,
                        t: ItemSet::EMPTY,
                        item: Some(k),
                        lhs: v,
                        rhs: best,
                    }),
                };
            }
        }
        ClassCheck {
            class,
            holds: true,
            witness: None,
        }
    }

    fn normalized_monotone_violation(&self) -> Option<Violation> {
        let empty = self.values[0];
        if empty.abs() > tolerance(empty, 0.0) {
            return Some(Violation {
                s: ItemSet::EMPTY,
                t: ItemSet::EMPTY,
                item: None,
                lhs: empty,
                rhs: 0.0,
            });
        }
        // Single-item extensions cover every S ⊆ T by transitivity.
        for s in ItemSet::full(self.m).subsets() {
            for j in (0..self.m).filter(|&j| !s.contains(j)) {
                let t = s.with(j);
                let (vs, vt) = (self.value(s), self.value(t));
                if vs > vt + tolerance(vs, vt) {
                    return Some(Violation {
                        s,
                        t,
                        item: Some(j),
                        lhs: vs,
                        rhs: vt,
                    });
                }
            }
        }
        None
    }

    fn submodular_violation(&self) -> Option<Violation> {
        // Local form: v(S+i) + v(S+j) >= v(S+i+j) + v(S), equivalent to
        // decreasing marginals over all S ⊆ T.
        for s in ItemSet::full(self.m).subsets() {
            for i in (0..self.m).filter(|&i| !s.contains(i)) {
                let t = s.with(i);
                for j in (i + 1..self.m).filter(|&j| !s.contains(j)) {
                    let small = self.value(s.with(j)) - self.value(s);
                    let large = self.value(t.with(j)) - self.value(t);
                    if large > small + tolerance(large, small) {
                        return Some(Violation {
                            s,
                            t,
                            item: Some(j),
                            lhs: large,
                            rhs: small,
                        });
                    }
                }
            }
        }
        None
    }

    fn subadditive_violation(&self) -> Option<Violation> {
        let full = ItemSet::full(self.m);
        // Overlapping pairs reduce to disjoint ones when v is monotone.
        let disjoint_only = self.normalized_monotone_violation().is_none();
        for s in full.subsets() {
            let others = if disjoint_only {
                full.difference(s)
            } else {
                full
            };
            for t in others.subsets() {
                let lhs = self.value(s.union(t));
                let rhs = self.value(s) + self.value(t);
                if lhs > rhs + tolerance(lhs, rhs) {
                    return Some(Violation {
                        s,
                        t,
                        item: None,
                        lhs,
                        rhs,
                    });
                }
            }
        }
        None
    }
}

impl SetFunction for ValueTable {
    fn items(&self) -> usize {
        self.m
    }

    fn value(&self, set: ItemSet) -> f64 {
        self.values[set.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationClass {
    NormalizedMonotone,
    Submodular,
    XosConsistent,
    Subadditive,
}

/// A counterexample to a class inequality.
///
/// Interpretation of the fields by class (the violated inequality is always
/// `lhs <= rhs`):
/// - normalized/monotone: `v(s) <= v(t)` with `t = s + item`, or `v(∅) <= 0`;
/// - submodular: marginal of `item` at `t` vs at `s`;
/// - subadditive: `v(s ∪ t)` vs `v(s) + v(t)`;
/// - xos: `v(s)` vs the best clause `item` (compared for equality).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub s: ItemSet,
    pub t: ItemSet,
    pub item: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCheck {
    pub class: ValuationClass,
    pub holds: bool,
    pub witness: Option<Violation>,
}
