use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::valuations::ItemSet;

/// Static anonymous item prices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PriceVector(Vec<f64>);

impl PriceVector {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if let Some(p) = prices.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Parameter(format!(
                "price {p} is not finite and non-negative"
            )));
        }
        Ok(PriceVector(prices))
    }

    pub fn zeros(m: usize) -> Self {
        PriceVector(vec![0.0; m])
    }

    /// Every item at price `p`.
    pub fn uniform(m: usize, p: f64) -> Result<Self> {
        PriceVector::new(vec![p; m])
    }

    /// `p(S) = Σ_{j∈S} p_j`.
    pub fn price_of(&self, set: ItemSet) -> f64 {
        set.iter().map(|j| self.0[j]).fold(0.0, |a, b| a + b)
    }

    #[must_use]
    pub fn scaled(&self, factor: f64) -> Self {
        PriceVector(self.0.iter().map(|p| p * factor).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PriceVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for PriceVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        PriceVector::new(v)
    }
}

impl From<PriceVector> for Vec<f64> {
    fn from(p: PriceVector) -> Self {
        p.0
    }
}

/// A pricing rule `p_i(S)`: possibly bidder-specific, possibly non-additive.
pub trait PricingRule {
    fn set_price(&self, bidder: usize, set: ItemSet) -> f64;
}

impl PricingRule for PriceVector {
    fn set_price(&self, _bidder: usize, set: ItemSet) -> f64 {
        self.price_of(set)
    }
}

impl<F: Fn(usize, ItemSet) -> f64> PricingRule for F {
    fn set_price(&self, bidder: usize, set: ItemSet) -> f64 {
        self(bidder, set)
    }
}
