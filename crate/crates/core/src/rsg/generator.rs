use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::valuations::{normalize_probabilities, sample_index, Instance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub q: f64,
    pub scores: Vec<f64>,
}

/// A finite distribution over per-item score vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreDistribution {
    entries: Vec<ScoreEntry>,
}

impl ScoreDistribution {
    /// Validates scores (finite, non-negative, length `m`) and renormalizes
    /// probabilities.
    pub fn new(m: usize, mut entries: Vec<ScoreEntry>) -> Result<Self> {
        let mut probs: Vec<f64> = entries.iter().map(|e| e.q).collect();
        normalize_probabilities(&mut probs).map_err(|(k, reason)| {
            Error::MalformedSpec(match k {
                Some(k) => format!("score entry {k}: {reason}"),
                None => format!("score distribution: {reason}"),
            })
        })?;
        for (k, (e, q)) in entries.iter_mut().zip(probs).enumerate() {
            if e.scores.len() != m {
                return Err(Error::Alignment(format!(
                    "score entry {k} has {} scores for {m} items",
                    e.scores.len()
                )));
            }
            if let Some(b) = e.scores.iter().find(|b| !b.is_finite() || **b < 0.0) {
                return Err(Error::MalformedSpec(format!(
                    "score entry {k}: score {b} is not finite and non-negative"
                )));
            }
            for b in e.scores.iter_mut() {
                // Fold -0.0 into 0.0 so bit patterns order like values.
                *b += 0.0;
            }
            e.q = q;
        }
        Ok(ScoreDistribution { entries })
    }

    pub fn point(scores: Vec<f64>) -> Result<Self> {
        let m = scores.len();
        ScoreDistribution::new(m, vec![ScoreEntry { q: 1.0, scores }])
    }

    pub fn entries(&self) -> &[ScoreEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Consumes exactly one uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &[f64] {
        let k = sample_index(self.entries.iter().map(|e| e.q), rng);
        &self.entries[k].scores
    }
}

/// One bidder's score generator: a score distribution per support valuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rsg {
    pub generators: Vec<ScoreDistribution>,
}

/// One score generator per bidder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIrsg")]
pub struct Irsg {
    bidders: Vec<Rsg>,
}

#[derive(Deserialize)]
struct RawIrsg {
    bidders: Vec<RawRsg>,
}

#[derive(Deserialize)]
struct RawRsg {
    generators: Vec<Vec<ScoreEntry>>,
}

impl TryFrom<RawIrsg> for Irsg {
    type Error = Error;

    fn try_from(raw: RawIrsg) -> Result<Self> {
        let mut bidders = Vec::with_capacity(raw.bidders.len());
        for (i, r) in raw.bidders.into_iter().enumerate() {
            let mut generators = Vec::with_capacity(r.generators.len());
            for (k, entries) in r.generators.into_iter().enumerate() {
                let m = entries.first().map_or(0, |e| e.scores.len());
                let d = ScoreDistribution::new(m, entries)
                    .map_err(|e| Error::MalformedSpec(format!("bidder {i}, generator {k}: {e}")))?;
                generators.push(d);
            }
            bidders.push(Rsg { generators });
        }
        Ok(Irsg { bidders })
    }
}

impl Irsg {
    pub fn new(bidders: Vec<Rsg>) -> Self {
        Irsg { bidders }
    }

    /// Builds an aligned generator from `f(bidder, support index)`.
    pub fn from_fn<F>(inst: &Instance, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<ScoreDistribution>,
    {
        let bidders = (0..inst.n())
            .map(|i| {
                let generators = (0..inst.support_len(i))
                    .map(|k| f(i, k))
                    .collect::<Result<_>>()?;
                Ok(Rsg { generators })
            })
            .collect::<Result<_>>()?;
        let g = Irsg { bidders };
        g.check_aligned(inst)?;
        Ok(g)
    }

    /// Every score identically zero.
    pub fn zeros(inst: &Instance) -> Self {
        Irsg::from_fn(inst, |_, _| ScoreDistribution::point(vec![0.0; inst.m()]))
            .expect("zero scores are valid")
    }

    pub fn bidders(&self) -> &[Rsg] {
        &self.bidders
    }

    pub fn generator(&self, i: usize, k: usize) -> &ScoreDistribution {
        &self.bidders[i].generators[k]
    }

    /// Checks one generator per bidder and support valuation, each over `m`
    /// items.
    pub fn check_aligned(&self, inst: &Instance) -> Result<()> {
        if self.bidders.len() != inst.n() {
            return Err(Error::Alignment(format!(
                "{} score generators for {} bidders",
                self.bidders.len(),
                inst.n()
            )));
        }
        for (i, r) in self.bidders.iter().enumerate() {
            if r.generators.len() != inst.support_len(i) {
                return Err(Error::Alignment(format!(
                    "bidder {i} has {} generators for {} support valuations",
                    r.generators.len(),
                    inst.support_len(i)
                )));
            }
            for (k, d) in r.generators.iter().enumerate() {
                if let Some(e) = d.entries.iter().find(|e| e.scores.len() != inst.m()) {
                    return Err(Error::Alignment(format!(
                        "bidder {i}, generator {k}: {} scores for {} items",
                        e.scores.len(),
                        inst.m()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Multiplies every score by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Parameter(format!(
                "scale factor {factor} must be positive"
            )));
        }
        let bidders = self
            .bidders
            .iter()
            .map(|r| {
                let generators = r
                    .generators
                    .iter()
                    .map(|d| {
                        let m = d.entries.first().map_or(0, |e| e.scores.len());
                        let entries = d
                            .entries
                            .iter()
                            .map(|e| ScoreEntry {
                                q: e.q,
                                scores: e.scores.iter().map(|b| b * factor).collect(),
                            })
                            .collect();
                        ScoreDistribution::new(m, entries)
                    })
                    .collect::<Result<_>>()?;
                Ok(Rsg { generators })
            })
            .collect::<Result<_>>()?;
        Ok(Irsg { bidders })
    }
}
