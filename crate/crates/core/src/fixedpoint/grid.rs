use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rsg::{Irsg, Rsg, ScoreDistribution, ScoreEntry};
use crate::valuations::Instance;

/// Cap on the number of grid vectors `levels^m`.
pub const MAX_GRID_VECTORS: u128 = 100_000;

/// Score vectors whose entries are `s·ε` for `s = 0..levels`, with
/// `(levels − 1)·ε ≤ v_max`.
///
/// Vectors are indexed in mixed radix with item 0 least significant, so
/// index 0 is the zero vector. Comparisons use the integer levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreGrid {
    pub epsilon: f64,
    pub v_max: f64,
    pub m: usize,
    pub levels: usize,
}

pub fn build_grid(v_max: f64, epsilon: f64, m: usize) -> Result<ScoreGrid> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!(
            "grid step {epsilon} must be positive"
        )));
    }
    if !(v_max >= 0.0 && v_max.is_finite()) {
        return Err(Error::Parameter(format!(
            "v_max {v_max} must be finite and non-negative"
        )));
    }
    let top = (v_max / epsilon + 1e-9).floor();
    if top >= u32::MAX as f64 {
        return Err(Error::capacity(
            "grid levels",
            top as u128,
            u32::MAX as u128,
        ));
    }
    let grid = ScoreGrid {
        epsilon,
        v_max,
        m,
        levels: top as usize + 1,
    };
    let size = grid.size_u128();
    if size > MAX_GRID_VECTORS {
        return Err(Error::capacity(
            "score grid vectors",
            size,
            MAX_GRID_VECTORS,
        ));
    }
    Ok(grid)
}

impl ScoreGrid {
    fn size_u128(&self) -> u128 {
        (self.levels as u128).saturating_pow(self.m as u32)
    }

    /// Number of grid vectors.
    pub fn size(&self) -> usize {
        self.size_u128() as usize
    }

    /// Admissible per-item values, ascending.
    pub fn values(&self) -> Vec<f64> {
        (0..self.levels).map(|s| self.value(s)).collect()
    }

    pub fn value(&self, level: usize) -> f64 {
        level as f64 * self.epsilon
    }

    /// Per-item levels of vector `index`.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        (0..self.m)
            .map(|_| {
                let d = index % self.levels;
                index /= self.levels;
                d
            })
            .collect()
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().rev().fold(0, |acc, &d| acc * self.levels + d)
    }

    pub fn vector(&self, index: usize) -> Vec<f64> {
        self.digits(index)
            .into_iter()
            .map(|d| self.value(d))
            .collect()
    }

    /// Grid index of `scores`, if every entry is a grid value.
    pub fn locate(&self, scores: &[f64]) -> Option<usize> {
        if scores.len() != self.m {
            return None;
        }
        let digits: Option<Vec<usize>> = scores
            .iter()
            .map(|&b| {
                let s = (b / self.epsilon).round();
                let ok = s >= 0.0
                    && (s as usize) < self.levels
                    && (b - self.value(s as usize)).abs() <= 1e-9 * (1.0 + b.abs());
                ok.then_some(s as usize)
            })
            .collect();
        digits.map(|d| self.index_of(&d))
    }

    pub(crate) fn tables(&self) -> GridTables {
        let digits: Vec<Vec<usize>> = (0..self.size()).map(|k| self.digits(k)).collect();
        let totals = digits
            .iter()
            .map(|d| d.iter().map(|&s| self.value(s)).sum())
            .collect();
        GridTables { digits, totals }
    }
}

/// Precomputed per-vector data for a grid.
pub(crate) struct GridTables {
    pub digits: Vec<Vec<usize>>,
    /// `f(M)` per vector.
    pub totals: Vec<f64>,
}

impl ScoreGrid {
    fn stride(&self, j: usize) -> usize {
        self.levels.pow(j as u32)
    }

    /// In place: probabilities to the joint CDF `P(p ≤ f)` coordinatewise.
    pub(crate) fn mass_to_cdf(&self, a: &mut [f64]) {
        for j in 0..self.m {
            let stride = self.stride(j);
            for idx in 0..a.len() {
                if !(idx / stride).is_multiple_of(self.levels) {
                    a[idx] += a[idx - stride];
                }
            }
        }
    }

    /// Inverse of [`ScoreGrid::mass_to_cdf`]. Rounding residue below zero is
    /// clamped.
    pub(crate) fn cdf_to_mass(&self, a: &mut [f64]) {
        for j in 0..self.m {
            let stride = self.stride(j);
            for idx in (0..a.len()).rev() {
                if !(idx / stride).is_multiple_of(self.levels) {
                    a[idx] -= a[idx - stride];
                }
            }
        }
        for x in a.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
    }
}

/// A probability law over the vectors of one grid, stored densely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLaw {
    pub grid: ScoreGrid,
    pub probs: Vec<f64>,
}

impl GridLaw {
    pub fn point(grid: &ScoreGrid, index: usize) -> Self {
        let mut probs = vec![0.0; grid.size()];
        probs[index] = 1.0;
        GridLaw {
            grid: grid.clone(),
            probs,
        }
    }

    /// Validates a dense law: one entry per grid vector, non-negative,
    /// summing to one within `1e-9`.
    pub fn new(grid: &ScoreGrid, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != grid.size() {
            return Err(Error::Parameter(format!(
                "{} probabilities for {} grid vectors",
                probs.len(),
                grid.size()
            )));
        }
        check_block(&probs)?;
        Ok(GridLaw {
            grid: grid.clone(),
            probs,
        })
    }

    /// `E[p_j]` per item.
    pub fn means(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.m];
        for (k, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                for (o, d) in out.iter_mut().zip(self.grid.digits(k)) {
                    *o += p * self.grid.value(d);
                }
            }
        }
        out
    }

    /// Non-zero entries as `(score vector, probability)`.
    pub fn support(&self) -> Vec<(Vec<f64>, f64)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| (self.grid.vector(k), p))
            .collect()
    }

    /// Law of the coordinatewise maximum of independent draws from `self`
    /// and `other`.
    pub fn max_with(&self, other: &GridLaw) -> GridLaw {
        let grid = &self.grid;
        let mut a = self.probs.clone();
        let mut b = other.probs.clone();
        grid.mass_to_cdf(&mut a);
        grid.mass_to_cdf(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        grid.cdf_to_mass(&mut a);
        GridLaw {
            grid: grid.clone(),
            probs: a,
        }
    }
}

fn check_block(probs: &[f64]) -> Result<()> {
    if let Some(p) = probs
        .iter()
        .find(|p| !(p.is_finite() && **p >= 0.0 && **p <= 1.0 + 1e-12))
    {
        return Err(Error::Parameter(format!(
            "coordinate {p} is outside [0, 1]"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!("block sums to {total}, not 1")));
    }
    Ok(())
}

/// A score generator with grid-valued scores, one dense block per
/// `(bidder, support valuation)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrsgVector {
    pub grid: ScoreGrid,
    /// `blocks[i][k][f]` is the probability of grid vector `f` for bidder
    /// `i` with support valuation `k`.
    pub blocks: Vec<Vec<Vec<f64>>>,
}

impl IrsgVector {
    /// Every block a point mass on grid vector `index`.
    pub fn point(inst: &Instance, grid: &ScoreGrid, index: usize) -> Self {
        let mut unit = vec![0.0; grid.size()];
        unit[index] = 1.0;
        IrsgVector {
            grid: grid.clone(),
            blocks: (0..inst.n())
                .map(|i| vec![unit.clone(); inst.support_len(i)])
                .collect(),
        }
    }

    pub fn zeros(inst: &Instance, grid: &ScoreGrid) -> Self {
        IrsgVector::point(inst, grid, 0)
    }

    /// Checks block shapes against `inst` and that every block is a
    /// distribution.
    pub fn check(&self, inst: &Instance) -> Result<()> {
        if self.grid.m != inst.m() || self.blocks.len() != inst.n() {
            return Err(Error::Alignment(format!(
                "vector has {} bidders over {} items, instance has {} over {}",
                self.blocks.len(),
                self.grid.m,
                inst.n(),
                inst.m()
            )));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if b.len() != inst.support_len(i) {
                return Err(Error::Alignment(format!(
                    "bidder {i} has {} blocks for {} support valuations",
                    b.len(),
                    inst.support_len(i)
                )));
            }
            for block in b {
                if block.len() != self.grid.size() {
                    return Err(Error::Alignment(format!(
                        "block of length {} for {} grid vectors",
                        block.len(),
                        self.grid.size()
                    )));
                }
                check_block(block)?;
            }
        }
        Ok(())
    }

    /// Total number of coordinates `l`.
    pub fn len(&self) -> usize {
        self.blocks.iter().flatten().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All coordinates, block by block.
    pub fn flat(&self) -> Vec<f64> {
        self.blocks.iter().flatten().flatten().copied().collect()
    }

    /// The equivalent sparse score generator.
    pub fn to_irsg(&self) -> Irsg {
        let bidders = self
            .blocks
            .iter()
            .map(|b| Rsg {
                generators: b
                    .iter()
                    .map(|block| {
                        let entries: Vec<ScoreEntry> = block
                            .iter()
                            .enumerate()
                            .filter(|(_, &q)| q > 0.0)
                            .map(|(f, &q)| ScoreEntry {
                                q,
                                scores: self.grid.vector(f),
                            })
                            .collect();
                        ScoreDistribution::new(self.grid.m, entries)
                            .expect("blocks are distributions over grid vectors")
                    })
                    .collect(),
            })
            .collect();
        Irsg::new(bidders)
    }

    /// Dense blocks for a score generator whose scores all lie on `grid`.
    pub fn from_irsg(inst: &Instance, grid: &ScoreGrid, irsg: &Irsg) -> Result<Self> {
        irsg.check_aligned(inst)?;
        let mut blocks = Vec::with_capacity(inst.n());
        for (i, r) in irsg.bidders().iter().enumerate() {
            let mut b = Vec::with_capacity(r.generators.len());
            for (k, d) in r.generators.iter().enumerate() {
                let mut block = vec![0.0; grid.size()];
                for e in d.entries() {
                    let f = grid.locate(&e.scores).ok_or_else(|| {
                        Error::Alignment(format!(
                            "bidder {i}, generator {k}: scores {:?} are off the grid",
                            e.scores
                        ))
                    })?;
                    block[f] += e.q;
                }
                b.push(block);
            }
            blocks.push(b);
        }
        Ok(IrsgVector {
            grid: grid.clone(),
            blocks,
        })
    }
}
