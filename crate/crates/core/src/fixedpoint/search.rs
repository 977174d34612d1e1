use serde::{Deserialize, Serialize};

use super::grid::{build_grid, IrsgVector, ScoreGrid};
use super::phi::{blocks_from_state, phi_rhs, BlockSlack, PhiPlan, PhiState};
use crate::allocation::expected_optimal_welfare;
use crate::error::{Error, Result};
use crate::mechanisms::identity_order;
use crate::rsg::expected_welfare_cc;
use crate::valuations::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_iters: 10_000,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    /// Best iterate seen.
    pub x: IrsgVector,
    pub residual: f64,
    pub converged: bool,
    /// Iterates evaluated.
    pub iterations: usize,
    /// Residual of every evaluated iterate.
    pub residual_log: Vec<f64>,
    pub blocks: Vec<BlockSlack>,
}

/// Fictitious play on the score grid of step `epsilon`.
///
/// Starting from the zero generator, each round evaluates the residual of
/// the current iterate, then moves every block toward a point mass on its
/// best response (the first grid vector of largest gain against the
/// current price law) with weight `1/(round+1)`. Stops at the first
/// iterate with residual `≤ tolerance`, otherwise after `max_iters`
/// evaluations, returning the best iterate seen.
pub fn find_fixed_point(
    inst: &Instance,
    epsilon: f64,
    opts: SearchOptions,
) -> Result<FixedPointResult> {
    if opts.max_iters == 0 {
        return Err(Error::Parameter("max_iters must be at least 1".into()));
    }
    let grid = build_grid(inst.v_max(), epsilon, inst.m())?;
    search_from(inst, IrsgVector::zeros(inst, &grid), opts)
}

/// Fictitious play from an arbitrary starting iterate.
pub fn search_from(
    inst: &Instance,
    start: IrsgVector,
    opts: SearchOptions,
) -> Result<FixedPointResult> {
    start.check(inst)?;
    let mut x = start;
    let mut log = Vec::new();
    let mut best: Option<(f64, IrsgVector, Vec<BlockSlack>)> = None;
    let plan = PhiPlan::new(&x.grid);
    for round in 1..=opts.max_iters {
        let state = PhiState::new(&plan, &x, inst)?;
        let mut blocks = Vec::new();
        let mut responses = Vec::new();
        for (i, bidder) in x.blocks.iter().enumerate() {
            for (k, block) in bidder.iter().enumerate() {
                let v = inst.table(i, k);
                let gains = state.gains(v);
                let (rhs, best_set) = phi_rhs(v, &state.means, x.grid.epsilon);
                blocks.push(BlockSlack {
                    bidder: i,
                    support: k,
                    lhs: state.block_lhs(&gains, block),
                    rhs,
                    best_set,
                });
                responses.push(first_argmax(&gains));
            }
        }
        let residual = blocks
            .iter()
            .map(BlockSlack::violation)
            .fold(f64::NEG_INFINITY, f64::max);
        log.push(residual);
        let done = residual <= opts.tolerance || round == opts.max_iters;
        if best.as_ref().is_none_or(|b| residual < b.0) {
            best = Some((residual, x.clone(), blocks));
        }
        if done {
            break;
        }
        let w = 1.0 / (round as f64 + 1.0);
        for (block, &target) in x.blocks.iter_mut().flatten().zip(&responses) {
            for q in block.iter_mut() {
                *q *= 1.0 - w;
            }
            block[target] += w;
        }
    }
    let (residual, x, blocks) = best.expect("at least one iterate");
    Ok(FixedPointResult {
        x,
        residual,
        converged: residual <= opts.tolerance,
        iterations: log.len(),
        residual_log: log,
        blocks,
    })
}

fn first_argmax(values: &[f64]) -> usize {
    let mut arg = 0;
    for (f, &g) in values.iter().enumerate() {
        if g > values[arg] {
            arg = f;
        }
    }
    arg
}

/// Largest grid step the constant-factor argument allows for target `ε`:
/// `ε·E[OPT] / (6·(6+ε)·m)`.
pub fn proof_delta(epsilon: f64, expected_opt: f64, m: usize) -> f64 {
    epsilon * expected_opt / (6.0 * (6.0 + epsilon) * m as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantBound {
    pub expected_alg: f64,
    pub expected_opt: f64,
    /// `E[OPT]/E[ALG]`; `None` when `E[ALG] = 0`.
    pub ratio: Option<f64>,
    pub epsilon: f64,
    /// `(6+ε)·E[ALG] ≥ E[OPT] − 1e-6`.
    pub bound_holds: bool,
    pub residual: f64,
    /// Grid step of the generator.
    pub delta: f64,
    pub delta_max: f64,
    /// `delta ≤ delta_max`.
    pub delta_ok: bool,
    /// `E[OPT]/6 − δ·m`, the intermediate lower bound on `E[ALG]`.
    pub chain_bound: f64,
    pub chain_holds: bool,
}

/// Exact `E[ALG]` and `E[OPT]` for a grid generator, with an audit of the
/// grid step against [`proof_delta`].
pub fn verify_constant_bound(
    inst: &Instance,
    x: &IrsgVector,
    epsilon: f64,
    tolerance: f64,
) -> Result<ConstantBound> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("ε = {epsilon} must be positive")));
    }
    let plan = PhiPlan::new(&x.grid);
    let state = PhiState::new(&plan, x, inst)?;
    let residual = blocks_from_state(&state, x, inst)
        .iter()
        .map(BlockSlack::violation)
        .fold(f64::NEG_INFINITY, f64::max);
    if residual > tolerance {
        return Err(Error::Precondition(format!(
            "generator residual {residual} exceeds tolerance {tolerance}"
        )));
    }
    let expected_alg = expected_welfare_cc(inst, &x.to_irsg(), &identity_order(inst.n()))?;
    let expected_opt = expected_optimal_welfare(inst)?;
    let delta = x.grid.epsilon;
    let delta_max = proof_delta(epsilon, expected_opt, inst.m());
    let chain_bound = expected_opt / 6.0 - delta * inst.m() as f64;
    Ok(ConstantBound {
        expected_alg,
        expected_opt,
        ratio: (expected_alg > 0.0).then(|| expected_opt / expected_alg),
        epsilon,
        bound_holds: (6.0 + epsilon) * expected_alg >= expected_opt - 1e-6,
        residual,
        delta,
        delta_max,
        delta_ok: delta <= delta_max * (1.0 + 1e-12),
        chain_bound,
        chain_holds: expected_alg >= chain_bound - 1e-9,
    })
}

/// The grid a search at step `delta` uses for `inst`.
pub fn instance_grid(inst: &Instance, delta: f64) -> Result<ScoreGrid> {
    build_grid(inst.v_max(), delta, inst.m())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::phi::phi_residual;
    use crate::valuations::ValuationSpec;

    fn unit() -> Instance {
        Instance::deterministic(1, vec![ValuationSpec::Additive { weights: vec![1.0] }]).unwrap()
    }

    #[test]
    fn coarse_grid_stops_at_zero() {
        let r = find_fixed_point(&unit(), 0.4, SearchOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.x, IrsgVector::zeros(&unit(), &r.x.grid));
    }

    #[test]
    fn zero_instance_is_immediate() {
        let inst = Instance::deterministic(
            2,
            vec![ValuationSpec::Additive {
                weights: vec![0.0, 0.0],
            }],
        )
        .unwrap();
        let r = find_fixed_point(&inst, 0.1, SearchOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        let b = verify_constant_bound(&inst, &r.x, 1.0, 1e-6).unwrap();
        assert_eq!((b.expected_alg, b.expected_opt), (0.0, 0.0));
        assert!(b.bound_holds);
    }

    #[test]
    fn unit_instance_fine_grid() {
        let inst = unit();
        let r = find_fixed_point(&inst, 0.2, SearchOptions::default()).unwrap();
        assert!(
            r.converged,
            "residual {} after {}",
            r.residual, r.iterations
        );
        assert!(phi_residual(&r.x, &inst).unwrap() <= 1e-6);
        let b = verify_constant_bound(&inst, &r.x, 100.0, 1e-6).unwrap();
        assert!(b.chain_holds);
    }

    #[test]
    fn zero_generator_audit_flags_coarse_step() {
        let inst = unit();
        let r = find_fixed_point(&inst, 0.4, SearchOptions::default()).unwrap();
        let b = verify_constant_bound(&inst, &r.x, 1.0, 1e-6).unwrap();
        assert_eq!(b.expected_alg, 0.0);
        assert!(!b.bound_holds);
        assert!(!b.delta_ok);
        assert_eq!(b.ratio, None);
    }
}
