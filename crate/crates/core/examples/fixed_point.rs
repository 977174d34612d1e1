//! Fixed-point search for a grid score generator and the constant-factor
//! audit of the result.

use prophet_lab::allocation::expected_optimal_welfare;
use prophet_lab::fixedpoint::{
    find_fixed_point, phi_residual, proof_delta, verify_constant_bound, SearchOptions,
};
use prophet_lab::valuations::{BidderDistribution, Instance, SupportEntry, ValuationSpec};

fn main() -> prophet_lab::Result<()> {
    let inst = Instance::new(
        2,
        vec![
            BidderDistribution::new(vec![
                SupportEntry {
                    q: 0.5,
                    valuation: ValuationSpec::Xos {
                        clauses: vec![vec![0.6, 0.2], vec![0.0, 0.9]],
                    },
                },
                SupportEntry {
                    q: 0.5,
                    valuation: ValuationSpec::Additive {
                        weights: vec![0.3, 0.4],
                    },
                },
            ])
            .expect("valid support"),
            BidderDistribution::deterministic(ValuationSpec::UnitDemand {
                weights: vec![0.8, 0.5],
            }),
        ],
    )?;
    let eps = 100.0;
    let opt = expected_optimal_welfare(&inst)?;
    let step = proof_delta(eps, opt, inst.m());
    println!("E[OPT] = {opt:.4}, grid step {step:.5}");

    let opts = SearchOptions {
        max_iters: 2_000_000,
        tolerance: 1e-6,
    };
    let r = find_fixed_point(&inst, step, opts)?;
    println!(
        "{} levels per item, {} iterations, residual {:.2e}, converged {}",
        r.x.grid.levels, r.iterations, r.residual, r.converged
    );
    println!("recomputed residual {:.2e}", phi_residual(&r.x, &inst)?);
    let b = verify_constant_bound(&inst, &r.x, eps, opts.tolerance)?;
    println!("{}", serde_json::to_string_pretty(&b)?);

    // A step of at least v_max/3 leaves only the zero generator.
    let coarse = find_fixed_point(&inst, inst.v_max() / 2.0, opts)?;
    println!(
        "coarse grid: {} iteration(s), residual {:.2e}",
        coarse.iterations, coarse.residual
    );
    Ok(())
}
