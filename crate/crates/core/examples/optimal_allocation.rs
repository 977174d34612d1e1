//! Welfare-maximizing allocations by exhaustive search.

use prophet_lab::allocation::{
    expected_optimal_welfare, feasible_allocations, optimal_allocation, welfare, Profile,
};
use prophet_lab::valuations::{ItemSet, ValuationSpec, ValueTable};

fn main() -> prophet_lab::Result<()> {
    let tables: Vec<ValueTable> = [
        ValuationSpec::UnitDemand {
            weights: vec![3.0, 2.0, 1.0],
        },
        ValuationSpec::Additive {
            weights: vec![2.5, 0.5, 0.7],
        },
        ValuationSpec::Xos {
            clauses: vec![vec![0.0, 2.2, 2.2], vec![1.0, 1.0, 1.0]],
        },
    ]
    .iter()
    .map(ValuationSpec::tabulate)
    .collect::<Result<_, _>>()?;
    let profile = Profile::from_tables(&tables);

    let (best, value) = optimal_allocation(&profile)?;
    println!("OPT = {value}");
    for (i, part) in best.parts.iter().enumerate() {
        println!("  bidder {i} gets {part}");
    }

    let count = feasible_allocations(3, ItemSet::full(3))?.count();
    let brute = feasible_allocations(3, ItemSet::full(3))?
        .map(|x| welfare(&profile, &x))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("{count} feasible allocations, best by brute force {brute}");

    let inst = prophet_lab::harness::load_instance(
        &std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/xos_pair.json"),
    )?;
    println!(
        "E[OPT] of xos_pair.json = {}",
        expected_optimal_welfare(&inst)?
    );
    Ok(())
}
