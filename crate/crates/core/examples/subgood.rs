//! Subgood prices: item prices plus a random subset that certify a
//! constant fraction of `v(U)`.

use prophet_lab::mechanisms::{solve_subgood, verify_subgood};
use prophet_lab::valuations::{ItemSet, ValuationSpec};

fn main() -> prophet_lab::Result<()> {
    let cases = [
        ("unit item", ValuationSpec::Additive { weights: vec![1.0] }),
        (
            "two substitutes",
            ValuationSpec::UnitDemand {
                weights: vec![1.0, 1.0],
            },
        ),
        (
            "sqrt of three",
            ValuationSpec::SqrtAdditive {
                weights: vec![1.0, 1.0, 1.0],
            },
        ),
        (
            "xos",
            ValuationSpec::Xos {
                clauses: vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.5, 0.5]],
            },
        ),
    ];
    for (name, spec) in cases {
        let v = spec.tabulate()?;
        let u = ItemSet::full(spec.item_count());
        let sol = solve_subgood(&v, u, 20)?;
        let slack = verify_subgood(&sol, &v, u)?;
        println!(
            "{name}: v(U) = {:.3}, guarantee {:.4}, α = {:?}",
            spec.eval(u),
            sol.guarantee,
            sol.alpha_achieved
        );
        println!("  prices {:?}", sol.prices);
        for (t, q) in sol.delta.iter().filter(|(_, q)| *q > 1e-12) {
            println!("  δ{t} = {q:.4}");
        }
        println!("  verified slack {slack:.2e}");
    }
    Ok(())
}
