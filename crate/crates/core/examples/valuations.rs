//! Valuation representations, class checks and sampling from an instance.

use prophet_lab::valuations::{
    BidderDistribution, Instance, ItemSet, SupportEntry, ValuationClass, ValuationSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> prophet_lab::Result<()> {
    let specs = [
        ValuationSpec::Additive {
            weights: vec![1.0, 2.0, 0.5],
        },
        ValuationSpec::UnitDemand {
            weights: vec![1.0, 2.0, 0.5],
        },
        ValuationSpec::Xos {
            clauses: vec![vec![1.0, 1.0, 0.0], vec![0.0, 2.0, 2.0]],
        },
        ValuationSpec::SqrtAdditive {
            weights: vec![1.0, 4.0, 4.0],
        },
        // Items 0 and 1 are complements: monotone, not subadditive.
        ValuationSpec::Table {
            values: vec![0.0, 0.0, 0.0, 3.0, 1.0, 1.0, 1.0, 3.0],
        },
    ];
    let all = ItemSet::full(3);
    let pair = ItemSet::from_items([0, 1]);
    for v in &specs {
        print!(
            "{:<14} v({pair}) = {:<6} v({all}) = {:<6}",
            v.variant_name(),
            v.eval(pair),
            v.eval(all)
        );
        for class in [ValuationClass::Submodular, ValuationClass::Subadditive] {
            let c = v.check_class(class)?;
            print!("  {class:?}: {}", c.holds);
        }
        println!();
    }

    let xos = &specs[2];
    let witness = xos.check_class(ValuationClass::XosConsistent)?;
    println!("xos clauses consistent with table: {}", witness.holds);
    println!(
        "supporting clause of {all}: {}",
        xos.supporting_clause(all)?
    );

    let inst = Instance::new(
        3,
        vec![
            BidderDistribution::new(vec![
                SupportEntry {
                    q: 0.25,
                    valuation: specs[0].clone(),
                },
                SupportEntry {
                    q: 0.75,
                    valuation: specs[2].clone(),
                },
            ])
            .map_err(|(k, reason)| prophet_lab::Error::InvalidInstance {
                bidder: 0,
                support: k,
                reason,
            })?,
            BidderDistribution::deterministic(specs[3].clone()),
        ],
    )?;
    println!(
        "n = {}, m = {}, v_max = {}, profiles = {}",
        inst.n(),
        inst.m(),
        inst.v_max(),
        inst.profile_count()
    );
    inst.require_class(ValuationClass::Subadditive)?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let profile = inst.sample_profile(&mut rng);
        println!(
            "sampled profile {profile:?} with probability {}",
            inst.profile_probability(&profile)
        );
    }
    Ok(())
}
