//! Random score generators, the phantom-threshold allocation and the
//! mirror inequality, exactly and by Monte Carlo.

use prophet_lab::allocation::expected_optimal_welfare;
use prophet_lab::mechanisms::identity_order;
use prophet_lab::rsg::{
    expected_welfare_cc, mirror_sides_exact, mirror_sides_mc, phantom_price_law, run_correa_cristi,
    Irsg, ScoreDistribution, ScoreEntry,
};
use prophet_lab::valuations::{BidderDistribution, Instance, SupportEntry, ValuationSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> prophet_lab::Result<()> {
    let inst = Instance::new(
        2,
        vec![
            BidderDistribution::new(vec![
                SupportEntry {
                    q: 0.5,
                    valuation: ValuationSpec::Additive {
                        weights: vec![1.0, 0.0],
                    },
                },
                SupportEntry {
                    q: 0.5,
                    valuation: ValuationSpec::UnitDemand {
                        weights: vec![2.0, 1.0],
                    },
                },
            ])
            .expect("valid support"),
            BidderDistribution::deterministic(ValuationSpec::Additive {
                weights: vec![0.5, 1.5],
            }),
        ],
    )?;
    // Scores follow values with some noise.
    let irsg = Irsg::from_fn(&inst, |i, k| {
        let v = inst.valuation(i, k);
        let own: Vec<f64> = (0..2)
            .map(|j| v.eval(prophet_lab::valuations::ItemSet::singleton(j)))
            .collect();
        let half: Vec<f64> = own.iter().map(|x| x / 2.0).collect();
        ScoreDistribution::new(
            2,
            vec![
                ScoreEntry {
                    q: 0.5,
                    scores: own,
                },
                ScoreEntry {
                    q: 0.5,
                    scores: half,
                },
            ],
        )
    })?;
    println!("{}", serde_json::to_string(&irsg)?);

    for (p, q) in phantom_price_law(&inst, &irsg)? {
        println!("phantom price {p:?} with probability {q}");
    }

    let order = identity_order(inst.n());
    let alg = expected_welfare_cc(&inst, &irsg, &order)?;
    let opt = expected_optimal_welfare(&inst)?;
    println!("E[ALG] = {alg:.4}, E[OPT] = {opt:.4}");

    let sides = mirror_sides_exact(&inst, &irsg)?;
    println!(
        "mirror: lhs {:.4} ≥ rhs {:.4}: {}",
        sides.lhs,
        sides.rhs,
        sides.holds()
    );
    let mc = mirror_sides_mc(&inst, &irsg, 100_000, 42)?;
    println!(
        "monte carlo: lhs {:.4} ± {:.4}, rhs {:.4} ± {:.4}",
        mc.lhs.mean, mc.lhs.half_width, mc.rhs.mean, mc.rhs.half_width
    );

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trace = run_correa_cristi(&inst, &irsg, &order, &mut rng)?;
    println!(
        "one run: thresholds {:?}, allocation {:?}",
        trace.phantom_prices,
        trace.allocation()
    );
    Ok(())
}
