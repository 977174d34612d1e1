//! The single-item posted price `½·E[max v_i]` against the prophet.

use prophet_lab::mechanisms::{
    expected_max_value, expected_welfare_exact, identity_order, run_posted_price, single_item_price,
};
use prophet_lab::valuations::{BidderDistribution, Instance, SupportEntry, ValuationSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value(w: f64) -> ValuationSpec {
    ValuationSpec::Additive { weights: vec![w] }
}

fn main() -> prophet_lab::Result<()> {
    // One bidder is always worth 1; the other is a long shot worth 1/ε.
    for eps in [0.5, 0.1, 0.01] {
        let inst = Instance::new(
            1,
            vec![
                BidderDistribution::deterministic(value(1.0)),
                BidderDistribution::new(vec![
                    SupportEntry {
                        q: 1.0 - eps,
                        valuation: value(0.0),
                    },
                    SupportEntry {
                        q: eps,
                        valuation: value(1.0 / eps),
                    },
                ])
                .expect("probabilities sum to one"),
            ],
        )?;
        let prices = single_item_price(&inst)?;
        let prophet = expected_max_value(&inst)?;
        let e = expected_welfare_exact(&inst, &prices, &identity_order(2))?;
        println!(
            "ε = {eps:<5} price {:<8.4} E[max] {prophet:<8.4} E[ALG] {:<8.4} revenue {:<8.4} ratio {:.4}",
            prices[0],
            e.welfare,
            e.revenue,
            prophet / e.welfare
        );
    }

    let inst = Instance::deterministic(1, vec![value(2.0), value(3.0)])?;
    let prices = single_item_price(&inst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let trace = run_posted_price(&inst, &prices, &[0, 1], &mut rng)?;
    println!("{}", serde_json::to_string_pretty(&trace)?);
    Ok(())
}
