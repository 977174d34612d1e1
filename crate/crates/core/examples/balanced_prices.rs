//! Balanced prices for XOS bidders and the balancedness certificate.

use prophet_lab::allocation::{expected_optimal_welfare, optimal_allocation, Profile};
use prophet_lab::harness::load_instance;
use prophet_lab::mechanisms::{
    all_orders, balanced_prices_xos, check_balanced, expected_welfare_exact,
    supporting_clause_prices, PriceVector,
};
use prophet_lab::valuations::ValuationSpec;

fn main() -> prophet_lab::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/xos_pair.json");
    let inst = load_instance(&path)?;
    let prices = balanced_prices_xos(&inst)?;
    let opt = expected_optimal_welfare(&inst)?;
    println!("prices {:?}, E[OPT] = {opt:.4}", &prices[..]);
    for order in all_orders(inst.n()) {
        let e = expected_welfare_exact(&inst, &prices, &order)?;
        println!(
            "  order {order:?}: E[welfare] = {:.4} (≥ {:.4})",
            e.welfare,
            opt / 2.0
        );
    }

    for (profile, q) in inst.profiles() {
        let prof = Profile::new(inst.profile_tables(&profile));
        let (x, _) = optimal_allocation(&prof)?;
        let specs: Vec<&ValuationSpec> = profile
            .iter()
            .enumerate()
            .map(|(i, &k)| inst.valuation(i, k))
            .collect();
        let p = supporting_clause_prices(&specs, &x, inst.m())?;
        let r = check_balanced(&prof, &p, 1.0, 1.0)?;
        println!(
            "profile {profile:?} (q = {q:.2}): prices {:?}, balanced {} (slacks {:.3}, {:.3})",
            &p[..],
            r.balanced(),
            r.cond1_slack,
            r.cond2_slack
        );
    }

    // Prices that are too low fail the first condition.
    let prof = Profile::new(inst.profile_tables(&[0, 0]));
    let r = check_balanced(&prof, &PriceVector::zeros(inst.m()), 1.0, 1.0)?;
    println!(
        "zero prices balanced: {}; witness {:?}",
        r.balanced(),
        r.violation
    );
    Ok(())
}
