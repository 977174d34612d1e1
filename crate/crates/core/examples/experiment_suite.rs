//! Config-driven experiments: one report, then a CSV over several
//! instances and mechanisms.

use std::path::Path;

use prophet_lab::harness::{estimate_ratio, rows_to_csv, run_suite, ExperimentConfig};

fn main() -> prophet_lab::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");

    let cfg = ExperimentConfig::load(&data.join("simulate_mc.json"))?;
    let report = estimate_ratio(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    eprintln!("took {:.3} s", report.wall_time.as_secs_f64());

    let cfg = ExperimentConfig::load(&data.join("suite.json"))?;
    let rows = run_suite(&cfg.instances, &cfg.mechanisms, &cfg);
    print!("{}", rows_to_csv(&rows)?);
    Ok(())
}
