use std::path::PathBuf;

use serde::Serialize;

use super::config::{ExperimentConfig, MechanismKind};
use super::io::load_instance;
use super::report::{evaluate, label, Mechanism, Report};
use crate::error::Result;

/// Column order of every results table.
pub const COLUMNS: [&str; 14] = [
    "instance",
    "mechanism",
    "mode",
    "seed",
    "samples",
    "expected_opt",
    "expected_alg",
    "ratio",
    "revenue",
    "utility",
    "opt_half_width",
    "alg_half_width",
    "prices",
    "error",
];

/// One CSV row. Failed rows carry the error text and leave numbers blank.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportRow {
    pub instance: String,
    pub mechanism: String,
    pub mode: String,
    pub seed: u64,
    pub samples: Option<u64>,
    pub expected_opt: Option<f64>,
    pub expected_alg: Option<f64>,
    pub ratio: Option<String>,
    pub revenue: Option<f64>,
    pub utility: Option<f64>,
    pub opt_half_width: Option<f64>,
    pub alg_half_width: Option<f64>,
    /// Space-separated item prices.
    pub prices: Option<String>,
    pub error: Option<String>,
}

impl From<&Report> for ReportRow {
    fn from(r: &Report) -> Self {
        ReportRow {
            instance: r.instance.clone(),
            mechanism: r.mechanism.name().to_string(),
            mode: mode_name(r.mode).to_string(),
            seed: r.seed,
            samples: r.samples,
            expected_opt: Some(r.expected_opt),
            expected_alg: Some(r.expected_alg),
            ratio: Some(r.ratio.to_string()),
            revenue: Some(r.revenue),
            utility: Some(r.utility),
            opt_half_width: r.opt_half_width,
            alg_half_width: r.alg_half_width,
            prices: r
                .prices
                .as_ref()
                .map(|p| p.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")),
            error: None,
        }
    }
}

fn mode_name(mode: super::config::Mode) -> &'static str {
    match mode {
        super::config::Mode::Exact => "exact",
        super::config::Mode::MonteCarlo => "monte-carlo",
    }
}

/// Writes rows under the fixed header, which is present even with no rows.
pub fn rows_to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Evaluates every (instance, mechanism) pair with the settings in
/// `defaults`. Rows follow instance order, then mechanism order; a failing
/// pair yields a row with only its error filled in.
pub fn run_suite(
    instances: &[PathBuf],
    mechanisms: &[MechanismKind],
    defaults: &ExperimentConfig,
) -> Vec<ReportRow> {
    let mut rows = Vec::with_capacity(instances.len() * mechanisms.len());
    for path in instances {
        let name = label(path);
        let inst = if mechanisms.is_empty() {
            None
        } else {
            Some(load_instance(path))
        };
        for &kind in mechanisms {
            let outcome = match inst.as_ref().expect("loaded when mechanisms exist") {
                Ok(inst) => Mechanism::resolve(kind, defaults, inst)
                    .and_then(|mech| evaluate(inst, &mech, defaults, &name))
                    .map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            };
            rows.push(match outcome {
                Ok(report) => ReportRow::from(&report),
                Err(e) => ReportRow {
                    instance: name.clone(),
                    mechanism: kind.name().to_string(),
                    mode: mode_name(defaults.mode).to_string(),
                    seed: defaults.seed,
                    samples: None,
                    error: Some(e),
                    ..ReportRow::default()
                },
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use std::fs;

    use super::*;

    const COIN: &str = r#"{"m": 1, "bidders": [
        {"support": [{"q": 0.5, "valuation": {"type": "additive", "weights": [0]}},
                     {"q": 0.5, "valuation": {"type": "additive", "weights": [2]}}]},
        {"support": [{"q": 1, "valuation": {"type": "additive", "weights": [1]}}]}]}"#;

    #[test]
    fn empty_mechanism_list_is_header_only() {
        let rows = run_suite(
            &[PathBuf::from("missing.json")],
            &[],
            &ExperimentConfig::default(),
        );
        assert!(rows.is_empty());
        let csv = rows_to_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("instance,mechanism,mode,seed,"));
    }

    #[test]
    fn grid_of_rows_with_per_row_failures() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        fs::write(&a, COIN).unwrap();
        fs::write(&b, COIN).unwrap();
        let mechs = [MechanismKind::SingleItem, MechanismKind::CorreaCristi];
        let rows = run_suite(&[a, b], &mechs, &ExperimentConfig::default());
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].ratio.as_deref(), Some("1"));
        assert!(rows[0].error.is_none());
        // No score generator configured.
        assert!(rows[1].error.as_deref().unwrap().contains("irsg"));
        assert_eq!(rows[2].instance, "b.json");
        let csv = rows_to_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 5);
        let again = rows_to_csv(&run_suite(
            &[dir.path().join("a.json"), dir.path().join("b.json")],
            &mechs,
            &ExperimentConfig::default(),
        ))
        .unwrap();
        assert_eq!(csv, again);
    }

    #[test]
    fn unreadable_instance_is_a_row_error() {
        let rows = run_suite(
            &[PathBuf::from("/nonexistent/x.json")],
            &[MechanismKind::SingleItem],
            &ExperimentConfig::default(),
        );
        assert_eq!(rows.len(), 1);
        assert!(rows[0].error.is_some());
        assert!(rows[0].expected_opt.is_none());
    }
}
