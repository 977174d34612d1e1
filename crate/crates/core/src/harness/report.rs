use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize, Serializer};

use super::config::{ExperimentConfig, MechanismKind, Mode};
use super::io::{load_instance, load_irsg};
use crate::allocation::{expected_optimal_welfare, optimal_allocation, Profile};
use crate::error::{Error, Result};
use crate::mechanisms::{
    balanced_prices_xos, check_order, expected_welfare_exact, identity_order, posted_price_outcome,
    single_item_price, PriceVector,
};
use crate::montecarlo::estimate;
use crate::rsg::{expected_welfare_cc, run_correa_cristi, Irsg};
use crate::valuations::Instance;

/// `E[OPT]/E[ALG]` with explicit markers for zero denominators.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Ratio {
    Value(f64),
    /// `E[OPT] = E[ALG] = 0`.
    Undefined,
    /// `E[ALG] = 0 < E[OPT]`.
    Infinite,
}

impl Ratio {
    pub fn of(opt: f64, alg: f64) -> Ratio {
        if alg > 0.0 {
            Ratio::Value(opt / alg)
        } else if opt > 0.0 {
            Ratio::Infinite
        } else {
            Ratio::Undefined
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Value(v) => write!(f, "{v}"),
            Ratio::Undefined => f.write_str("undefined"),
            Ratio::Infinite => f.write_str("infinity"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Value(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// A mechanism with everything it needs to run.
#[derive(Clone, Debug)]
pub enum Mechanism {
    SingleItem,
    BalancedXos,
    CorreaCristi(Irsg),
    CustomPrices(PriceVector),
}

impl Mechanism {
    pub fn kind(&self) -> MechanismKind {
        match self {
            Mechanism::SingleItem => MechanismKind::SingleItem,
            Mechanism::BalancedXos => MechanismKind::BalancedXos,
            Mechanism::CorreaCristi(_) => MechanismKind::CorreaCristi,
            Mechanism::CustomPrices(_) => MechanismKind::CustomPrices,
        }
    }

    /// Builds `kind` from the config's prices or score generator file.
    pub fn resolve(kind: MechanismKind, cfg: &ExperimentConfig, inst: &Instance) -> Result<Self> {
        Ok(match kind {
            MechanismKind::SingleItem => Mechanism::SingleItem,
            MechanismKind::BalancedXos => Mechanism::BalancedXos,
            MechanismKind::CorreaCristi => {
                let path = cfg
                    .irsg
                    .as_deref()
                    .ok_or_else(|| Error::Parameter("correa-cristi needs an irsg file".into()))?;
                Mechanism::CorreaCristi(load_irsg(path, inst)?)
            }
            MechanismKind::CustomPrices => {
                let p = cfg
                    .prices
                    .clone()
                    .ok_or_else(|| Error::Parameter("custom-prices needs a prices list".into()))?;
                Mechanism::CustomPrices(PriceVector::new(p)?)
            }
        })
    }

    /// Item prices for posted-price mechanisms, computed exactly.
    pub fn prices(&self, inst: &Instance) -> Result<Option<PriceVector>> {
        let p = match self {
            Mechanism::SingleItem => single_item_price(inst)?,
            Mechanism::BalancedXos => balanced_prices_xos(inst)?,
            Mechanism::CustomPrices(p) => p.clone(),
            Mechanism::CorreaCristi(_) => return Ok(None),
        };
        if p.len() != inst.m() {
            return Err(Error::Parameter(format!(
                "{} prices for {} items",
                p.len(),
                inst.m()
            )));
        }
        Ok(Some(p))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub instance: String,
    pub mechanism: MechanismKind,
    pub mode: Mode,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    pub expected_opt: f64,
    pub expected_alg: f64,
    pub ratio: Ratio,
    pub revenue: f64,
    pub utility: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alg_half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub revenue_half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub utility_half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prices: Option<Vec<f64>>,
    /// Not serialized, so reports stay byte-identical across runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Loads the configured instance and mechanism and evaluates them.
pub fn estimate_ratio(cfg: &ExperimentConfig) -> Result<Report> {
    let path = cfg.instance_path()?;
    let inst = load_instance(path)?;
    let kind = cfg
        .mechanism
        .ok_or_else(|| Error::Parameter("config names no mechanism".into()))?;
    let mech = Mechanism::resolve(kind, cfg, &inst)?;
    evaluate(&inst, &mech, cfg, &label(path))
}

pub(crate) fn label(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

/// `E[OPT]`, `E[ALG]` and the revenue/utility split, exactly or by Monte
/// Carlo on common valuation draws.
pub fn evaluate(
    inst: &Instance,
    mech: &Mechanism,
    cfg: &ExperimentConfig,
    instance_label: &str,
) -> Result<Report> {
    let start = Instant::now();
    let order = cfg
        .order
        .clone()
        .unwrap_or_else(|| identity_order(inst.n()));
    check_order(&order, inst.n())?;
    // Prices are always computed exactly, so only exact mode gets the hint.
    let prices = mech.prices(inst).map_err(|e| match cfg.mode {
        Mode::Exact => suggest_monte_carlo(e),
        Mode::MonteCarlo => e,
    })?;
    let mut report = Report {
        instance: instance_label.to_string(),
        mechanism: mech.kind(),
        mode: cfg.mode,
        seed: cfg.seed,
        samples: None,
        expected_opt: 0.0,
        expected_alg: 0.0,
        ratio: Ratio::Undefined,
        revenue: 0.0,
        utility: 0.0,
        opt_half_width: None,
        alg_half_width: None,
        revenue_half_width: None,
        utility_half_width: None,
        prices: prices.as_ref().map(|p| p.to_vec()),
        wall_time: Duration::ZERO,
    };

    match cfg.mode {
        Mode::Exact => {
            let opt = expected_optimal_welfare(inst).map_err(suggest_monte_carlo)?;
            let (alg, revenue, utility) = match (mech, &prices) {
                (Mechanism::CorreaCristi(g), _) => {
                    let w = expected_welfare_cc(inst, g, &order).map_err(suggest_monte_carlo)?;
                    (w, 0.0, w)
                }
                (_, Some(p)) => {
                    let e = expected_welfare_exact(inst, p, &order).map_err(suggest_monte_carlo)?;
                    (e.welfare, e.revenue, e.utility)
                }
                (_, None) => unreachable!("posted-price mechanisms carry prices"),
            };
            report.expected_opt = opt;
            report.expected_alg = alg;
            report.revenue = revenue;
            report.utility = utility;
        }
        Mode::MonteCarlo => {
            let samples = cfg.samples_or_default();
            let [opt, alg, revenue, utility] = estimate(cfg.seed, samples, |rng| {
                let (profile, trace) = match (mech, &prices) {
                    (Mechanism::CorreaCristi(g), _) => {
                        let t = run_correa_cristi(inst, g, &order, rng)?;
                        let mut profile = vec![0; inst.n()];
                        for p in &t.purchases {
                            profile[p.bidder] = p.support_index;
                        }
                        (profile, t)
                    }
                    (_, Some(p)) => {
                        let profile = inst.sample_profile(rng);
                        let t = posted_price_outcome(inst, p, &order, &profile);
                        (profile, t)
                    }
                    (_, None) => unreachable!("posted-price mechanisms carry prices"),
                };
                let opt = optimal_allocation(&Profile::new(inst.profile_tables(&profile)))?.1;
                Ok([opt, trace.welfare, trace.revenue, trace.total_utility])
            })?;
            report.samples = Some(samples);
            report.expected_opt = opt.mean;
            report.expected_alg = alg.mean;
            report.revenue = revenue.mean;
            report.utility = utility.mean;
            report.opt_half_width = Some(opt.half_width);
            report.alg_half_width = Some(alg.half_width);
            report.revenue_half_width = Some(revenue.half_width);
            report.utility_half_width = Some(utility.half_width);
        }
    }
    report.ratio = Ratio::of(report.expected_opt, report.expected_alg);
    report.wall_time = start.elapsed();
    Ok(report)
}

fn suggest_monte_carlo(e: Error) -> Error {
    match e {
        Error::Capacity { what, size, limit } => Error::Capacity {
            what: if what == "valuation profiles" {
                "valuation profiles (use monte-carlo mode)"
            } else {
                what
            },
            size,
            limit,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rsg::ScoreDistribution;
    use crate::valuations::{BidderDistribution, SupportEntry, ValuationSpec};

    fn single(w: f64) -> ValuationSpec {
        ValuationSpec::Additive { weights: vec![w] }
    }

    fn coin() -> Instance {
        Instance::new(
            1,
            vec![
                BidderDistribution::new(vec![
                    SupportEntry {
                        q: 0.5,
                        valuation: single(0.0),
                    },
                    SupportEntry {
                        q: 0.5,
                        valuation: single(2.0),
                    },
                ])
                .unwrap(),
                BidderDistribution::deterministic(single(1.0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn coin_instance_ratio_one() {
        let r = evaluate(
            &coin(),
            &Mechanism::SingleItem,
            &ExperimentConfig::default(),
            "coin",
        )
        .unwrap();
        assert!((r.expected_opt - 1.5).abs() < 1e-12);
        assert!((r.expected_alg - 1.5).abs() < 1e-12);
        assert!((r.ratio.value().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.opt_half_width, None);
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("half_width"));
    }

    #[test]
    fn markers() {
        let zero = Instance::deterministic(1, vec![single(0.0)]).unwrap();
        let r = evaluate(
            &zero,
            &Mechanism::SingleItem,
            &ExperimentConfig::default(),
            "z",
        )
        .unwrap();
        assert_eq!(r.ratio, Ratio::Undefined);
        assert_eq!(serde_json::to_string(&r.ratio).unwrap(), "\"undefined\"");

        let one = Instance::deterministic(1, vec![single(1.0)]).unwrap();
        let g = Irsg::from_fn(&one, |_, _| ScoreDistribution::point(vec![0.5])).unwrap();
        let r = evaluate(
            &one,
            &Mechanism::CorreaCristi(g),
            &ExperimentConfig::default(),
            "o",
        )
        .unwrap();
        assert_eq!(r.expected_alg, 0.0);
        assert_eq!(r.ratio, Ratio::Infinite);
        assert_eq!(r.ratio.to_string(), "infinity");
    }

    #[test]
    fn monte_carlo_close_to_exact() {
        let cfg = ExperimentConfig {
            mode: Mode::MonteCarlo,
            samples: Some(50_000),
            seed: 4,
            ..ExperimentConfig::default()
        };
        let r = evaluate(&coin(), &Mechanism::SingleItem, &cfg, "coin").unwrap();
        assert!((r.expected_opt - 1.5).abs() < 4.0 * r.opt_half_width.unwrap() / 1.96 + 1e-12);
        assert_eq!(r.expected_alg, r.expected_opt);
        let again = evaluate(&coin(), &Mechanism::SingleItem, &cfg, "coin").unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }
}
