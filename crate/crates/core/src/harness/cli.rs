//! The `prophet-lab` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use super::config::{ExperimentConfig, Mode, OutputFormat};
use super::io::{load_instance, load_irsg};
use super::report::{estimate_ratio, label};
use super::suite::{rows_to_csv, run_suite, ReportRow};
use crate::allocation::{expected_optimal_welfare, optimal_allocation, Profile};
use crate::error::{Error, Result};
use crate::fixedpoint::{
    find_fixed_point, proof_delta, verify_constant_bound, ConstantBound, SearchOptions,
};
use crate::mechanisms::{
    check_balanced, solve_subgood, supporting_clause_prices, verify_subgood, PriceVector,
};
use crate::montecarlo::estimate;
use crate::rsg::{mirror_sides_exact, mirror_sides_mc, Irsg};
use crate::valuations::{ItemSet, ValuationSpec};

/// Profile cap for `balance-check`, which enumerates allocations per
/// profile.
pub const MAX_BALANCE_PROFILES: u128 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Estimate E[OPT], E[ALG] and their ratio for one mechanism.
    Simulate,
    /// Expected optimal welfare.
    Opt,
    /// Both sides of the mirror inequality for a score generator.
    MirrorCheck,
    /// Balancedness of a pricing rule on every valuation profile.
    BalanceCheck,
    /// Subgood prices and randomization for one support valuation.
    Subgood,
    /// Fixed-point search for a grid score generator, then the constant
    /// bound audit.
    FixedPoint,
    /// Every (instance, mechanism) pair of the config.
    Suite,
}

#[derive(Clone, Debug, Parser)]
#[command(
    name = "prophet-lab",
    version,
    about = "Sequential combinatorial auction experiments"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Grid step for `fixed-point`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

/// Exit code for an error: 3 for capacity, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_capacity() {
        3
    } else {
        2
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    match run(&cli) {
        Ok(()) => {
            eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}

/// Loads the config, applies flag overrides and writes the output.
pub fn run(cli: &Cli) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.samples = Some(n);
    }
    if let Some(e) = cli.epsilon {
        cfg.epsilon = Some(e);
    }
    if let Some(k) = cli.max_iters {
        cfg.max_iters = Some(k);
    }
    if let Some(t) = cli.tolerance {
        cfg.tolerance = Some(t);
    }
    cfg.validate()?;
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    let format = cli
        .format
        .or(cfg.format)
        .unwrap_or_else(|| default_format(cli.command, out.as_deref()));

    let text = match cli.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Parameter(format!("worker pool: {e}")))?;
            pool.install(|| render(cli.command, &cfg, format))?
        }
        None => render(cli.command, &cfg, format)?,
    };
    match out {
        Some(path) => fs::write(&path, text).map_err(|source| Error::Io { path, source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn default_format(cmd: Command, out: Option<&Path>) -> OutputFormat {
    match out.and_then(Path::extension).and_then(|e| e.to_str()) {
        Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        _ if cmd == Command::Suite => OutputFormat::Csv,
        _ => OutputFormat::Json,
    }
}

/// Runs `cmd` and renders its result.
pub fn render(cmd: Command, cfg: &ExperimentConfig, format: OutputFormat) -> Result<String> {
    match cmd {
        Command::Simulate => {
            let r = estimate_ratio(cfg)?;
            eprintln!("evaluation time: {:.3} s", r.wall_time.as_secs_f64());
            match format {
                OutputFormat::Json => json(&r),
                OutputFormat::Csv => rows_to_csv(&[ReportRow::from(&r)]),
            }
        }
        Command::Suite => {
            if cfg.instances.is_empty() {
                return Err(Error::Parameter("suite needs at least one instance".into()));
            }
            let rows = run_suite(&cfg.instances, &cfg.mechanisms, cfg);
            match format {
                OutputFormat::Json => json(&rows),
                OutputFormat::Csv => rows_to_csv(&rows),
            }
        }
        Command::Opt => emit(&opt(cfg)?, format),
        Command::MirrorCheck => emit(&mirror(cfg)?, format),
        Command::BalanceCheck => {
            let r = balance(cfg)?;
            match format {
                OutputFormat::Json => json(&r),
                OutputFormat::Csv => csv_rows(&r.profiles),
            }
        }
        Command::Subgood => {
            let r = subgood(cfg)?;
            match format {
                OutputFormat::Json => json(&r),
                OutputFormat::Csv => csv_rows(&[SubgoodRow::from(&r)]),
            }
        }
        Command::FixedPoint => {
            let r = fixed_point(cfg)?;
            match format {
                OutputFormat::Json => json(&r),
                OutputFormat::Csv => csv_rows(&[FixedPointRow::from(&r)]),
            }
        }
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn emit<T: Serialize>(value: &T, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => json(value),
        OutputFormat::Csv => csv_rows(std::slice::from_ref(value)),
    }
}

fn joined(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptReport {
    pub instance: String,
    pub mode: Mode,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    pub expected_opt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

fn opt(cfg: &ExperimentConfig) -> Result<OptReport> {
    let path = cfg.instance_path()?;
    let inst = load_instance(path)?;
    let (expected_opt, half_width, samples) = match cfg.mode {
        Mode::Exact => (expected_optimal_welfare(&inst)?, None, None),
        Mode::MonteCarlo => {
            let n = cfg.samples_or_default();
            let [e] = estimate(cfg.seed, n, |rng| {
                let profile = inst.sample_profile(rng);
                Ok([optimal_allocation(&Profile::new(inst.profile_tables(&profile)))?.1])
            })?;
            (e.mean, Some(e.half_width), Some(n))
        }
    };
    Ok(OptReport {
        instance: label(path),
        mode: cfg.mode,
        seed: cfg.seed,
        samples,
        expected_opt,
        half_width,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MirrorReport {
    pub instance: String,
    pub mode: Mode,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// `E[ALG]` in identity order.
    pub lhs: f64,
    /// `½·Σ_i E[v_i(W_i)]`.
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs_half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_half_width: Option<f64>,
    /// Exact: `lhs ≥ rhs − 1e-9`. Monte Carlo: the gap is within the
    /// combined half-widths.
    pub holds: bool,
}

fn irsg_for(cfg: &ExperimentConfig, inst: &crate::valuations::Instance) -> Result<Irsg> {
    let path = cfg
        .irsg
        .as_deref()
        .ok_or_else(|| Error::Parameter("config names no irsg file".into()))?;
    load_irsg(path, inst)
}

fn mirror(cfg: &ExperimentConfig) -> Result<MirrorReport> {
    let path = cfg.instance_path()?;
    let inst = load_instance(path)?;
    let irsg = irsg_for(cfg, &inst)?;
    let base = MirrorReport {
        instance: label(path),
        mode: cfg.mode,
        seed: cfg.seed,
        samples: None,
        lhs: 0.0,
        rhs: 0.0,
        lhs_half_width: None,
        rhs_half_width: None,
        holds: false,
    };
    Ok(match cfg.mode {
        Mode::Exact => {
            let s = mirror_sides_exact(&inst, &irsg)?;
            MirrorReport {
                lhs: s.lhs,
                rhs: s.rhs,
                holds: s.holds(),
                ..base
            }
        }
        Mode::MonteCarlo => {
            let n = cfg.samples_or_default();
            let e = mirror_sides_mc(&inst, &irsg, n, cfg.seed)?;
            MirrorReport {
                samples: Some(n),
                lhs: e.lhs.mean,
                rhs: e.rhs.mean,
                lhs_half_width: Some(e.lhs.half_width),
                rhs_half_width: Some(e.rhs.half_width),
                holds: e.lhs.mean >= e.rhs.mean - e.lhs.half_width - e.rhs.half_width,
                ..base
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceRow {
    /// Support index per bidder, space-separated.
    pub profile: String,
    pub probability: f64,
    pub prices: String,
    pub cond1_ok: bool,
    pub cond2_ok: bool,
    pub cond1_slack: f64,
    pub cond2_slack: f64,
    pub allocations_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceSummary {
    pub instance: String,
    /// `supporting-clause` or `prices`.
    pub rule: &'static str,
    pub alpha: f64,
    pub beta: f64,
    pub all_balanced: bool,
    pub profiles: Vec<BalanceRow>,
}

fn balance(cfg: &ExperimentConfig) -> Result<BalanceSummary> {
    let path = cfg.instance_path()?;
    let inst = load_instance(path)?;
    inst.require_profiles(MAX_BALANCE_PROFILES)?;
    let fixed = cfg.prices.clone().map(PriceVector::new).transpose()?;
    if let Some(p) = &fixed {
        if p.len() != inst.m() {
            return Err(Error::Parameter(format!(
                "{} prices for {} items",
                p.len(),
                inst.m()
            )));
        }
    }
    let mut rows = Vec::new();
    for (profile, probability) in inst.profiles() {
        let tables = inst.profile_tables(&profile);
        let prof = Profile::new(tables);
        let prices = match &fixed {
            Some(p) => p.clone(),
            None => {
                let (opt, _) = optimal_allocation(&prof)?;
                let specs: Vec<&ValuationSpec> = profile
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| inst.valuation(i, k))
                    .collect();
                supporting_clause_prices(&specs, &opt, inst.m())?
            }
        };
        let r = check_balanced(&prof, &prices, cfg.alpha, cfg.beta)?;
        rows.push(BalanceRow {
            profile: profile
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" "),
            probability,
            prices: joined(&prices),
            cond1_ok: r.cond1_ok,
            cond2_ok: r.cond2_ok,
            cond1_slack: r.cond1_slack,
            cond2_slack: r.cond2_slack,
            allocations_checked: r.allocations_checked,
        });
    }
    Ok(BalanceSummary {
        instance: label(path),
        rule: if fixed.is_some() {
            "prices"
        } else {
            "supporting-clause"
        },
        alpha: cfg.alpha,
        beta: cfg.beta,
        all_balanced: rows.iter().all(|r| r.cond1_ok && r.cond2_ok),
        profiles: rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgoodReport {
    pub instance: String,
    pub bidder: usize,
    pub support: usize,
    pub items: ItemSet,
    pub resolution: usize,
    pub prices: Vec<f64>,
    /// `(T, δ_T)` pairs over subsets of `items`.
    pub delta: Vec<(ItemSet, f64)>,
    pub guarantee: f64,
    pub alpha_achieved: Option<f64>,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct SubgoodRow {
    instance: String,
    bidder: usize,
    support: usize,
    items: String,
    prices: String,
    delta: String,
    guarantee: f64,
    alpha_achieved: Option<f64>,
    slack: f64,
}

impl From<&SubgoodReport> for SubgoodRow {
    fn from(r: &SubgoodReport) -> Self {
        SubgoodRow {
            instance: r.instance.clone(),
            bidder: r.bidder,
            support: r.support,
            items: r.items.to_string(),
            prices: joined(&r.prices),
            delta: r
                .delta
                .iter()
                .map(|(t, q)| format!("{t}:{q}"))
                .collect::<Vec<_>>()
                .join(" "),
            guarantee: r.guarantee,
            alpha_achieved: r.alpha_achieved,
            slack: r.slack,
        }
    }
}

fn subgood(cfg: &ExperimentConfig) -> Result<SubgoodReport> {
    let path = cfg.instance_path()?;
    let inst = load_instance(path)?;
    if cfg.bidder >= inst.n() || cfg.support >= inst.support_len(cfg.bidder) {
        return Err(Error::Parameter(format!(
            "no support entry {} for bidder {}",
            cfg.support, cfg.bidder
        )));
    }
    if cfg.resolution == 0 {
        return Err(Error::Parameter("resolution must be at least 1".into()));
    }
    let items = match &cfg.items {
        Some(list) => {
            if let Some(j) = list.iter().find(|&&j| j >= inst.m()) {
                return Err(Error::Parameter(format!("item {j} out of range")));
            }
            ItemSet::from_items(list.iter().copied())
        }
        None => ItemSet::full(inst.m()),
    };
    let v = inst.table(cfg.bidder, cfg.support);
    let sol = solve_subgood(v, items, cfg.resolution)?;
    let slack = verify_subgood(&sol, v, items)?;
    Ok(SubgoodReport {
        instance: label(path),
        bidder: cfg.bidder,
        support: cfg.support,
        items,
        resolution: cfg.resolution,
        prices: sol.prices,
        delta: sol.delta,
        guarantee: sol.guarantee,
        alpha_achieved: sol.alpha_achieved,
        slack,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub instance: String,
    pub grid_step: f64,
    pub target_epsilon: f64,
    pub levels: usize,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// Present when the search converged.
    pub bound: Option<ConstantBound>,
    pub irsg: Irsg,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct FixedPointRow {
    instance: String,
    grid_step: f64,
    target_epsilon: f64,
    levels: usize,
    iterations: usize,
    converged: bool,
    residual: f64,
    expected_alg: Option<f64>,
    expected_opt: Option<f64>,
    bound_holds: Option<bool>,
    delta_max: Option<f64>,
    delta_ok: Option<bool>,
    chain_holds: Option<bool>,
}

impl From<&FixedPointReport> for FixedPointRow {
    fn from(r: &FixedPointReport) -> Self {
        let b = r.bound.as_ref();
        FixedPointRow {
            instance: r.instance.clone(),
            grid_step: r.grid_step,
            target_epsilon: r.target_epsilon,
            levels: r.levels,
            iterations: r.iterations,
            converged: r.converged,
            residual: r.residual,
            expected_alg: b.map(|b| b.expected_alg),
            expected_opt: b.map(|b| b.expected_opt),
            bound_holds: b.map(|b| b.bound_holds),
            delta_max: b.map(|b| b.delta_max),
            delta_ok: b.map(|b| b.delta_ok),
            chain_holds: b.map(|b| b.chain_holds),
        }
    }
}

fn fixed_point(cfg: &ExperimentConfig) -> Result<FixedPointReport> {
    let path = cfg.instance_path()?;
    let inst = load_instance(path)?;
    let (grid_step, target_epsilon) = match (cfg.epsilon, cfg.target_epsilon) {
        (Some(step), t) => (step, t.unwrap_or(step)),
        (None, Some(t)) => {
            let opt = expected_optimal_welfare(&inst)?;
            (proof_delta(t, opt, inst.m()), t)
        }
        (None, None) => {
            return Err(Error::Parameter(
                "fixed-point needs epsilon or target_epsilon".into(),
            ))
        }
    };
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::Parameter(format!(
            "grid step {grid_step} must be positive (is E[OPT] zero?)"
        )));
    }
    let defaults = SearchOptions::default();
    let opts = SearchOptions {
        max_iters: cfg.max_iters.unwrap_or(defaults.max_iters),
        tolerance: cfg.tolerance.unwrap_or(defaults.tolerance),
    };
    let r = find_fixed_point(&inst, grid_step, opts)?;
    let bound = if r.converged {
        Some(verify_constant_bound(
            &inst,
            &r.x,
            target_epsilon,
            opts.tolerance,
        )?)
    } else {
        None
    };
    Ok(FixedPointReport {
        instance: label(path),
        grid_step,
        target_epsilon,
        levels: r.x.grid.levels,
        iterations: r.iterations,
        converged: r.converged,
        residual: r.residual,
        bound,
        irsg: r.x.to_irsg(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::capacity("valuation profiles", 2, 1)), 3);
        assert_eq!(exit_code(&Error::Parameter("x".into())), 2);
    }

    #[test]
    fn parse_flags() {
        let cli = Cli::try_parse_from([
            "prophet-lab",
            "mirror-check",
            "--config",
            "c.json",
            "--seed",
            "7",
            "--format",
            "csv",
        ])
        .unwrap();
        assert_eq!(cli.command, Command::MirrorCheck);
        assert_eq!(cli.seed, Some(7));
        assert_eq!(cli.format, Some(OutputFormat::Csv));
        assert!(Cli::try_parse_from(["prophet-lab", "bogus", "--config", "c"]).is_err());
        assert!(Cli::try_parse_from(["prophet-lab", "opt"]).is_err());
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            default_format(Command::Opt, Some(Path::new("a.csv"))),
            OutputFormat::Csv
        );
        assert_eq!(default_format(Command::Suite, None), OutputFormat::Csv);
        assert_eq!(default_format(Command::Opt, None), OutputFormat::Json);
    }
}
