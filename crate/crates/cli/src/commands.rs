use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use tasep_core::bethe::transition_matrix;
use tasep_core::oracle::gillespie;
use tasep_core::verify::{self, Suite, SuiteReport};

use crate::config::{Format, Job, JobConfig};
use crate::error::CliError;
use crate::output::{write_rows, Row};

/// Command-line overrides of the config's output section.
#[derive(Debug, Clone, Default)]
pub struct OutputOverride {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// One row per target, in target order (window states in sorted order).
pub fn prob_rows(job: &Job) -> Result<Vec<Row>, CliError> {
    let targets = match &job.targets {
        Some(list) => list.clone(),
        None => verify::window(&job.initial, &job.rates, job.time)?
            .states()
            .to_vec(),
    };
    let results = transition_matrix(&job.initial, &targets, job.time, &job.rates, &job.params)?;
    Ok(targets
        .into_iter()
        .zip(results)
        .map(|(s, r)| Row {
            positions: s.positions,
            species: s.species,
            value: r.value,
            est_error: r.est_error,
            nodes_used: r.nodes_used,
            count: None,
        })
        .collect())
}

/// Empirical frequencies of `n_samples` trajectories. With explicit targets
/// every target gets a row; otherwise every observed state does.
pub fn simulate_rows(job: &Job, n_samples: u64, seed: u64) -> Result<Vec<Row>, CliError> {
    if n_samples == 0 {
        return Err(CliError::Config("samples must be positive".into()));
    }
    let emp = gillespie(&job.initial, &job.rates, job.time, n_samples, seed);
    let states = match &job.targets {
        Some(list) => list.clone(),
        None => emp.counts.keys().cloned().collect(),
    };
    let n = n_samples as f64;
    Ok(states
        .into_iter()
        .map(|s| {
            let count = emp.counts.get(&s).copied().unwrap_or(0);
            let p = count as f64 / n;
            Row {
                positions: s.positions,
                species: s.species,
                value: p,
                est_error: (p * (1.0 - p) / n).sqrt(),
                nodes_used: 0,
                count: Some(count),
            }
        })
        .collect())
}

fn emit(rows: &[Row], cfg: &JobConfig, ov: &OutputOverride) -> Result<(), CliError> {
    let format = ov.format.unwrap_or(cfg.output.format);
    match ov.path.as_ref().or(cfg.output.path.as_ref()) {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write_rows(rows, format, &mut w)?;
            w.flush()?;
        }
        None => write_rows(rows, format, io::stdout().lock())?,
    }
    Ok(())
}

pub fn cmd_prob(cfg: &JobConfig, ov: &OutputOverride) -> Result<(), CliError> {
    let rows = prob_rows(&cfg.resolve()?)?;
    emit(&rows, cfg, ov)
}

pub fn cmd_simulate(
    cfg: &JobConfig,
    n_samples: u64,
    seed: u64,
    ov: &OutputOverride,
) -> Result<(), CliError> {
    let rows = simulate_rows(&cfg.resolve()?, n_samples, seed)?;
    emit(&rows, cfg, ov)
}

/// Particle counts each suite accepts.
pub fn supported_sizes(suite: Suite) -> std::ops::RangeInclusive<usize> {
    match suite {
        Suite::YangBaxter => 3..=4,
        Suite::WellDefined | Suite::Boundary => 2..=4,
        Suite::Oracle | Suite::Stochastic => 1..=3,
    }
}

pub fn default_trials(suite: Suite) -> usize {
    match suite {
        Suite::YangBaxter | Suite::WellDefined => 100,
        Suite::Boundary => 50,
        Suite::Oracle | Suite::Stochastic => 20,
    }
}

pub fn run_verify(
    suite: Suite,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<SuiteReport, CliError> {
    let sizes = supported_sizes(suite);
    if !sizes.contains(&n) {
        return Err(CliError::Config(format!(
            "suite {suite} supports N in {}..={}, got {n}",
            sizes.start(),
            sizes.end()
        )));
    }
    if trials == 0 {
        return Err(CliError::Config("trials must be positive".into()));
    }
    Ok(verify::run_suite(suite, n, trials, seed)?)
}

pub fn render_report(report: &SuiteReport) -> String {
    let mut text = format!(
        "suite {} N={} trials={}\n",
        report.suite, report.n, report.trials
    );
    for (name, value) in &report.details {
        text.push_str(&format!("  {name}: {value:.3e}\n"));
    }
    text.push_str(&format!(
        "max residual {:.3e} (tolerance {:.0e}): {}\n",
        report.max_residual,
        report.tolerance,
        if report.passed() { "PASS" } else { "FAIL" }
    ));
    text
}

/// Prints the report, optionally saves it as JSON, and fails on a residual
/// above tolerance.
pub fn cmd_verify(
    suite: Suite,
    n: usize,
    trials: usize,
    seed: u64,
    out: Option<&PathBuf>,
) -> Result<SuiteReport, CliError> {
    let report = run_verify(suite, n, trials, seed)?;
    print!("{}", render_report(&report));
    if let Some(path) = out {
        let details: serde_json::Map<String, serde_json::Value> = report
            .details
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        let json = serde_json::json!({
            "suite": report.suite.name(),
            "n": report.n,
            "trials": report.trials,
            "seed": seed,
            "max_residual": report.max_residual,
            "tolerance": report.tolerance,
            "passed": report.passed(),
            "details": details,
        });
        let text =
            serde_json::to_string_pretty(&json).map_err(|e| CliError::Output(e.to_string()))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    }
    if report.passed() {
        Ok(report)
    } else {
        Err(CliError::VerifyFailed)
    }
}
