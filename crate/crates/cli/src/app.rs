use std::collections::BTreeMap;

use anyhow::{anyhow, Result};
use pascu_core::certify::{check_growth_condition, check_monotone_condition, condition_grid, Margin};
use pascu_core::kernels::Family;
use pascu_core::params::hypothesis_check;
use pascu_core::{beta0_hohlov_closed_form, beta_sharp, certify, TheoremId};
use rayon::prelude::*;

use crate::config::{Command, ConfigError, RunConfig};
use crate::output::{self, BetaOutput, CheckOutput, MomentsOutput, SweepOutput, SweepPoint};

/// What a run produced: the rendered report, optional plot CSV, and whether
/// every requested check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub plot: Option<String>,
    pub passed: bool,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let points = if cfg.command == Command::Moments { Vec::new() } else { cfg.points()? };
    let format = cfg.output.format;
    match cfg.command {
        Command::Beta => {
            let p = single(&points)?;
            let b = beta_sharp(&p.kernel, &p.params)?;
            let closed = match p.kernel.family() {
                Family::Hohlov { a, b, c } if *a == 1.0 && p.params.xi > 0.0 => {
                    beta0_hohlov_closed_form(&p.params, *b, *c).ok()
                }
                _ => None,
            };
            let out = BetaOutput {
                kernel: p.kernel.to_string(),
                params: p.params.with_beta(b.beta),
                beta: b.beta,
                beta_integral: b.beta_integral,
                beta_series: b.beta_series,
                integral: b.integral,
                series: b.series,
                beta_closed_form: closed,
            };
            let report = output::render(&out, format, || output::beta_csv(&out))?;
            Ok(Outcome { report, plot: None, passed: true })
        }
        Command::Certify => {
            let p = single(&points)?;
            let r = certify(&p.kernel, &p.params, &cfg.certify_options())?;
            let plot = r.plot.as_ref().map(|d| output::plot_csv(&[(0, d)])).transpose()?;
            let passed = r.passed;
            let point = SweepPoint { kernel: p.kernel.to_string(), params: r.params, report: Some(r), error: None };
            let report = output::render(point.report.as_ref().unwrap(), format, || {
                output::summary_csv(std::slice::from_ref(&point))
            })?;
            Ok(Outcome { report, plot, passed })
        }
        Command::Check => {
            let p = single(&points)?;
            let out = check(cfg, &p.kernel, &p.params)?;
            let report = output::render(&out, format, || output::check_csv(&out))?;
            Ok(Outcome { report, plot: None, passed: out.passed })
        }
        Command::Moments => {
            let kernel = cfg.kernels()?.remove(0);
            let out = MomentsOutput { kernel: kernel.to_string(), moments: kernel.moments(cfg.moment_count())? };
            let report = output::render(&out, format, || output::moments_csv(&out))?;
            Ok(Outcome { report, plot: None, passed: true })
        }
        Command::Sweep => {
            let opts = cfg.certify_options();
            let results: Vec<SweepPoint> = points
                .par_iter()
                .map(|p| match certify(&p.kernel, &p.params, &opts) {
                    Ok(r) => {
                        SweepPoint { kernel: p.kernel.to_string(), params: r.params, report: Some(r), error: None }
                    }
                    Err(e) => SweepPoint {
                        kernel: p.kernel.to_string(),
                        params: p.params,
                        report: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            let passed = results.iter().all(|p| p.report.as_ref().is_some_and(|r| r.passed));
            let plots: Vec<_> = results
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.report.as_ref().and_then(|r| r.plot.as_ref()).map(|d| (i, d)))
                .collect();
            let plot = if opts.plot_data { Some(output::plot_csv(&plots)?) } else { None };
            let out = SweepOutput { points: results };
            let report = output::render(&out, format, || output::summary_csv(&out.points))?;
            Ok(Outcome { report, plot, passed })
        }
    }
}

fn single(points: &[crate::config::Point]) -> Result<&crate::config::Point> {
    match points {
        [p] => Ok(p),
        _ => Err(anyhow!(ConfigError::new("", "expected a single parameter point"))),
    }
}

/// Hypotheses of the selected theorem and both sufficient conditions at
/// sharp β. Passes when the hypotheses hold and at least one condition
/// has a nonnegative margin (within the tolerance).
fn check(cfg: &RunConfig, kernel: &pascu_core::KernelSpec, params: &pascu_core::ParameterSet) -> Result<CheckOutput> {
    let theorem = cfg.theorem_for(kernel);
    // A theorem that does not fit the kernel family is a usage error.
    hypothesis_check(theorem, params, kernel).map_err(|e| ConfigError::new("theorem", e.to_string()))?;
    let beta = beta_sharp(kernel, params)?;
    let params = params.with_beta(beta.beta);
    let hypotheses = hypothesis_check(theorem, &params, kernel)?;
    let grid = condition_grid();
    let tol = cfg.certify_options().tolerance;
    let mut notes = Vec::new();
    let mut margins = BTreeMap::new();
    for (name, r) in [
        (TheoremId::Monotone.name(), check_monotone_condition(kernel, &params, &grid)),
        (TheoremId::Growth.name(), check_growth_condition(kernel, &params, &grid)),
    ] {
        let m = r.unwrap_or_else(|e| {
            notes.push(format!("{name}: {e}"));
            Margin::NotApplicable
        });
        margins.insert(name.to_string(), m);
    }
    let condition_holds = margins.values().any(|m| m.is_satisfied(tol) == Some(true));
    let passed = hypotheses.all_satisfied() && condition_holds;
    Ok(CheckOutput { kernel: kernel.to_string(), params, hypotheses, condition_margins: margins, notes, passed })
}
