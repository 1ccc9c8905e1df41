use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use pascu_core::certify::PlotData;
use pascu_core::params::HypothesisReport;
use pascu_core::report;
use pascu_core::{CertificationReport, Margin, ParameterSet, TheoremId};
use serde::Serialize;

use crate::config::Format;

#[derive(Debug, Clone, Serialize)]
pub struct BetaOutput {
    pub kernel: String,
    pub params: ParameterSet,
    pub beta: f64,
    pub beta_integral: f64,
    pub beta_series: f64,
    pub integral: f64,
    pub series: f64,
    pub beta_closed_form: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutput {
    pub kernel: String,
    pub params: ParameterSet,
    pub hypotheses: HypothesisReport,
    pub condition_margins: BTreeMap<String, Margin>,
    pub notes: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentsOutput {
    pub kernel: String,
    pub moments: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub kernel: String,
    pub params: ParameterSet,
    pub report: Option<CertificationReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub points: Vec<SweepPoint>,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn margin(m: Option<&Margin>) -> String {
    m.map(ToString::to_string).unwrap_or_else(|| Margin::NotApplicable.to_string())
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn param_cells(p: &ParameterSet) -> Vec<String> {
    vec![num(p.alpha), num(p.gamma), num(p.mu), num(p.nu), num(p.sigma), num(p.xi)]
}

const SUMMARY_HEADER: [&str; 16] = [
    "kernel",
    "alpha",
    "gamma",
    "mu",
    "nu",
    "sigma",
    "xi",
    "beta",
    "m_min",
    "monotone",
    "growth",
    "membership_margin",
    "sharpness_residual",
    "order",
    "passed",
    "error",
];

fn summary_row(p: &SweepPoint) -> Vec<String> {
    let mut row = vec![p.kernel.clone()];
    match &p.report {
        Some(r) => {
            row.extend(param_cells(&r.params));
            let m = &r.condition_margins;
            row.extend([
                opt(r.params.beta),
                num(r.m_functional.min),
                margin(m.get(TheoremId::Monotone.name())),
                margin(m.get(TheoremId::Growth.name())),
                num(r.membership.min_margin),
                num(r.sharpness.residual),
                r.order.to_string(),
                r.passed.to_string(),
                String::new(),
            ]);
        }
        None => {
            row.extend(param_cells(&p.params));
            row.extend(std::iter::repeat_n(String::new(), 6));
            row.extend(["false".to_string(), p.error.clone().unwrap_or_default()]);
        }
    }
    row
}

pub fn summary_csv(points: &[SweepPoint]) -> Result<String> {
    csv_string(&SUMMARY_HEADER, &points.iter().map(summary_row).collect::<Vec<_>>())
}

/// Renders a value in the requested format; `csv` falls back to `rows`.
pub fn render<T: Serialize>(value: &T, format: Format, csv_rows: impl FnOnce() -> Result<String>) -> Result<String> {
    Ok(match format {
        Format::Json => report::to_json(value)? + "\n",
        Format::Text => report::to_text(value)?,
        Format::Csv => csv_rows()?,
    })
}

pub fn beta_csv(b: &BetaOutput) -> Result<String> {
    let mut row = vec![b.kernel.clone()];
    row.extend(param_cells(&b.params));
    row.extend([num(b.beta), num(b.beta_integral), num(b.beta_series), opt(b.beta_closed_form)]);
    csv_string(
        &[
            "kernel",
            "alpha",
            "gamma",
            "mu",
            "nu",
            "sigma",
            "xi",
            "beta",
            "beta_integral",
            "beta_series",
            "beta_closed_form",
        ],
        &[row],
    )
}

pub fn check_csv(c: &CheckOutput) -> Result<String> {
    let mut rows: Vec<Vec<String>> = c
        .hypotheses
        .hypotheses
        .iter()
        .map(|h| {
            vec![
                c.hypotheses.theorem.name().to_string(),
                h.name.clone(),
                num(h.value),
                num(h.margin),
                h.satisfied.to_string(),
            ]
        })
        .collect();
    for (name, m) in &c.condition_margins {
        let sat = m.is_satisfied(0.0).map(|b| b.to_string()).unwrap_or_else(|| Margin::NotApplicable.to_string());
        rows.push(vec!["condition".into(), name.clone(), String::new(), m.to_string(), sat]);
    }
    csv_string(&["theorem", "name", "value", "margin", "satisfied"], &rows)
}

pub fn moments_csv(m: &MomentsOutput) -> Result<String> {
    let rows: Vec<Vec<String>> = m.moments.iter().enumerate().map(|(n, t)| vec![n.to_string(), num(*t)]).collect();
    csv_string(&["n", "tau"], &rows)
}

/// Two CSV blocks separated by a blank line: curves over `t`, then the
/// outermost circle profile. The first column indexes the report.
pub fn plot_csv(plots: &[(usize, &PlotData)]) -> Result<String> {
    let mut curves = Vec::new();
    let mut circle = Vec::new();
    for (i, p) in plots {
        for r in &p.curves {
            curves.push(vec![
                i.to_string(),
                num(r.t),
                num(r.pi),
                num(r.l_at_argmin),
                r.monotone.to_string(),
                r.growth.to_string(),
            ]);
        }
        for c in &p.circle {
            circle.push(vec![i.to_string(), num(c.theta), num(c.re_ratio)]);
        }
    }
    let a = csv_string(&["report", "t", "pi", "l_at_argmin", "monotone", "growth"], &curves)?;
    let b = csv_string(&["report", "theta", "re_ratio"], &circle)?;
    Ok(format!("{a}\n{b}"))
}

/// Writes through a temporary file in the target directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
