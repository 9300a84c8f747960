//! Convergence studies: sweep schemes and step counts, tabulate errors.

use std::fmt::Write as _;

use sdefw_core::extrapolation::solve_weights;
use sdefw_core::models::build_model;
use sdefw_core::numerics::loglog_slope;
use sdefw_core::scheme_engine::{
    estimate, quadrature_expectation, EstimateOptions, EstimateReport, OpCounts, QuadratureOptions,
    CSV_HEADER,
};

use crate::config::{Mode, Reference, StudyConfig};
use crate::error::{CliError, Result};

/// Errors below this are round-off and are not fitted.
pub const ERROR_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct StudyTable {
    pub reference: Option<f64>,
    pub reports: Vec<EstimateReport>,
}

/// One fitted error series.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub scheme: String,
    pub n: Vec<usize>,
    pub error: Vec<f64>,
}

impl StudyTable {
    pub fn header() -> String {
        format!("{CSV_HEADER},abs_error")
    }

    /// Header, then for every (scheme, n) the summary row and its level rows,
    /// each with the absolute error against the reference (empty without one).
    pub fn to_csv(&self) -> String {
        let mut out = Self::header();
        out.push('\n');
        for r in &self.reports {
            let values = std::iter::once(r.estimate).chain(r.level_means.iter().copied());
            for (line, v) in r.csv_rows().lines().zip(values) {
                let err = self
                    .reference
                    .map(|x| (v - x).abs().to_string())
                    .unwrap_or_default();
                let _ = writeln!(out, "{line},{err}");
            }
        }
        out
    }

    /// Error against `n` for each scheme, in table order.
    pub fn series(&self) -> Vec<Series> {
        let Some(reference) = self.reference else {
            return Vec::new();
        };
        let mut out: Vec<Series> = Vec::new();
        for r in &self.reports {
            let err = (r.estimate - reference).abs();
            match out.iter_mut().find(|s| s.scheme == r.scheme) {
                Some(s) => {
                    s.n.push(r.n);
                    s.error.push(err);
                }
                None => out.push(Series {
                    scheme: r.scheme.clone(),
                    n: vec![r.n],
                    error: vec![err],
                }),
            }
        }
        out
    }

    /// Fitted log-log slope of error against `n` per scheme.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        match self.reference {
            Some(r) => {
                let _ = writeln!(s, "reference {r}");
            }
            None => {
                let _ = writeln!(s, "no reference value: errors and slopes not computed");
            }
        }
        for series in self.series() {
            let _ = write!(s, "{}:", series.scheme);
            for (n, e) in series.n.iter().zip(&series.error) {
                let _ = write!(s, " n={n} err={e:.3e}");
            }
            match fit(&series) {
                Some(slope) => {
                    let _ = writeln!(s, " slope {slope:.2}");
                }
                None => {
                    let _ = writeln!(s, " slope n/a");
                }
            }
        }
        s
    }
}

fn fit(s: &Series) -> Option<f64> {
    let (n, e): (Vec<f64>, Vec<f64>) =
        s.n.iter()
            .zip(&s.error)
            .filter(|(_, &e)| e >= ERROR_FLOOR)
            .map(|(&n, &e)| (n as f64, e))
            .unzip();
    loglog_slope(&n, &e)
}

/// Plot-ready text and the warnings for skipped series.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotData {
    pub text: String,
    pub warnings: Vec<String>,
}

/// Two columns `log10(n) log10(error)` per scheme, headed by
/// `# <scheme> slope <s>`; blocks separated by a blank line.
pub fn emit_plotdata(series: &[Series]) -> PlotData {
    let mut data = PlotData::default();
    for s in series {
        let points: Vec<(usize, f64)> =
            s.n.iter()
                .zip(&s.error)
                .filter(|(_, &e)| e >= ERROR_FLOOR)
                .map(|(&n, &e)| (n, e))
                .collect();
        let Some(slope) = (points.len() >= 2).then(|| fit(s)).flatten() else {
            data.warnings.push(format!(
                "{}: fewer than 2 usable points, series skipped",
                s.scheme
            ));
            continue;
        };
        if !data.text.is_empty() {
            data.text.push('\n');
        }
        let _ = writeln!(data.text, "# {} slope {slope:.2}", s.scheme);
        for (n, e) in points {
            let _ = writeln!(data.text, "{:.6} {:.6}", (n as f64).log10(), e.log10());
        }
    }
    data
}

/// Runs every (scheme, n) of the configuration.
pub fn run_study(cfg: &StudyConfig, workers: Option<usize>) -> Result<StudyTable> {
    if cfg.mode == Mode::AlgebraVerify {
        return Err(CliError::usage("mode", "algebra-verify has no study table"));
    }
    let model = build_model::<f64>(&cfg.model, &cfg.params)?;
    let reference = match cfg.reference {
        None => None,
        Some(Reference::Value(v)) => Some(v),
        Some(Reference::Exact) => Some(model.exact_expectation().ok_or_else(|| {
            CliError::usage(
                "reference",
                format!("{} has no closed-form expectation", cfg.model),
            )
        })?),
    };
    let mut reports = Vec::new();
    for thetas in &cfg.schemes {
        let scheme = solve_weights::<f64>(thetas)?;
        for &n in &cfg.n {
            let report = match cfg.mode {
                Mode::QuadratureOracle => {
                    let start = std::time::Instant::now();
                    let opts = QuadratureOptions {
                        nodes: cfg.nodes,
                        ..QuadratureOptions::default()
                    };
                    let q = quadrature_expectation(model.as_ref(), &scheme, n, &opts)?;
                    EstimateReport {
                        model: cfg.model.clone(),
                        scheme: scheme.label(),
                        thetas: thetas.clone(),
                        weights: scheme.weights().to_vec(),
                        n,
                        paths: 0,
                        aborted: 0,
                        rng: format!("quadrature:{}", cfg.nodes),
                        level_stderr: vec![0.0; q.level_values.len()],
                        level_means: q.level_values,
                        estimate: q.estimate,
                        stderr: 0.0,
                        elapsed_s: start.elapsed().as_secs_f64(),
                        ops: OpCounts {
                            unit_ops: q.leaves as u64,
                            ..OpCounts::default()
                        },
                    }
                }
                _ => {
                    let opts = EstimateOptions {
                        coupling: cfg.coupling,
                        workers,
                    };
                    estimate(model.as_ref(), &scheme, n, cfg.paths, &cfg.rng, &opts)?
                }
            };
            reports.push(report);
        }
    }
    Ok(StudyTable { reference, reports })
}

/// Drops the `elapsed_s` column, for comparing reruns.
pub fn without_elapsed(csv: &str) -> String {
    let col = CSV_HEADER
        .split(',')
        .position(|c| c == "elapsed_s")
        .expect("elapsed column");
    let mut out = String::new();
    for line in csv.lines() {
        // labels may be quoted and contain commas; split outside quotes
        let mut fields = Vec::new();
        let (mut cur, mut quoted) = (String::new(), false);
        for ch in line.chars() {
            match ch {
                '"' => {
                    quoted = !quoted;
                    cur.push(ch);
                }
                ',' if !quoted => fields.push(std::mem::take(&mut cur)),
                _ => cur.push(ch),
            }
        }
        fields.push(cur);
        if fields.len() > col {
            fields.remove(col);
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
