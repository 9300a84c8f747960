//! Extrapolated Ninomiya-Victoir path sampling and estimation.

mod cost;
mod oracle;

pub use cost::{cost_estimate, OpCounts};
pub use oracle::{
    quadrature_expectation, QuadratureOptions, QuadratureReport, MAX_GAUSSIAN_DIMS, MAX_STEPS,
};

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrapolation::SchemeSpec;
use crate::models::SdeModel;
use crate::numerics::CompensatedSum;
use crate::ode_flows::RkWorkspace;
use crate::randomness::{Coupling, LevelIncrements, PathDrawer, PointSource, RandomLayout};
use crate::scalar::{Coefficient, Real};

/// Largest fraction of aborted paths an estimate tolerates.
pub const MAX_ABORT_FRACTION: f64 = 1e-3;

/// Paths per work item; fixed so the reduction tree does not depend on the
/// number of workers.
pub const CHUNK_PATHS: u64 = 1024;

/// One time step at level `theta`: `theta` repetitions of the `d+1` flows,
/// ascending when `forward`, descending otherwise. Repetition `r` of step
/// `j` reads column `r * n + j`.
#[allow(clippy::too_many_arguments)]
pub fn nv_step<R: Real>(
    model: &(impl SdeModel<R> + ?Sized),
    x: &mut [R],
    level: &LevelIncrements<R>,
    n: usize,
    j: usize,
    forward: bool,
    ws: &mut RkWorkspace<R>,
    ops: &mut OpCounts,
) -> Result<()> {
    let d = model.noise_dim();
    for r in 0..level.theta() as usize {
        let col = r * n + j;
        ops.unit_ops += 1;
        for k in 0..=d {
            let i = if forward { k } else { d - k };
            ops.flow_solves += 1;
            model
                .flow(i, level.get(i, col), x, ws)
                .map_err(|e| Error::PathAbort {
                    theta: level.theta(),
                    step: j,
                    field: i,
                    cause: e.to_string(),
                })?;
        }
    }
    Ok(())
}

/// Payoff of each level for one path; all levels share the ordering bits.
pub fn sample_path<R: Real>(
    model: &(impl SdeModel<R> + ?Sized),
    lambda: &[bool],
    levels: &[LevelIncrements<R>],
    ws: &mut RkWorkspace<R>,
    ops: &mut OpCounts,
    out: &mut [f64],
) -> Result<()> {
    let n = lambda.len();
    ops.bernoulli += n as u64;
    let x0 = model.initial_state();
    for (level, q) in levels.iter().zip(out.iter_mut()) {
        ops.unit_ops += 5;
        let mut x = x0.clone();
        for (j, &forward) in lambda.iter().enumerate() {
            nv_step(model, &mut x, level, n, j, forward, ws, ops)?;
        }
        *q = model.payoff().eval(&x);
    }
    Ok(())
}

/// Estimator configuration beyond the scheme itself.
#[derive(Clone, Debug)]
pub struct EstimateOptions {
    pub coupling: Coupling,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            coupling: Coupling::Reuse,
            workers: None,
        }
    }
}

/// Result of one extrapolated estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub model: String,
    pub scheme: String,
    pub thetas: Vec<u32>,
    pub weights: Vec<f64>,
    pub n: usize,
    /// Requested paths.
    pub paths: u64,
    pub aborted: u64,
    pub rng: String,
    pub level_means: Vec<f64>,
    pub level_stderr: Vec<f64>,
    /// `sum_k f_k * level_means[k]`.
    pub estimate: f64,
    /// Standard error of the per-path weighted payoff.
    pub stderr: f64,
    pub elapsed_s: f64,
    pub ops: OpCounts,
}

pub const CSV_HEADER: &str = "model,scheme,n,M,rng,E,stderr,elapsed_s,op_count";

impl EstimateReport {
    /// Summary row followed by one row per level (`scheme` suffixed with
    /// `/theta=<k>`, `E` holding the level mean).
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        let ops = self.ops.total_unit_weights();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.3},{}",
            csv_field(&self.model),
            csv_field(&self.scheme),
            self.n,
            self.paths,
            csv_field(&self.rng),
            self.estimate,
            self.stderr,
            self.elapsed_s,
            ops
        );
        for ((t, m), s) in self
            .thetas
            .iter()
            .zip(&self.level_means)
            .zip(&self.level_stderr)
        {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{m},{s},{:.3},{}",
                csv_field(&self.model),
                csv_field(&format!("{}/theta={t}", self.scheme)),
                self.n,
                self.paths,
                csv_field(&self.rng),
                self.elapsed_s,
                ops
            );
        }
        out
    }
}

/// Quotes a CSV field when it contains a separator or quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Per-chunk accumulators.
#[derive(Clone, Debug, Default)]
struct Accumulator {
    count: u64,
    aborted: u64,
    first_abort: Option<Error>,
    level_sum: Vec<CompensatedSum>,
    level_sq: Vec<CompensatedSum>,
    weighted_sum: CompensatedSum,
    weighted_sq: CompensatedSum,
    ops: OpCounts,
}

impl Accumulator {
    fn new(m: usize) -> Self {
        Self {
            level_sum: vec![CompensatedSum::default(); m],
            level_sq: vec![CompensatedSum::default(); m],
            ..Default::default()
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        self.aborted += other.aborted;
        self.first_abort = self.first_abort.or(other.first_abort);
        for (a, b) in self.level_sum.iter_mut().zip(&other.level_sum) {
            a.merge(b);
        }
        for (a, b) in self.level_sq.iter_mut().zip(&other.level_sq) {
            a.merge(b);
        }
        self.weighted_sum.merge(&other.weighted_sum);
        self.weighted_sq.merge(&other.weighted_sq);
        self.ops += other.ops;
        self
    }
}

/// Fixed-shape pairwise reduction: the tree depends only on the length.
fn pairwise<T>(mut items: Vec<T>, merge: &impl Fn(T, T) -> T) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => merge(a, b),
                None => a,
            });
        }
        items = next;
    }
    items.pop()
}

/// Monte Carlo / quasi-Monte Carlo estimate of `E[g(X_T)]` with the
/// extrapolated scheme. Deterministic for fixed inputs, whatever the
/// number of workers.
pub fn estimate<R: Real, C: Coefficient>(
    model: &dyn SdeModel<R>,
    scheme: &SchemeSpec<C>,
    n: usize,
    paths: u64,
    source: &PointSource,
    options: &EstimateOptions,
) -> Result<EstimateReport> {
    if paths == 0 {
        return Err(Error::Parameter("at least one path is required".into()));
    }
    let start = Instant::now();
    let layout = RandomLayout::new(scheme.thetas(), n, model.noise_dim(), options.coupling)?;
    let drawer = PathDrawer::new(source, layout, model.horizon())?;
    let weights: Vec<f64> = scheme.weights().iter().map(Coefficient::to_f64).collect();
    let m = weights.len();
    let chunks = paths.div_ceil(CHUNK_PATHS);
    let d = model.noise_dim();
    // d-vectors of normals generated per path (fewer under reuse coupling)
    let normal_vectors = if d == 0 {
        0
    } else {
        (drawer.layout().gaussian_count() / d) as u64
    };

    let run_chunk = |chunk: u64| -> Result<Accumulator> {
        let mut drawer = drawer.clone();
        let mut ws = RkWorkspace::new(0, model.dim());
        let mut acc = Accumulator::new(m);
        let mut q = vec![0.0; m];
        let end = ((chunk + 1) * CHUNK_PATHS).min(paths);
        for p in chunk * CHUNK_PATHS..end {
            let r = drawer.draw(p)?;
            acc.ops.unit_ops += 1;
            acc.ops.normal_vectors += normal_vectors;
            match sample_path(model, &r.lambda, &r.levels, &mut ws, &mut acc.ops, &mut q) {
                Ok(()) => {
                    acc.count += 1;
                    let mut e = 0.0;
                    for k in 0..m {
                        acc.level_sum[k].add(q[k]);
                        acc.level_sq[k].add(q[k] * q[k]);
                        e += weights[k] * q[k];
                    }
                    acc.weighted_sum.add(e);
                    acc.weighted_sq.add(e * e);
                }
                Err(e @ Error::PathAbort { .. }) => {
                    acc.aborted += 1;
                    acc.first_abort.get_or_insert(e);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(acc)
    };

    let run_all =
        || -> Result<Vec<Accumulator>> { (0..chunks).into_par_iter().map(run_chunk).collect() };
    let parts = match options.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Parameter(format!("worker pool: {e}")))?
            .install(run_all)?,
        None => run_all()?,
    };
    let mut total = pairwise(parts, &Accumulator::merge).expect("at least one chunk");
    // final division by M and contraction with the weights
    total.ops.unit_ops += 2 * m as u64;

    if total.aborted as f64 > MAX_ABORT_FRACTION * paths as f64 {
        return Err(Error::TooManyAborts {
            aborted: total.aborted,
            total: paths,
        });
    }
    if total.count == 0 {
        return Err(total.first_abort.unwrap_or(Error::TooManyAborts {
            aborted: total.aborted,
            total: paths,
        }));
    }
    let cnt = total.count as f64;
    let stderr_of = |sum: &CompensatedSum, sq: &CompensatedSum| {
        let mean = sum.value() / cnt;
        if total.count < 2 {
            return 0.0;
        }
        let var = ((sq.value() - cnt * mean * mean) / (cnt - 1.0)).max(0.0);
        (var / cnt).sqrt()
    };
    let level_means: Vec<f64> = total.level_sum.iter().map(|s| s.value() / cnt).collect();
    let level_stderr = total
        .level_sum
        .iter()
        .zip(&total.level_sq)
        .map(|(s, q)| stderr_of(s, q))
        .collect();
    let estimate = level_means.iter().zip(&weights).map(|(q, f)| q * f).sum();
    Ok(EstimateReport {
        model: model.name().to_string(),
        scheme: scheme.label(),
        thetas: scheme.thetas().to_vec(),
        weights,
        n,
        paths,
        aborted: total.aborted,
        rng: source.to_string(),
        level_means,
        level_stderr,
        estimate,
        stderr: stderr_of(&total.weighted_sum, &total.weighted_sq),
        elapsed_s: start.elapsed().as_secs_f64(),
        ops: total.ops,
    })
}
