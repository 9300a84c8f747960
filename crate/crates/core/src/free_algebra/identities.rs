//! The series `p`, `q^[theta]` and the exact identity checks built on them.

use std::fmt;

use super::{AlgebraDims, GradedComponent, Projection, TruncatedSeries};
use crate::error::{Error, Result};
use crate::extrapolation::SchemeSpec;
use crate::scalar::Coefficient;

/// Ordering of the factors `exp(a_i / theta)` inside one splitting step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `exp(a_0/θ) ⋯ exp(a_d/θ)`
    Forward,
    /// `exp(a_d/θ) ⋯ exp(a_0/θ)`
    Backward,
    /// Average of the two.
    Symmetrized,
}

/// Result of one exact identity check, printable as a report line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub d: usize,
    pub max_degree: usize,
    pub m: Option<usize>,
    pub pass: bool,
    /// Lowest degree at which the identity fails.
    pub failing_degree: Option<usize>,
}

impl CheckOutcome {
    fn new(name: &str, dims: AlgebraDims, m: Option<usize>, failing: Option<usize>) -> Self {
        Self {
            name: name.to_string(),
            d: dims.d(),
            max_degree: dims.max_degree(),
            m,
            pass: failing.is_none(),
            failing_degree: failing,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} d={} D={} m=",
            self.name, self.d, self.max_degree
        )?;
        match self.m {
            Some(m) => write!(f, "{m}")?,
            None => write!(f, "-")?,
        }
        match (self.pass, self.failing_degree) {
            (true, _) => write!(f, " -> PASS"),
            (false, Some(k)) => write!(f, " -> FAIL[{k}]"),
            (false, None) => write!(f, " -> FAIL"),
        }
    }
}

fn letter_sum<C: Coefficient>(dims: AlgebraDims) -> Result<TruncatedSeries<C>> {
    let mut s = TruncatedSeries::zero(dims);
    for i in 0..dims.letters() {
        s = s.add(&TruncatedSeries::letter(dims, i)?)?;
    }
    Ok(s)
}

/// `p = exp(a_0 + ... + a_d)`.
pub fn build_p<C: Coefficient>(dims: AlgebraDims) -> Result<TruncatedSeries<C>> {
    letter_sum(dims)?.exp_trunc()
}

/// `q^[theta]` in the requested factor ordering.
pub fn build_q<C: Coefficient>(
    theta: u32,
    direction: Direction,
    dims: AlgebraDims,
) -> Result<TruncatedSeries<C>> {
    if theta < 1 {
        return Err(Error::Parameter("theta must be at least 1".into()));
    }
    let inv = C::from_ratio(1, theta as i64);
    let factors = (0..dims.letters())
        .map(|i| {
            TruncatedSeries::letter(dims, i)
                .map(|a| a.scale(&inv))
                .and_then(|a| a.exp_trunc())
        })
        .collect::<Result<Vec<_>>>()?;
    let ordered = |rev: bool| -> Result<TruncatedSeries<C>> {
        let mut step = TruncatedSeries::one(dims);
        let mut apply = |f: &TruncatedSeries<C>| -> Result<()> {
            step = step.mul(f)?;
            Ok(())
        };
        if rev {
            factors.iter().rev().try_for_each(&mut apply)?;
        } else {
            factors.iter().try_for_each(&mut apply)?;
        }
        step.pow(theta)
    };
    match direction {
        Direction::Forward => ordered(false),
        Direction::Backward => ordered(true),
        Direction::Symmetrized => {
            let half = C::from_ratio(1, 2);
            Ok(ordered(false)?.add(&ordered(true)?)?.scale(&half))
        }
    }
}

/// `log q⃖^[1]` against `sum_i (-1)^{i+1} j_i(log q⃗^[1])`, degree by degree.
pub fn fujiwara_expansion_check<C: Coefficient>(dims: AlgebraDims) -> Result<CheckOutcome> {
    if dims.max_degree() < 1 {
        return Err(Error::Parameter("expansion check needs D >= 1".into()));
    }
    let fwd = build_q::<C>(1, Direction::Forward, dims)?.log_trunc()?;
    let bwd = build_q::<C>(1, Direction::Backward, dims)?.log_trunc()?;
    let mut rhs = TruncatedSeries::zero(dims);
    for i in 1..=dims.max_degree() {
        let part = fwd.project(Projection::Exact(i))?;
        rhs = if i % 2 == 1 {
            rhs.add(&part)?
        } else {
            rhs.sub(&part)?
        };
    }
    let diff = bwd.sub(&rhs)?;
    Ok(CheckOutcome::new(
        "fujiwara_expansion",
        dims,
        None,
        diff.lowest_degree(),
    ))
}

fn is_letter_like<C: Coefficient>(x: &TruncatedSeries<C>) -> bool {
    !x.is_zero() && x.terms().all(|(w, _)| w.degree() == 1)
}

/// Degree-`n` homogeneous part of `log(exp X exp Y)` for degree-one `X`, `Y`.
pub fn bch_component<C: Coefficient>(
    x: &TruncatedSeries<C>,
    y: &TruncatedSeries<C>,
    n: usize,
) -> Result<GradedComponent<C>> {
    if n > x.max_degree() {
        return Err(Error::Parameter(format!(
            "BCH degree {n} exceeds truncation degree {}",
            x.max_degree()
        )));
    }
    if !is_letter_like(x) || !is_letter_like(y) {
        return Err(Error::Parameter(
            "BCH arguments must be homogeneous of degree one".into(),
        ));
    }
    let z = x.exp_trunc()?.mul(&y.exp_trunc()?)?.log_trunc()?;
    z.graded_component(n)
}

/// `c_n(a_0, a_1) = (-1)^{n+1} c_n(a_1, a_0)` for every `n <= D`.
pub fn bch_antisymmetry_check<C: Coefficient>(dims: AlgebraDims) -> Result<CheckOutcome> {
    if dims.letters() < 2 {
        return Err(Error::Parameter("antisymmetry needs two letters".into()));
    }
    let x = TruncatedSeries::<C>::letter(dims, 0)?;
    let y = TruncatedSeries::<C>::letter(dims, 1)?;
    let mut failing = None;
    for n in 1..=dims.max_degree() {
        let xy = bch_component(&x, &y, n)?.series;
        let yx = bch_component(&y, &x, n)?.series;
        let expect = if n % 2 == 1 { yx } else { yx.neg() };
        if xy != expect {
            failing = Some(n);
            break;
        }
    }
    Ok(CheckOutcome::new("bch_antisymmetry", dims, None, failing))
}

fn check_scheme_degree<C: Coefficient>(
    scheme: &SchemeSpec<C>,
    dims: AlgebraDims,
    needed: usize,
) -> Result<()> {
    if dims.max_degree() < needed {
        return Err(Error::Parameter(format!(
            "truncation degree {} below required {needed} for m={}",
            dims.max_degree(),
            scheme.m()
        )));
    }
    Ok(())
}

fn level_series<C: Coefficient>(
    scheme: &SchemeSpec<C>,
    dims: AlgebraDims,
) -> Result<Vec<TruncatedSeries<C>>> {
    scheme
        .thetas()
        .iter()
        .map(|&t| build_q(t, Direction::Symmetrized, dims))
        .collect()
}

/// `sum_i f_i q^[theta_i] - p`.
fn extrapolated_residual<C: Coefficient>(
    scheme: &SchemeSpec<C>,
    dims: AlgebraDims,
) -> Result<TruncatedSeries<C>> {
    let p = build_p::<C>(dims)?;
    let mut acc = p.neg();
    for (q, f) in level_series(scheme, dims)?.iter().zip(scheme.weights()) {
        acc = acc.add(&q.scale(f))?;
    }
    Ok(acc)
}

/// `j_{<=2m}(sum_i f_i q^[theta_i] - p) == 0`.
pub fn order_condition_check<C: Coefficient>(
    scheme: &SchemeSpec<C>,
    dims: AlgebraDims,
) -> Result<CheckOutcome> {
    let two_m = 2 * scheme.m();
    check_scheme_degree(scheme, dims, two_m)?;
    let residual = extrapolated_residual(scheme, dims)?.project(Projection::UpTo(two_m))?;
    Ok(CheckOutcome::new(
        "order_condition",
        dims,
        Some(scheme.m()),
        residual.lowest_degree(),
    ))
}

/// `j_{<=2m+l-1}(sum_i f_i (q^[theta_i] - p)^l) == 0` for `2 <= l <= m-1`.
pub fn critical_check<C: Coefficient>(
    scheme: &SchemeSpec<C>,
    l: usize,
    dims: AlgebraDims,
) -> Result<CheckOutcome> {
    let m = scheme.m();
    if l < 2 || l + 1 > m {
        return Err(Error::Parameter(format!(
            "critical check needs 2 <= l <= m-1, got l={l}, m={m}"
        )));
    }
    let top = 2 * m + l - 1;
    check_scheme_degree(scheme, dims, top)?;
    let p = build_p::<C>(dims)?;
    let mut acc = TruncatedSeries::zero(dims);
    for (q, f) in level_series(scheme, dims)?.iter().zip(scheme.weights()) {
        let diff = q.sub(&p)?;
        acc = acc.add(&diff.pow(l as u32)?.scale(f))?;
    }
    let residual = acc.project(Projection::UpTo(top))?;
    Ok(CheckOutcome::new(
        &format!("critical_l{l}"),
        dims,
        Some(m),
        residual.lowest_degree(),
    ))
}

/// Lowest degree at which `sum_i f_i q^[theta_i]` differs from `p`.
pub fn first_nonvanishing_degree<C: Coefficient>(
    scheme: &SchemeSpec<C>,
    dims: AlgebraDims,
) -> Result<Option<usize>> {
    Ok(extrapolated_residual(scheme, dims)?.lowest_degree())
}

/// The extrapolation residual first appears in odd degree (or not at all
/// below the truncation degree).
pub fn parity_check<C: Coefficient>(
    scheme: &SchemeSpec<C>,
    dims: AlgebraDims,
) -> Result<CheckOutcome> {
    let first = first_nonvanishing_degree(scheme, dims)?;
    let failing = first.filter(|k| k % 2 == 0);
    Ok(CheckOutcome::new("parity", dims, Some(scheme.m()), failing))
}

/// `q^n - p^n` against the telescoping decomposition with up to `m`
/// factors of `q - p`.
///
/// Term `l` sums over `0 <= k_1 < ... < k_l <= n-1` of
/// `r^{k_1} (q-p) p^{k_2-k_1-1} (q-p) ⋯ (q-p) p^{n-k_l-1}`,
/// where the leading power uses `r = p` for `l < m` and `r = q` for `l = m`.
pub fn telescoping_identity_check<C: Coefficient>(
    q: &TruncatedSeries<C>,
    p: &TruncatedSeries<C>,
    n: usize,
    m: usize,
) -> Result<bool> {
    if m < 1 || m > n {
        return Err(Error::Parameter(format!(
            "telescoping identity needs 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    let dims = q.dims();
    let diff = q.sub(p)?;
    let p_pows = (0..=n)
        .map(|k| p.pow(k as u32))
        .collect::<Result<Vec<_>>>()?;
    let q_pows = (0..=n)
        .map(|k| q.pow(k as u32))
        .collect::<Result<Vec<_>>>()?;

    let mut rhs = TruncatedSeries::zero(dims);
    for l in 1..=m {
        let lead = if l == m { &q_pows } else { &p_pows };
        for ks in increasing_tuples(l, n) {
            let mut term = lead[ks[0]].mul(&diff)?;
            for win in ks.windows(2) {
                term = term.mul(&p_pows[win[1] - win[0] - 1])?.mul(&diff)?;
            }
            term = term.mul(&p_pows[n - ks[l - 1] - 1])?;
            rhs = rhs.add(&term)?;
        }
    }
    let lhs = q_pows[n].sub(&p_pows[n])?;
    Ok(lhs == rhs)
}

/// All strictly increasing `len`-tuples drawn from `0..n`.
fn increasing_tuples(len: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, len: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for k in start..n {
            cur.push(k);
            rec(k + 1, len, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, len, n, &mut Vec::with_capacity(len), &mut out);
    out
}
