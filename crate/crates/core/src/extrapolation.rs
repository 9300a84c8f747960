//! Extrapolation weights for combining splitting levels.
//!
//! For levels `theta_1 < ... < theta_m` the weights solve `A f = e_1`, where
//! row `r` of `A` holds `1 / theta_c^{2r}`. The first row makes the weights
//! sum to one; the others cancel the `theta^{-2l}` error terms for
//! `l = 1..m-1`, which lifts the weak order from 2 to `2m`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::{Coefficient, Real};

/// Levels and weights of an extrapolated splitting scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeSpec<C> {
    thetas: Vec<u32>,
    weights: Vec<C>,
}

fn validate_thetas(thetas: &[u32]) -> Result<()> {
    if thetas.is_empty() {
        return Err(Error::Parameter("at least one level is required".into()));
    }
    if thetas.contains(&0) {
        return Err(Error::Parameter("levels must be positive integers".into()));
    }
    for (i, a) in thetas.iter().enumerate() {
        if thetas[..i].contains(a) {
            return Err(Error::Singular(format!(
                "level {a} repeated; the level matrix is singular"
            )));
        }
    }
    if thetas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Parameter(format!(
            "levels must be increasing, got {thetas:?}"
        )));
    }
    Ok(())
}

/// Row `r`, column `c` of the level matrix: `theta_c^{-2r}`.
fn level_matrix<C: Coefficient>(thetas: &[u32]) -> Vec<Vec<C>> {
    let m = thetas.len();
    (0..m)
        .map(|r| {
            thetas
                .iter()
                .map(|&t| {
                    let t2 = (t as i64) * (t as i64);
                    C::from_ratio(1, t2.pow(r as u32))
                })
                .collect()
        })
        .collect()
}

/// Gaussian elimination with pivoting on the largest magnitude.
fn solve_linear<C: Coefficient>(mut a: Vec<Vec<C>>, mut rhs: Vec<C>) -> Result<Vec<C>> {
    let m = rhs.len();
    for col in 0..m {
        let pivot = (col..m)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&r, &s| {
                a[r][col]
                    .magnitude()
                    .partial_cmp(&a[s][col].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or_else(|| Error::Singular(format!("no pivot in column {col}")))?;
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..m {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / a[col][col].clone();
            for c in col..m {
                let v = a[col][c].clone() * factor.clone();
                a[r][c] = a[r][c].clone() - v;
            }
            let v = rhs[col].clone() * factor;
            rhs[r] = rhs[r].clone() - v;
        }
    }
    let mut x = vec![C::zero(); m];
    for r in (0..m).rev() {
        let mut acc = rhs[r].clone();
        for c in r + 1..m {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Ok(x)
}

/// Weights `f = A^{-1} e_1` for the given levels.
pub fn solve_weights<C: Coefficient>(thetas: &[u32]) -> Result<SchemeSpec<C>> {
    validate_thetas(thetas)?;
    let m = thetas.len();
    let mut e1 = vec![C::zero(); m];
    e1[0] = C::one();
    let weights = solve_linear(level_matrix(thetas), e1)?;
    Ok(SchemeSpec {
        thetas: thetas.to_vec(),
        weights,
    })
}

/// Explicit three-level weights
/// `theta_1^4 / ((theta_2^2 - theta_1^2)(theta_3^2 - theta_1^2))` and cyclic.
pub fn closed_form_m3<C: Coefficient>(th1: u32, th2: u32, th3: u32) -> Result<[C; 3]> {
    validate_thetas(&[th1, th2, th3])?;
    let sq = |t: u32| (t as i64) * (t as i64);
    let (s1, s2, s3) = (sq(th1), sq(th2), sq(th3));
    Ok([
        C::from_ratio(s1 * s1, (s2 - s1) * (s3 - s1)),
        C::from_ratio(-s2 * s2, (s3 - s2) * (s2 - s1)),
        C::from_ratio(s3 * s3, (s3 - s1) * (s3 - s2)),
    ])
}

impl<C: Coefficient> SchemeSpec<C> {
    /// Wraps arbitrary weights without solving; [`Self::satisfies_moment_conditions`]
    /// tells whether they form a valid extrapolation.
    pub fn from_parts(thetas: Vec<u32>, weights: Vec<C>) -> Result<Self> {
        validate_thetas(&thetas)?;
        if thetas.len() != weights.len() {
            return Err(Error::Parameter(format!(
                "{} levels but {} weights",
                thetas.len(),
                weights.len()
            )));
        }
        Ok(Self { thetas, weights })
    }

    /// Plain splitting: one level, weight one.
    pub fn ninomiya_victoir() -> Self {
        Self {
            thetas: vec![1],
            weights: vec![C::one()],
        }
    }

    pub fn m(&self) -> usize {
        self.thetas.len()
    }

    pub fn weak_order(&self) -> usize {
        2 * self.m()
    }

    pub fn thetas(&self) -> &[u32] {
        &self.thetas
    }

    pub fn weights(&self) -> &[C] {
        &self.weights
    }

    pub fn theta_sum(&self) -> u64 {
        self.thetas.iter().map(|&t| t as u64).sum()
    }

    pub fn theta_max(&self) -> u32 {
        *self.thetas.iter().max().expect("nonempty levels")
    }

    /// `A f == e_1`, checked entry by entry.
    pub fn satisfies_moment_conditions(&self) -> bool {
        level_matrix::<C>(&self.thetas)
            .iter()
            .enumerate()
            .all(|(r, row)| {
                let dot = row
                    .iter()
                    .zip(&self.weights)
                    .fold(C::zero(), |acc, (a, f)| acc + a.clone() * f.clone());
                if r == 0 {
                    dot == C::one()
                } else {
                    dot.is_zero()
                }
            })
    }

    /// `sum |f_i|`, reported as a conditioning diagnostic.
    pub fn weight_l1_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.magnitude()).sum()
    }

    pub fn weights_as<R: Real>(&self) -> Vec<R> {
        self.weights.iter().map(|w| R::lit(w.to_f64())).collect()
    }

    /// `NV` for the single level `theta = 1`, otherwise `GF(t1,t2,...)`.
    pub fn label(&self) -> String {
        if self.thetas == [1] {
            return "NV".to_string();
        }
        let list: Vec<String> = self.thetas.iter().map(u32::to_string).collect();
        format!("GF({})", list.join(","))
    }

    /// One line per level: `theta <t> weight <exact> (<decimal, 17 significant digits>)`.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (t, w) in self.thetas.iter().zip(&self.weights) {
            let _ = writeln!(out, "theta {t} weight {w} ({:.16e})", w.to_f64());
        }
        out
    }
}
