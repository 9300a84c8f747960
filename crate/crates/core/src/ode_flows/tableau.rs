//! Butcher tableaux for explicit Runge-Kutta methods, stored as text.
//!
//! File layout: line 1 is `s order`, followed by the strictly lower
//! triangular rows of `a` (row `i` has `i-1` entries) and then the `s`
//! weights `b`. Tokens are decimals or `p/q` fractions; rows are recovered
//! from the token count, so the empty first row may be omitted. `#` starts
//! a comment.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Coefficient, Real};

/// Explicit Runge-Kutta coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau<C> {
    name: String,
    /// `a[i]` holds the `i` entries left of the diagonal.
    a: Vec<Vec<C>>,
    b: Vec<C>,
    order: u32,
}

const SHIPPED: &[(&str, &str)] = &[
    ("euler", include_str!("../../data/tableaux/euler.txt")),
    ("heun", include_str!("../../data/tableaux/heun.txt")),
    ("rk4", include_str!("../../data/tableaux/rk4.txt")),
    (
        "extrapolated_euler7",
        include_str!("../../data/tableaux/extrapolated_euler7.txt"),
    ),
];

/// Names of the tableaux bundled with the crate.
pub fn shipped_names() -> impl Iterator<Item = &'static str> {
    SHIPPED.iter().map(|(n, _)| *n)
}

/// Source text of a bundled tableau.
pub fn shipped_source(name: &str) -> Option<&'static str> {
    SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

fn parse_token(tok: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad tableau entry '{tok}'"));
    if let Some((p, q)) = tok.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    // exact decimal: mantissa digits scaled by a power of ten
    let (mant, exp) = match tok.find(['e', 'E']) {
        Some(i) => (&tok[..i], tok[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (tok, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

impl ButcherTableau<BigRational> {
    /// Parses the text format exactly.
    pub fn parse_exact(name: &str, text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let mut header = || -> Result<u32> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse("missing tableau header".into()))?
                .parse()
                .map_err(|_| Error::Parse("bad tableau header".into()))
        };
        let s = header()? as usize;
        let order = header()?;
        if s == 0 {
            return Err(Error::Parse("tableau needs at least one stage".into()));
        }
        let values = tokens.map(parse_token).collect::<Result<Vec<_>>>()?;
        let expected = s * (s - 1) / 2 + s;
        if values.len() != expected {
            return Err(Error::Parse(format!(
                "{s}-stage tableau needs {expected} entries, found {}",
                values.len()
            )));
        }
        let mut it = values.into_iter();
        let a = (0..s).map(|i| it.by_ref().take(i).collect()).collect();
        let b: Vec<BigRational> = it.collect();
        let sum: BigRational = b.iter().cloned().sum();
        if !sum.is_one() {
            return Err(Error::Parse(format!(
                "weights of '{name}' sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            a,
            b,
            order,
        })
    }

    pub fn to_real<R: Real>(&self) -> ButcherTableau<R> {
        let cv = |c: &BigRational| R::lit(Coefficient::to_f64(c));
        ButcherTableau {
            name: self.name.clone(),
            a: self.a.iter().map(|r| r.iter().map(cv).collect()).collect(),
            b: self.b.iter().map(cv).collect(),
            order: self.order,
        }
    }

    /// Highest order `p` for which every rooted-tree condition
    /// `b^T Phi(t) = 1/gamma(t)` with `|t| <= p` holds, capped at `max_order`.
    pub fn verified_order(&self, max_order: usize) -> usize {
        let s = self.stages();
        let full = |i: usize, j: usize| self.a[i].get(j).cloned().unwrap_or_else(BigRational::zero);
        // stage weight vector of a tree given as a multiset of children
        fn phi(
            t: &[Tree],
            s: usize,
            full: &dyn Fn(usize, usize) -> BigRational,
        ) -> Vec<BigRational> {
            let mut v = vec![BigRational::one(); s];
            for child in t {
                let w = phi(&child.0, s, full);
                for (i, vi) in v.iter_mut().enumerate() {
                    let aw: BigRational = (0..s).map(|j| full(i, j) * &w[j]).sum();
                    *vi *= aw;
                }
            }
            v
        }
        for order in 1..=max_order {
            for t in rooted_trees(order) {
                let val: BigRational = phi(&t.0, s, &full)
                    .iter()
                    .zip(&self.b)
                    .map(|(p, b)| p * b)
                    .sum();
                if val != BigRational::new(BigInt::one(), BigInt::from(t.density())) {
                    return order - 1;
                }
            }
        }
        max_order
    }
}

/// A rooted tree as the multiset of its root's subtrees.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Tree(Vec<Tree>);

impl Tree {
    fn size(&self) -> usize {
        1 + self.0.iter().map(Tree::size).sum::<usize>()
    }

    fn density(&self) -> u64 {
        self.size() as u64 * self.0.iter().map(Tree::density).product::<u64>()
    }
}

fn rooted_trees(n: usize) -> Vec<Tree> {
    if n == 1 {
        return vec![Tree(vec![])];
    }
    // forests of total size n-1 with children in nonincreasing order
    fn forests(rem: usize, bound: Option<&Tree>, out: &mut Vec<Vec<Tree>>, cur: &mut Vec<Tree>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for k in 1..=rem {
            for t in rooted_trees(k) {
                if bound.is_some_and(|b| (t.size(), &t) > (b.size(), b)) {
                    continue;
                }
                cur.push(t.clone());
                forests(rem - k, Some(&t), out, cur);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    forests(n - 1, None, &mut out, &mut Vec::new());
    out.into_iter().map(Tree).collect()
}

impl<C: Clone> ButcherTableau<C> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn declared_order(&self) -> u32 {
        self.order
    }

    pub fn a(&self) -> &[Vec<C>] {
        &self.a
    }

    pub fn b(&self) -> &[C] {
        &self.b
    }
}

impl<R: Real> ButcherTableau<R> {
    /// Parses a tableau file into floating point coefficients.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        Ok(ButcherTableau::parse_exact(name, text)?.to_real())
    }

    /// A bundled tableau by name (`euler`, `heun`, `rk4`, `extrapolated_euler7`).
    pub fn shipped(name: &str) -> Result<Self> {
        let src = shipped_source(name)
            .ok_or_else(|| Error::Parameter(format!("unknown tableau '{name}'")))?;
        Self::parse(name, src)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("tableau");
        Self::parse(name, &text)
    }
}
