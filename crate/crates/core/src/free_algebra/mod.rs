//! Truncated noncommutative power series over the alphabet `{a_0, ..., a_d}`.
//!
//! A [`TruncatedSeries`] stores a finite map from words to coefficients and
//! discards every word longer than the truncation degree. Multiplication is
//! concatenation of words extended bilinearly, so `exp`/`log` computed here
//! agree with the formal series up to the truncation degree.

mod identities;

pub use identities::{
    bch_antisymmetry_check, bch_component, build_p, build_q, critical_check,
    first_nonvanishing_degree, fujiwara_expansion_check, order_condition_check, parity_check,
    telescoping_identity_check, CheckOutcome, Direction,
};

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Coefficient;

const BITS_PER_LETTER: u32 = 4;
/// Largest alphabet a packed [`Word`] can hold.
pub const MAX_LETTERS: usize = 1 << BITS_PER_LETTER;
/// Longest word a packed [`Word`] can hold.
pub const MAX_WORD_LEN: usize = (u64::BITS / BITS_PER_LETTER) as usize;
/// Default cap on the number of distinct words up to the truncation degree.
pub const DEFAULT_WORD_BUDGET: u128 = 1 << 21;

/// A word over the alphabet, packed four bits per letter.
///
/// The derived ordering compares length first and then the letters
/// lexicographically (`a_0 < a_1 < ...`), so iteration over a
/// `BTreeMap<Word, _>` visits grades in increasing order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word {
    len: u8,
    code: u64,
}

impl Word {
    pub const EMPTY: Word = Word { len: 0, code: 0 };

    pub fn letter(index: usize) -> Word {
        assert!(index < MAX_LETTERS, "letter index {index} out of range");
        Word {
            len: 1,
            code: index as u64,
        }
    }

    pub fn from_letters(letters: &[usize]) -> Word {
        assert!(letters.len() <= MAX_WORD_LEN, "word too long");
        letters
            .iter()
            .fold(Word::EMPTY, |w, &l| w.concat(Word::letter(l)))
    }

    pub fn degree(&self) -> usize {
        self.len as usize
    }

    /// Letters from left to right.
    pub fn letters(&self) -> Vec<usize> {
        (0..self.len as u32)
            .rev()
            .map(|k| ((self.code >> (k * BITS_PER_LETTER)) & 0xF) as usize)
            .collect()
    }

    pub fn concat(self, other: Word) -> Word {
        debug_assert!(self.degree() + other.degree() <= MAX_WORD_LEN);
        let code = if other.len == 0 {
            self.code
        } else {
            (self.code << (other.len as u32 * BITS_PER_LETTER)) | other.code
        };
        Word {
            len: self.len + other.len,
            code,
        }
    }

    pub fn reversed(&self) -> Word {
        let mut l = self.letters();
        l.reverse();
        Word::from_letters(&l)
    }

    /// Smallest word of the given degree, used as a range bound.
    fn first_of_degree(degree: usize) -> Word {
        Word {
            len: degree as u8,
            code: 0,
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return write!(f, "1");
        }
        for l in self.letters() {
            write!(f, "a{l}")?;
        }
        Ok(())
    }
}

/// Alphabet size and truncation degree shared by all series in a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlgebraDims {
    letters: usize,
    max_degree: usize,
}

impl AlgebraDims {
    /// Alphabet `{a_0..a_d}` truncated at degree `max_degree`, with the default word budget.
    pub fn new(d: usize, max_degree: usize) -> Result<Self> {
        Self::with_budget(d, max_degree, DEFAULT_WORD_BUDGET)
    }

    pub fn with_budget(d: usize, max_degree: usize, budget: u128) -> Result<Self> {
        let letters = d + 1;
        if letters > MAX_LETTERS {
            return Err(Error::Parameter(format!(
                "alphabet of {letters} letters exceeds {MAX_LETTERS}"
            )));
        }
        if max_degree > MAX_WORD_LEN {
            return Err(Error::Parameter(format!(
                "truncation degree {max_degree} exceeds {MAX_WORD_LEN}"
            )));
        }
        let required: u128 = (0..=max_degree as u32)
            .map(|k| (letters as u128).pow(k))
            .sum();
        if required > budget {
            return Err(Error::WordBudget { required, budget });
        }
        Ok(Self {
            letters,
            max_degree,
        })
    }

    /// Highest letter index `d`.
    pub fn d(&self) -> usize {
        self.letters - 1
    }

    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }
}

/// Which part of the grading [`TruncatedSeries::project`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `j_m`: words of degree exactly `m`.
    Exact(usize),
    /// `j_{<=m}`: words of degree at most `m`.
    UpTo(usize),
}

/// Noncommutative polynomial truncated at a fixed degree.
///
/// Canonical form: no stored coefficient is zero and every stored word has
/// degree at most `max_degree`.
#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<C> {
    dims: AlgebraDims,
    terms: BTreeMap<Word, C>,
}

impl<C: Coefficient> TruncatedSeries<C> {
    pub fn zero(dims: AlgebraDims) -> Self {
        Self {
            dims,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dims: AlgebraDims) -> Self {
        Self::monomial(dims, Word::EMPTY, C::one())
    }

    pub fn constant(dims: AlgebraDims, c: C) -> Self {
        Self::monomial(dims, Word::EMPTY, c)
    }

    /// The single letter `a_i`.
    pub fn letter(dims: AlgebraDims, i: usize) -> Result<Self> {
        if i >= dims.letters {
            return Err(Error::Parameter(format!(
                "letter a{i} not in alphabet a0..a{}",
                dims.d()
            )));
        }
        Ok(Self::monomial(dims, Word::letter(i), C::one()))
    }

    /// `c * w`; dropped if `w` is above the truncation degree or `c` is zero.
    pub fn monomial(dims: AlgebraDims, w: Word, c: C) -> Self {
        let mut s = Self::zero(dims);
        s.add_term(w, c);
        s
    }

    /// Builds a series from `(word, coefficient)` pairs, summing repeated words.
    pub fn from_terms(dims: AlgebraDims, terms: impl IntoIterator<Item = (Word, C)>) -> Self {
        let mut s = Self::zero(dims);
        for (w, c) in terms {
            s.add_term(w, c);
        }
        s
    }

    pub fn dims(&self) -> AlgebraDims {
        self.dims
    }

    pub fn max_degree(&self) -> usize {
        self.dims.max_degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &Word) -> C {
        self.terms.get(w).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coefficient(&Word::EMPTY)
    }

    /// Terms in (degree, lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    /// Degree of the lowest nonzero graded component, `None` for the zero series.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.terms.keys().next().map(Word::degree)
    }

    fn add_term(&mut self, w: Word, c: C) {
        if w.degree() > self.dims.max_degree || c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::Parameter(format!(
                "mismatched series parameters: (d={}, D={}) vs (d={}, D={})",
                self.dims.d(),
                self.dims.max_degree,
                other.dims.d(),
                other.dims.max_degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(*w, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(*w, -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.dims);
        }
        Self {
            dims: self.dims,
            terms: self
                .terms
                .iter()
                .map(|(w, v)| (*w, v.clone() * c.clone()))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// Concatenation product; products above the truncation degree are dropped.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let max = self.dims.max_degree;
        let mut out = Self::zero(self.dims);
        for (u, cu) in &self.terms {
            let room = max - u.degree();
            let bound = Word::first_of_degree(room + 1);
            for (v, cv) in other.terms.range(..bound) {
                out.add_term(u.concat(*v), cu.clone() * cv.clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut acc = Self::one(self.dims);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `sum_{n<=D} u^n / n!`. Requires a vanishing constant term.
    pub fn exp_trunc(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::Domain(
                "exp of a series with nonzero constant term".into(),
            ));
        }
        let one = Self::one(self.dims);
        let mut acc = one.clone();
        for k in (1..=self.dims.max_degree as i64).rev() {
            acc = one.add(&self.mul(&acc)?.scale(&C::from_ratio(1, k)))?;
        }
        Ok(acc)
    }

    /// `sum_{n<=D} (-1)^{n-1} (v-1)^n / n`. Requires constant term 1.
    pub fn log_trunc(&self) -> Result<Self> {
        if self.constant_term() != C::one() {
            return Err(Error::Domain(
                "log of a series whose constant term is not 1".into(),
            ));
        }
        let max = self.dims.max_degree as i64;
        let one = Self::one(self.dims);
        let w = self.sub(&one)?;
        if max == 0 {
            return Ok(Self::zero(self.dims));
        }
        let mut acc = Self::constant(self.dims, C::from_ratio(1, max));
        for n in (1..max).rev() {
            acc = Self::constant(self.dims, C::from_ratio(1, n)).sub(&w.mul(&acc)?)?;
        }
        w.mul(&acc)
    }

    /// `j_m` or `j_{<=m}`.
    pub fn project(&self, mode: Projection) -> Result<Self> {
        let m = match mode {
            Projection::Exact(m) | Projection::UpTo(m) => m,
        };
        if m > self.dims.max_degree {
            return Err(Error::Parameter(format!(
                "projection degree {m} exceeds truncation degree {}",
                self.dims.max_degree
            )));
        }
        let keep = |w: &Word| match mode {
            Projection::Exact(m) => w.degree() == m,
            Projection::UpTo(m) => w.degree() <= m,
        };
        Ok(Self {
            dims: self.dims,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| keep(w))
                .map(|(w, c)| (*w, c.clone()))
                .collect(),
        })
    }

    pub fn graded_component(&self, degree: usize) -> Result<GradedComponent<C>> {
        Ok(GradedComponent {
            degree,
            series: self.project(Projection::Exact(degree))?,
        })
    }

    /// Word reversal extended linearly (the antipode up to signs).
    pub fn reversed(&self) -> Self {
        Self::from_terms(
            self.dims,
            self.terms.iter().map(|(w, c)| (w.reversed(), c.clone())),
        )
    }

    /// Same terms re-homed into a different truncation, dropping words that no longer fit.
    pub fn retruncate(&self, dims: AlgebraDims) -> Result<Self> {
        if dims.letters != self.dims.letters {
            return Err(Error::Parameter("retruncate across alphabets".into()));
        }
        Ok(Self::from_terms(
            dims,
            self.terms.iter().map(|(w, c)| (*w, c.clone())),
        ))
    }
}

impl<C: Coefficient> fmt::Debug for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<C: Coefficient> fmt::Display for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c}){w}")?;
        }
        Ok(())
    }
}

/// A homogeneous piece of a series.
#[derive(Clone, PartialEq)]
pub struct GradedComponent<C> {
    pub degree: usize,
    pub series: TruncatedSeries<C>,
}

impl<C: Coefficient> fmt::Debug for GradedComponent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[degree {}] {}", self.degree, self.series)
    }
}

impl<C: Coefficient> GradedComponent<C> {
    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }
}
