//! Gray-code Sobol sequence with Joe-Kuo direction numbers.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

const BITS: usize = 32;

/// Largest usable point index (exclusive): the sequence has `2^32` points.
pub const MAX_POINTS: u64 = 1 << 32;

static SHIPPED_TEXT: &str = include_str!("../../data/new-joe-kuo-6.1024.txt");

/// Direction numbers `v[dim][bit]`, scaled to 32-bit integers.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionTable {
    v: Vec<[u32; BITS]>,
}

impl DirectionTable {
    /// Parses Joe-Kuo text: an optional header line, then one line
    /// `d s a m_1 .. m_s` per dimension starting at `d = 2`. Dimension 1 is
    /// the van der Corput sequence and is implicit.
    pub fn parse(text: &str) -> Result<Self> {
        let mut v = vec![[0u32; BITS]];
        for (k, slot) in v[0].iter_mut().enumerate() {
            *slot = 1 << (BITS - 1 - k);
        }
        for (lineno, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() || fields[0].parse::<u64>().is_err() {
                if lineno == 0 || fields.is_empty() {
                    continue;
                }
                return Err(Error::Parse(format!(
                    "direction line {}: '{line}'",
                    lineno + 1
                )));
            }
            let nums: Vec<u64> = fields
                .iter()
                .map(|f| f.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("direction line {}: '{line}'", lineno + 1)))?;
            let (d, s, a) = (nums[0] as usize, nums.get(1).copied(), nums.get(2).copied());
            let (Some(s), Some(a)) = (s, a) else {
                return Err(Error::Parse(format!(
                    "direction line {} is short",
                    lineno + 1
                )));
            };
            let s = s as usize;
            let m = &nums[3..];
            if d != v.len() + 1 || s == 0 || s > BITS || m.len() != s {
                return Err(Error::Parse(format!(
                    "direction line {}: expected dimension {} with {s} initial numbers",
                    lineno + 1,
                    v.len() + 1
                )));
            }
            let mut dir = [0u32; BITS];
            for k in 0..s.min(BITS) {
                if m[k].is_multiple_of(2) || m[k] >= 1 << (k + 1) {
                    return Err(Error::Parse(format!(
                        "direction line {}: m_{} = {} must be odd and below 2^{}",
                        lineno + 1,
                        k + 1,
                        m[k],
                        k + 1
                    )));
                }
                dir[k] = (m[k] as u32) << (BITS - 1 - k);
            }
            for k in s..BITS {
                let mut x = dir[k - s] ^ (dir[k - s] >> s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        x ^= dir[k - j];
                    }
                }
                dir[k] = x;
            }
            v.push(dir);
        }
        Ok(Self { v })
    }

    /// The table bundled with the crate (1024 dimensions).
    pub fn shipped() -> Arc<Self> {
        static TABLE: OnceLock<Arc<DirectionTable>> = OnceLock::new();
        TABLE
            .get_or_init(|| Arc::new(Self::parse(SHIPPED_TEXT).expect("bundled direction numbers")))
            .clone()
    }

    pub fn max_dimension(&self) -> usize {
        self.v.len()
    }
}

/// Sobol points of a fixed dimension, addressable by index.
#[derive(Clone, Debug)]
pub struct Sobol {
    table: Arc<DirectionTable>,
    dim: usize,
}

impl Sobol {
    pub fn new(table: Arc<DirectionTable>, dim: usize) -> Result<Self> {
        if dim > table.max_dimension() {
            return Err(Error::DimensionOverflow {
                required: dim,
                supported: table.max_dimension(),
            });
        }
        Ok(Self { table, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes point number `index` (`index >= 1`; point 0 is the origin and
    /// is never produced) into `out[..dim]`.
    pub fn point_at(&self, index: u64, out: &mut [f64]) -> Result<()> {
        if index == 0 || index >= MAX_POINTS {
            return Err(Error::SobolExhausted(index));
        }
        let gray = index ^ (index >> 1);
        for (j, o) in out[..self.dim].iter_mut().enumerate() {
            let dir = &self.table.v[j];
            let mut x = 0u32;
            let mut g = gray;
            let mut k = 0;
            while g != 0 {
                if g & 1 == 1 {
                    x ^= dir[k];
                }
                g >>= 1;
                k += 1;
            }
            *o = f64::from(x) / MAX_POINTS as f64;
        }
        Ok(())
    }

    /// Sequential iterator starting after `skip` points.
    pub fn iter(&self, skip: u64) -> Result<SobolIter> {
        let mut state = vec![0u32; self.dim];
        let mut buf = vec![0.0; self.dim];
        if skip > 0 {
            self.point_at(skip, &mut buf)?;
            for (s, b) in state.iter_mut().zip(&buf) {
                *s = (b * MAX_POINTS as f64) as u32;
            }
        }
        Ok(SobolIter {
            sobol: self.clone(),
            state,
            index: skip,
        })
    }
}

/// Gray-code recurrence: point `i` differs from point `i-1` by one direction
/// number per coordinate.
#[derive(Clone, Debug)]
pub struct SobolIter {
    sobol: Sobol,
    state: Vec<u32>,
    index: u64,
}

impl SobolIter {
    /// Index of the point the next call returns.
    pub fn next_index(&self) -> u64 {
        self.index + 1
    }

    pub fn next_point(&mut self, out: &mut [f64]) -> Result<()> {
        let i = self.index + 1;
        if i >= MAX_POINTS {
            return Err(Error::SobolExhausted(i));
        }
        // bit that flips between gray(i-1) and gray(i)
        let c = (i - 1).trailing_ones() as usize;
        for ((s, dir), o) in self
            .state
            .iter_mut()
            .zip(&self.sobol.table.v)
            .zip(out.iter_mut())
        {
            *s ^= dir[c];
            *o = f64::from(*s) / MAX_POINTS as f64;
        }
        self.index = i;
        Ok(())
    }
}
