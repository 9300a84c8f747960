//! Reproducible random inputs for path sampling.
//!
//! Every path consumes one point of a fixed dimension. Coordinates
//! `0..n` become the ordering bits `Lambda_j` (`u >= 1/2` means forward),
//! the rest become Gaussians through the normal quantile. Gaussian `(i, c)`
//! of a block (diffusion row `i = 1..=d`, column `c`) sits at
//! `n + block_offset + c * d + (i - 1)`.

mod normal;
mod sobol;

pub use normal::{gaussian_cdf, gaussian_inverse_cdf};
pub use sobol::{DirectionTable, Sobol, SobolIter, MAX_POINTS};

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// How Gaussian draws are shared between levels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Coupling {
    /// Each level draws its own Gaussians.
    Independent,
    /// Level `theta_k` uses the first `d * theta_k * n` standard normals of
    /// the largest level's block, rescaled to its own step.
    #[default]
    Reuse,
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Coupling::Independent),
            "reuse" => Ok(Coupling::Reuse),
            _ => Err(Error::Parse(format!(
                "coupling must be 'independent' or 'reuse', got '{s}'"
            ))),
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::Independent => "independent",
            Coupling::Reuse => "reuse",
        })
    }
}

/// Where uniforms come from.
#[derive(Clone, Debug, PartialEq)]
pub enum PointSource {
    /// ChaCha8 keyed by `seed`, one stream per path index.
    Pseudo { seed: u64 },
    /// Unscrambled Sobol; path `k` takes point `skip + k + 1`.
    Sobol { skip: u64 },
}

impl FromStr for PointSource {
    type Err = Error;

    /// `pseudo:<seed>` or `sobol[:skip]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Parse(format!(
                "rng must be 'pseudo:<seed>' or 'sobol[:skip]', got '{s}'"
            ))
        };
        match s.split_once(':') {
            Some(("pseudo", seed)) => Ok(PointSource::Pseudo {
                seed: seed.parse().map_err(|_| bad())?,
            }),
            Some(("sobol", skip)) => Ok(PointSource::Sobol {
                skip: skip.parse().map_err(|_| bad())?,
            }),
            None if s == "sobol" => Ok(PointSource::Sobol { skip: 0 }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for PointSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointSource::Pseudo { seed } => write!(f, "pseudo:{seed}"),
            PointSource::Sobol { skip: 0 } => write!(f, "sobol"),
            PointSource::Sobol { skip } => write!(f, "sobol:{skip}"),
        }
    }
}

impl PointSource {
    /// Prepares a sampler for points of dimension `dim`.
    pub fn sampler(&self, dim: usize) -> Result<UniformSampler> {
        let kind = match *self {
            PointSource::Pseudo { seed } => SamplerKind::Pseudo(seed),
            PointSource::Sobol { skip } => {
                SamplerKind::Sobol(Sobol::new(DirectionTable::shipped(), dim)?, skip)
            }
        };
        Ok(UniformSampler { kind, dim })
    }
}

#[derive(Clone, Debug)]
enum SamplerKind {
    Pseudo(u64),
    Sobol(Sobol, u64),
}

/// Random access to per-path uniform vectors.
#[derive(Clone, Debug)]
pub struct UniformSampler {
    kind: SamplerKind,
    dim: usize,
}

impl UniformSampler {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fills `out[..dim]` with the uniforms of path `path_index`, all in (0,1).
    pub fn fill(&self, path_index: u64, out: &mut [f64]) -> Result<()> {
        match &self.kind {
            SamplerKind::Pseudo(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(path_index);
                for o in &mut out[..self.dim] {
                    *o = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
                }
                Ok(())
            }
            SamplerKind::Sobol(sobol, skip) => {
                let index = skip
                    .checked_add(path_index)
                    .and_then(|i| i.checked_add(1))
                    .ok_or(Error::SobolExhausted(u64::MAX))?;
                sobol.point_at(index, out)
            }
        }
    }
}

/// Uniform-coordinate layout of one path.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomLayout {
    n: usize,
    d: usize,
    thetas: Vec<u32>,
    coupling: Coupling,
}

impl RandomLayout {
    pub fn new(thetas: &[u32], n: usize, d: usize, coupling: Coupling) -> Result<Self> {
        if n == 0 || thetas.is_empty() || thetas.contains(&0) {
            return Err(Error::Parameter(format!(
                "layout needs n >= 1 and positive levels, got n={n}, levels {thetas:?}"
            )));
        }
        Ok(Self {
            n,
            d,
            thetas: thetas.to_vec(),
            coupling,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn thetas(&self) -> &[u32] {
        &self.thetas
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    fn columns(&self, theta: u32) -> usize {
        theta as usize * self.n
    }

    /// Standard normals drawn per path.
    pub fn gaussian_count(&self) -> usize {
        match self.coupling {
            Coupling::Independent => self.thetas.iter().map(|&t| self.d * self.columns(t)).sum(),
            Coupling::Reuse => {
                self.d * self.columns(*self.thetas.iter().max().expect("nonempty levels"))
            }
        }
    }

    /// Uniforms needed per path.
    pub fn dimension(&self) -> usize {
        self.n + self.gaussian_count()
    }

    /// Offset of level `k`'s Gaussian block, counted from coordinate `n`.
    fn block_offset(&self, k: usize) -> usize {
        match self.coupling {
            Coupling::Independent => self.thetas[..k]
                .iter()
                .map(|&t| self.d * self.columns(t))
                .sum(),
            Coupling::Reuse => 0,
        }
    }

    /// Coordinate of Gaussian `(row i in 1..=d, column c)` of level `k`.
    pub fn uniform_index(&self, k: usize, i: usize, c: usize) -> usize {
        debug_assert!((1..=self.d).contains(&i) && c < self.columns(self.thetas[k]));
        self.n + self.block_offset(k) + c * self.d + (i - 1)
    }
}

/// Increments of one level: row 0 is the drift time `T/(n theta)`, rows
/// `1..=d` are `N(0, T/(n theta))` draws, `theta * n` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelIncrements<R> {
    theta: u32,
    d: usize,
    dt: R,
    /// Column-major: entry `(i, c)` at `c * d + (i - 1)`.
    z: Vec<R>,
}

impl<R: Real> LevelIncrements<R> {
    /// Hand-built increments; `z` holds already scaled diffusion draws,
    /// column-major with `d` entries per column.
    pub fn new(theta: u32, dt: R, d: usize, z: Vec<R>) -> Result<Self> {
        if theta == 0 || (d == 0 && !z.is_empty()) || (d > 0 && !z.len().is_multiple_of(d)) {
            return Err(Error::Parameter(format!(
                "{} draws do not fill columns of {d} at theta = {theta}",
                z.len()
            )));
        }
        Ok(Self { theta, d, dt, z })
    }

    pub fn theta(&self) -> u32 {
        self.theta
    }

    pub fn columns(&self) -> usize {
        if self.d == 0 {
            0
        } else {
            self.z.len() / self.d
        }
    }

    /// Row 0 entry: the drift flow's time.
    pub fn drift_time(&self) -> R {
        self.dt
    }

    /// Entry `(i, c)` of the `(d+1) x (theta n)` increment matrix.
    pub fn get(&self, i: usize, c: usize) -> R {
        if i == 0 {
            self.dt
        } else {
            self.z[c * self.d + (i - 1)]
        }
    }

    /// Diffusion draws `Z_{1..d}` of column `c`.
    pub fn column(&self, c: usize) -> &[R] {
        &self.z[c * self.d..(c + 1) * self.d]
    }
}

/// Everything random about one path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRandomness<R> {
    /// `true` = forward ordering `V_0, ..., V_d` in that step.
    pub lambda: Vec<bool>,
    pub levels: Vec<LevelIncrements<R>>,
}

/// Draws [`PathRandomness`] for consecutive path indices, reusing buffers.
#[derive(Clone, Debug)]
pub struct PathDrawer<R> {
    sampler: UniformSampler,
    layout: RandomLayout,
    horizon: R,
    uniforms: Vec<f64>,
    normals: Vec<f64>,
    path: PathRandomness<R>,
}

impl<R: Real> PathDrawer<R> {
    pub fn new(source: &PointSource, layout: RandomLayout, horizon: R) -> Result<Self> {
        let sampler = source.sampler(layout.dimension())?;
        let n = layout.n;
        let levels = layout
            .thetas
            .iter()
            .map(|&theta| {
                let steps = R::from_usize(n * theta as usize).expect("step count");
                LevelIncrements {
                    theta,
                    d: layout.d,
                    dt: horizon / steps,
                    z: vec![R::zero(); layout.d * layout.columns(theta)],
                }
            })
            .collect();
        Ok(Self {
            uniforms: vec![0.0; layout.dimension()],
            normals: vec![0.0; layout.gaussian_count()],
            path: PathRandomness {
                lambda: vec![false; n],
                levels,
            },
            sampler,
            layout,
            horizon,
        })
    }

    pub fn layout(&self) -> &RandomLayout {
        &self.layout
    }

    pub fn horizon(&self) -> R {
        self.horizon
    }

    pub fn draw(&mut self, path_index: u64) -> Result<&PathRandomness<R>> {
        self.sampler.fill(path_index, &mut self.uniforms)?;
        let n = self.layout.n;
        for (l, &u) in self.path.lambda.iter_mut().zip(&self.uniforms[..n]) {
            *l = u >= 0.5;
        }
        for (z, &u) in self.normals.iter_mut().zip(&self.uniforms[n..]) {
            *z = gaussian_inverse_cdf(u)?;
        }
        for (k, level) in self.path.levels.iter_mut().enumerate() {
            let scale = level.dt.sqrt();
            let offset = self.layout.block_offset(k);
            for (z, &g) in level.z.iter_mut().zip(&self.normals[offset..]) {
                *z = scale * R::lit(g);
            }
        }
        Ok(&self.path)
    }
}

/// One-shot convenience around [`PathDrawer`].
pub fn draw_path_randomness<R: Real>(
    source: &PointSource,
    path_index: u64,
    layout: &RandomLayout,
    horizon: R,
) -> Result<PathRandomness<R>> {
    let mut drawer = PathDrawer::new(source, layout.clone(), horizon)?;
    Ok(drawer.draw(path_index)?.clone())
}
