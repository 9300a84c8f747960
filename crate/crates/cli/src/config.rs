//! Flat `key = value` study configuration.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use sdefw_core::extrapolation::solve_weights;
use sdefw_core::models::{build_model, model_keys, ParamMap};
use sdefw_core::randomness::{Coupling, PointSource};
use sdefw_core::scheme_engine::{MAX_GAUSSIAN_DIMS, MAX_STEPS};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Mc,
    Qmc,
    QuadratureOracle,
    AlgebraVerify,
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(Mode::Mc),
            "qmc" => Ok(Mode::Qmc),
            "quadrature-oracle" => Ok(Mode::QuadratureOracle),
            "algebra-verify" => Ok(Mode::AlgebraVerify),
            _ => Err(CliError::usage(
                "mode",
                format!("'{s}' is not one of mc, qmc, quadrature-oracle, algebra-verify"),
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Mc => "mc",
            Mode::Qmc => "qmc",
            Mode::QuadratureOracle => "quadrature-oracle",
            Mode::AlgebraVerify => "algebra-verify",
        })
    }
}

/// What the errors in the study table are measured against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    Value(f64),
    /// The model's closed-form expectation.
    Exact,
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::Value(v) => write!(f, "{v:e}"),
            Reference::Exact => f.write_str("exact"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub mode: Mode,
    pub model: String,
    pub params: ParamMap,
    /// Level tuples, one per scheme.
    pub schemes: Vec<Vec<u32>>,
    pub n: Vec<usize>,
    pub paths: u64,
    pub rng: PointSource,
    pub coupling: Coupling,
    pub reference: Option<Reference>,
    /// Gauss-Hermite nodes per dimension (quadrature-oracle mode).
    pub nodes: usize,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    /// Algebra suite: levels `1..=m`, `d` Brownian letters, truncation degree.
    pub m: usize,
    pub d: usize,
    pub degree: usize,
}

const STUDY_KEYS: &[&str] = &[
    "mode",
    "model",
    "schemes",
    "n",
    "M",
    "rng",
    "coupling",
    "reference",
    "nodes",
    "out",
    "plot",
    "m",
    "d",
    "degree",
];

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = split_pair(line)
            .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value", k + 1)))?;
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::usage(key, format!("set twice (line {})", k + 1)));
        }
    }
    Ok(map)
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty()).then_some((k, v))
}

/// Applies `--set key=value` overrides.
pub fn apply_overrides(map: &mut BTreeMap<String, String>, sets: &[String]) -> Result<()> {
    for s in sets {
        let (k, v) = split_pair(s)
            .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got '{s}'")))?;
        map.insert(k.to_string(), v.to_string());
    }
    Ok(())
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| CliError::usage(key, format!("cannot parse '{v}'")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|t| parse_num(key, t.trim())).collect()
}

/// `1; 1,2; 1,2,3`, with `NV` as an alias for the single level `1`.
fn parse_schemes(v: &str) -> Result<Vec<Vec<u32>>> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            if s.eq_ignore_ascii_case("nv") {
                Ok(vec![1])
            } else {
                parse_list("schemes", s.trim_start_matches('(').trim_end_matches(')'))
            }
        })
        .collect()
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let mode: Mode = get("mode").unwrap_or("mc").parse()?;
        let model = get("model").unwrap_or("heston").to_string();
        let param_keys = if mode == Mode::AlgebraVerify {
            &[][..]
        } else {
            model_keys(&model).map_err(|e| CliError::usage("model", e.to_string()))?
        };
        let mut params = ParamMap::new();
        for (k, v) in map {
            if param_keys.contains(&k.as_str()) {
                params.insert(k.clone(), parse_num(k, v)?);
            } else if !STUDY_KEYS.contains(&k.as_str()) {
                return Err(CliError::usage(k, "unknown key"));
            }
        }
        let rng = match get("rng") {
            Some(s) => s
                .parse()
                .map_err(|e: sdefw_core::Error| CliError::usage("rng", e.to_string()))?,
            None if mode == Mode::Qmc => PointSource::Sobol { skip: 0 },
            None => PointSource::Pseudo { seed: 0 },
        };
        let cfg = Self {
            mode,
            model,
            params,
            schemes: parse_schemes(get("schemes").unwrap_or("1"))?,
            n: parse_list("n", get("n").unwrap_or("2"))?,
            paths: parse_num("M", get("M").unwrap_or("10000"))?,
            rng,
            coupling: match get("coupling") {
                Some(s) => s
                    .parse()
                    .map_err(|e: sdefw_core::Error| CliError::usage("coupling", e.to_string()))?,
                None => Coupling::default(),
            },
            reference: match get("reference") {
                None => None,
                Some("exact") => Some(Reference::Exact),
                Some(v) => Some(Reference::Value(parse_num("reference", v)?)),
            },
            nodes: parse_num("nodes", get("nodes").unwrap_or("8"))?,
            out: get("out").map(PathBuf::from),
            plot: get("plot").map(PathBuf::from),
            m: parse_num("m", get("m").unwrap_or("3"))?,
            d: parse_num("d", get("d").unwrap_or("1"))?,
            degree: parse_num("degree", get("degree").unwrap_or("6"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.mode == Mode::AlgebraVerify {
            if self.m == 0 || self.d == 0 || self.degree == 0 {
                return Err(CliError::usage("m", "m, d and degree must be positive"));
            }
            return Ok(());
        }
        if self.n.is_empty() || self.n[0] == 0 || self.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::usage(
                "n",
                "values must be positive and increasing",
            ));
        }
        if self.schemes.is_empty() {
            return Err(CliError::usage(
                "schemes",
                "at least one scheme is required",
            ));
        }
        for s in &self.schemes {
            solve_weights::<f64>(s).map_err(|e| CliError::usage("schemes", e.to_string()))?;
        }
        let model = build_model::<f64>(&self.model, &self.params)
            .map_err(|e| CliError::usage("model", e.to_string()))?;
        match (self.mode, &self.rng) {
            (Mode::Mc, PointSource::Sobol { .. }) => {
                return Err(CliError::usage("rng", "mode mc needs a pseudo source"))
            }
            (Mode::Qmc, PointSource::Pseudo { .. }) => {
                return Err(CliError::usage("rng", "mode qmc needs a sobol source"))
            }
            _ => {}
        }
        if matches!(self.mode, Mode::Mc | Mode::Qmc) && self.paths == 0 {
            return Err(CliError::usage("M", "at least one path is required"));
        }
        if self.mode == Mode::QuadratureOracle {
            if model.noise_dim() != 1 {
                return Err(CliError::usage(
                    "model",
                    format!(
                        "quadrature-oracle needs one Brownian driver, {} has {}",
                        self.model,
                        model.noise_dim()
                    ),
                ));
            }
            let tmax = self.schemes.iter().flatten().max().copied().unwrap_or(1) as usize;
            let nmax = *self.n.last().expect("validated non-empty");
            if tmax * nmax > MAX_GAUSSIAN_DIMS || nmax > MAX_STEPS {
                return Err(CliError::usage(
                    "n",
                    format!(
                        "quadrature-oracle needs theta_max * n <= {}",
                        MAX_GAUSSIAN_DIMS
                    ),
                ));
            }
        }
        if self.reference == Some(Reference::Exact) && model.exact_expectation().is_none() {
            return Err(CliError::usage(
                "reference",
                format!("{} has no closed-form expectation", self.model),
            ));
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("mode", self.mode.to_string());
        if self.mode == Mode::AlgebraVerify {
            kv("m", self.m.to_string());
            kv("d", self.d.to_string());
            kv("degree", self.degree.to_string());
            return s;
        }
        kv("model", self.model.clone());
        for (k, v) in &self.params {
            kv(k, v.to_string());
        }
        let schemes: Vec<String> = self.schemes.iter().map(|t| join(t, ",")).collect();
        kv("schemes", schemes.join("; "));
        kv("n", join(&self.n, ","));
        kv("M", self.paths.to_string());
        kv("rng", self.rng.to_string());
        kv("coupling", self.coupling.to_string());
        if let Some(r) = self.reference {
            kv("reference", r.to_string());
        }
        kv("nodes", self.nodes.to_string());
        if let Some(p) = &self.out {
            kv("out", p.display().to_string());
        }
        if let Some(p) = &self.plot {
            kv("plot", p.display().to_string());
        }
        s
    }
}
