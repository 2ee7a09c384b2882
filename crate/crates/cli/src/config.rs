//! Run configuration assembled from command-line flags, a flat `key = value`
//! config file and the `SELBERG_SEED` environment variable, in that order of
//! precedence.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use selberg_core::identity_suite::{Axis, Budget, GridSpec};
use selberg_core::{IdentityId, ParamSet};
use thiserror::Error;

/// Seed used when neither a flag, the config file nor the environment sets one.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{key}: cannot parse '{value}': {why}")]
    Parse { key: String, value: String, why: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("{path}: {why}")]
    File { path: PathBuf, why: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Pretty,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "pretty" => Ok(Format::Pretty),
            _ => Err("expected json, csv or pretty".into()),
        }
    }
}

/// Every setting as an optional value; flags and file share this shape.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub identity: Vec<IdentityId>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub alpha: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub gamma: Option<f64>,
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    pub grid: Option<PathBuf>,
    pub tol: Option<f64>,
    pub budget: Option<String>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::Parse {
        key: key.to_string(),
        value: value.to_string(),
        why: e.to_string(),
    })
}

/// `key = value` lines; `#` starts a comment.
fn flat_pairs(text: &str, path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::File {
            path: path.to_path_buf(),
            why: format!("line {}: expected key = value", no + 1),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.to_path_buf(),
        why: e.to_string(),
    })
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        for (k, v) in flat_pairs(&read(path)?, path)? {
            s.set(&k, &v)?;
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "identity" => {
                for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    self.identity.push(parse(key, part)?);
                }
            }
            "k" => {
                self.k1 = Some(parse(key, value)?);
                self.k2 = Some(0);
            }
            "k1" => self.k1 = Some(parse(key, value)?),
            "k2" => self.k2 = Some(parse(key, value)?),
            "alpha" => self.alpha = Some(parse(key, value)?),
            "beta" | "beta1" => self.beta1 = Some(parse(key, value)?),
            "beta2" => self.beta2 = Some(parse(key, value)?),
            "gamma" => self.gamma = Some(parse(key, value)?),
            "z" | "z1" => self.z1 = Some(parse(key, value)?),
            "z2" => self.z2 = Some(parse(key, value)?),
            "grid" => self.grid = Some(PathBuf::from(value)),
            "tol" => self.tol = Some(parse(key, value)?),
            "budget" => self.budget = Some(value.to_string()),
            "seed" => self.seed = Some(parse(key, value)?),
            "format" => self.format = Some(parse(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Fills every unset field of `self` from `other`.
    pub fn or(self, other: Settings) -> Settings {
        Settings {
            identity: if self.identity.is_empty() {
                other.identity
            } else {
                self.identity
            },
            k1: self.k1.or(other.k1),
            k2: self.k2.or(other.k2),
            alpha: self.alpha.or(other.alpha),
            beta1: self.beta1.or(other.beta1),
            beta2: self.beta2.or(other.beta2),
            gamma: self.gamma.or(other.gamma),
            z1: self.z1.or(other.z1),
            z2: self.z2.or(other.z2),
            grid: self.grid.or(other.grid),
            tol: self.tol.or(other.tol),
            budget: self.budget.or(other.budget),
            seed: self.seed.or(other.seed),
            format: self.format.or(other.format),
            out: self.out.or(other.out),
        }
    }
}

/// Budget from a preset name or a list `nodes=.., samples=.., series_tol=.., max_bound=..`.
pub fn parse_budget(spec: &str) -> Result<Budget, ConfigError> {
    let base = Budget::default();
    match spec.trim() {
        "default" | "" => return Ok(base),
        "quick" => {
            return Ok(Budget {
                nodes_per_axis: 10,
                mc_samples: 500_000,
                series_rel_tol: 1e-10,
                max_bound: None,
            })
        }
        "thorough" => {
            return Ok(Budget {
                nodes_per_axis: 24,
                mc_samples: 16_000_000,
                series_rel_tol: 1e-14,
                max_bound: None,
            })
        }
        _ => {}
    }
    let mut b = base;
    for part in spec.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| ConfigError::Parse {
            key: "budget".into(),
            value: spec.into(),
            why: "expected a preset (quick, default, thorough) or key=value pairs".into(),
        })?;
        let k = k.trim();
        match k {
            "nodes" => b.nodes_per_axis = parse(k, v)?,
            "samples" => b.mc_samples = parse(k, v)?,
            "series_tol" => b.series_rel_tol = parse(k, v)?,
            "max_bound" => b.max_bound = Some(parse(k, v)?),
            _ => return Err(ConfigError::UnknownKey(format!("budget.{k}"))),
        }
    }
    if b.nodes_per_axis == 0 || b.mc_samples == 0 || !(b.series_rel_tol > 0.0) {
        return Err(ConfigError::Invalid("budget values must be positive".into()));
    }
    Ok(b)
}

/// Grid file: either lists (`alpha = 1, 1.5, 2`) giving a Cartesian grid,
/// or ranges (`gamma = -0.3 .. -0.02`) with `draws = N` and optional `seed`
/// giving a random grid.
pub fn parse_grid(path: &Path, base: ParamSet, default_seed: u64) -> Result<GridSpec, ConfigError> {
    let mut lists: Vec<(Axis, Vec<f64>)> = Vec::new();
    let mut ranges: Vec<(Axis, f64, f64)> = Vec::new();
    let mut draws = None;
    let mut seed = default_seed;
    for (k, v) in flat_pairs(&read(path)?, path)? {
        match k.as_str() {
            "draws" => draws = Some(parse::<usize>(&k, &v)?),
            "seed" => seed = parse(&k, &v)?,
            _ => {
                let axis: Axis = k.parse().map_err(|_| ConfigError::UnknownKey(format!("grid.{k}")))?;
                if let Some((lo, hi)) = v.split_once("..") {
                    let (lo, hi): (f64, f64) = (parse(&k, lo)?, parse(&k, hi)?);
                    if !(lo < hi) {
                        return Err(ConfigError::Invalid(format!("grid.{k}: empty range {lo}..{hi}")));
                    }
                    ranges.push((axis, lo, hi));
                } else {
                    let values = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse(&k, s))
                        .collect::<Result<Vec<f64>, _>>()?;
                    lists.push((axis, values));
                }
            }
        }
    }
    match (lists.is_empty(), ranges.is_empty()) {
        (_, true) => {
            if draws.is_some() {
                return Err(ConfigError::Invalid("grid: draws given without ranges".into()));
            }
            Ok(GridSpec::Cartesian { base, axes: lists })
        }
        (true, false) => Ok(GridSpec::Random {
            base,
            draws: draws.ok_or_else(|| ConfigError::Invalid("grid: ranges need draws = N".into()))?,
            ranges,
            seed,
        }),
        (false, false) => Err(ConfigError::Invalid("grid: mix of value lists and ranges".into())),
    }
}

/// Fully resolved configuration of a `verify` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub identities: Vec<IdentityId>,
    pub grid: GridSpec,
    pub tol: Option<f64>,
    pub budget: Budget,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(s: Settings, env_seed: Option<String>) -> Result<Self, ConfigError> {
        if s.identity.is_empty() {
            return Err(ConfigError::Invalid("no identity selected (use --identity)".into()));
        }
        let d = ParamSet::default();
        let base = ParamSet {
            k1: s.k1.unwrap_or(d.k1),
            k2: s.k2.unwrap_or(d.k2),
            alpha: s.alpha.unwrap_or(d.alpha),
            beta1: s.beta1.unwrap_or(d.beta1),
            beta2: s.beta2.unwrap_or(d.beta2),
            gamma: s.gamma.unwrap_or(d.gamma),
            z1: s.z1.unwrap_or(d.z1),
            z2: s.z2.unwrap_or(d.z2),
        };
        let seed = match (s.seed, env_seed) {
            (Some(v), _) => v,
            (None, Some(e)) => parse("SELBERG_SEED", &e)?,
            (None, None) => DEFAULT_SEED,
        };
        if let Some(t) = s.tol {
            if !(t > 0.0) {
                return Err(ConfigError::Invalid(format!("tol: must be positive, got {t}")));
            }
        }
        let grid = match &s.grid {
            Some(path) => parse_grid(path, base, seed)?,
            None => GridSpec::Points(vec![base]),
        };
        Ok(RunConfig {
            identities: s.identity,
            grid,
            tol: s.tol,
            budget: parse_budget(s.budget.as_deref().unwrap_or("default"))?,
            seed,
            format: s.format.unwrap_or_default(),
            out: s.out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let flags = Settings {
            alpha: Some(2.0),
            ..Settings::default()
        };
        let file = Settings {
            alpha: Some(1.0),
            gamma: Some(-0.2),
            identity: vec![IdentityId::Selb],
            ..Settings::default()
        };
        let s = flags.or(file);
        assert_eq!(s.alpha, Some(2.0));
        assert_eq!(s.gamma, Some(-0.2));
        assert_eq!(s.identity, vec![IdentityId::Selb]);
    }

    #[test]
    fn budget_specs() {
        assert_eq!(parse_budget("default").unwrap(), Budget::default());
        let b = parse_budget("nodes=12, samples=1000").unwrap();
        assert_eq!((b.nodes_per_axis, b.mc_samples), (12, 1000));
        assert!(parse_budget("nodes=0").is_err());
        assert!(parse_budget("speed=3").is_err());
    }

    #[test]
    fn seed_precedence() {
        let s = Settings {
            identity: vec![IdentityId::Selb],
            ..Settings::default()
        };
        assert_eq!(RunConfig::resolve(s.clone(), Some("9".into())).unwrap().seed, 9);
        assert_eq!(RunConfig::resolve(s.clone(), None).unwrap().seed, DEFAULT_SEED);
        let s = Settings { seed: Some(3), ..s };
        assert_eq!(RunConfig::resolve(s, Some("9".into())).unwrap().seed, 3);
    }
}
