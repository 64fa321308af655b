//! Prepotential input files.
//!
//! ```toml
//! spin = 1
//! rank_E = 2
//! gauge_rank = 2
//! mode = "halfflat"
//! prepotential = "xplus[1]^2 * N"
//!
//! [[nilpotent_generators]]
//! name = "N"
//! matrix = [[0, 1], [0, 0]]
//! ```
//!
//! Optional: `params = ["t"]` (charge-0 symbols), `series_order = k` (use
//! the truncated series for `Φ`), `max_degree`.

use crate::gauge::{GaugeOptions, PhiMode, DEFAULT_MAX_DEGREE};
use crate::harmonic::{AnalyticMode, HarmonicModel, ModelOptions};
use crate::linalg::{self, Mat};
use crate::parser::{self, Ast, Scope};
use crate::poly::PolyMatrix;
use crate::scalar::Gq;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Toml(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("prepotential: {0}")]
    Parse(#[from] parser::ParseError),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
}

impl Entry {
    fn value(&self) -> Result<Gq> {
        match self {
            Entry::Int(v) => Ok(Gq::int(*v)),
            Entry::Text(s) => {
                let bad = || ConfigError::Invalid(format!("matrix entry '{s}' is not a rational"));
                let (n, d) = match s.trim().split_once('/') {
                    Some((n, d)) => (n.trim(), d.trim()),
                    None => (s.trim(), "1"),
                };
                let n: BigInt = n.parse().map_err(|_| bad())?;
                let d: BigInt = d.parse().map_err(|_| bad())?;
                if d == BigInt::from(0) {
                    return Err(bad());
                }
                Ok(Gq::real(BigRational::new(n, d)))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct Generator {
    pub name: String,
    pub matrix: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PrepotentialConfig {
    pub spin: usize,
    #[serde(rename = "rank_E")]
    pub rank_e: usize,
    pub gauge_rank: usize,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub nilpotent_generators: Vec<Generator>,
    pub prepotential: String,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default)]
    pub series_order: Option<usize>,
    #[serde(default)]
    pub max_degree: Option<usize>,
}

pub fn parse_mode(s: &str) -> Option<AnalyticMode> {
    match s {
        "halfflat" => Some(AnalyticMode::HalfFlat),
        "0partial" => Some(AnalyticMode::ZeroPartial),
        "1partial" => Some(AnalyticMode::OnePartial),
        _ => None,
    }
}

/// Everything needed to run a pipeline.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub model: HarmonicModel,
    pub mode: AnalyticMode,
    pub ast: Ast,
    pub a_pp: PolyMatrix,
    pub options: GaugeOptions,
}

impl PrepotentialConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ConfigError::Toml(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Builds the model and elaborates the prepotential. `mode` overrides the
    /// file, `max_degree` the default bound.
    pub fn prepare(&self, mode: Option<AnalyticMode>, max_degree: Option<usize>) -> Result<Prepared> {
        let mode = match (mode, &self.mode) {
            (Some(m), _) => m,
            (None, Some(s)) => {
                parse_mode(s).ok_or_else(|| ConfigError::Invalid(format!("unknown mode '{s}'")))?
            }
            (None, None) if self.spin == 1 => AnalyticMode::HalfFlat,
            (None, None) => {
                return Err(ConfigError::Invalid("spin 3 needs a mode".into()));
            }
        };
        if mode.spin() != self.spin {
            return Err(ConfigError::Invalid(format!(
                "mode {} needs spin {}, config has {}",
                mode.name(),
                mode.spin(),
                self.spin
            )));
        }
        let opts = ModelOptions {
            params: self.params.clone(),
            ..ModelOptions::default()
        };
        let model = HarmonicModel::build_with(self.spin, self.rank_e, self.gauge_rank, &opts)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let mut scope = Scope::default();
        for g in &self.nilpotent_generators {
            let m: Mat<Gq> = g
                .matrix
                .iter()
                .map(|r| r.iter().map(Entry::value).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let r = self.gauge_rank;
            if m.len() != r || m.iter().any(|row| row.len() != r) {
                return Err(ConfigError::Invalid(format!(
                    "generator {} must be {r}×{r}",
                    g.name
                )));
            }
            if self.series_order.is_none() && !is_nilpotent(&m) {
                return Err(ConfigError::Invalid(format!(
                    "generator {} is not nilpotent; set series_order for non-nilpotent input",
                    g.name
                )));
            }
            if scope.matrices.insert(g.name.clone(), m).is_some() {
                return Err(ConfigError::Invalid(format!("generator {} declared twice", g.name)));
            }
        }
        let ast = parser::parse(&self.prepotential)?;
        let a_pp = parser::elaborate(&ast, &model, &scope)?;
        let options = GaugeOptions {
            max_degree: max_degree.or(self.max_degree).unwrap_or(DEFAULT_MAX_DEGREE),
            phi_mode: match self.series_order {
                Some(k) => PhiMode::Series(k),
                None => PhiMode::Nilpotent,
            },
        };
        Ok(Prepared {
            model,
            mode,
            ast,
            a_pp,
            options,
        })
    }
}

fn is_nilpotent(m: &Mat<Gq>) -> bool {
    let mut p = m.clone();
    for _ in 1..m.len() {
        p = linalg::mat_mul(&p, m);
    }
    linalg::is_zero_mat(&p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = r#"
spin = 1
rank_E = 2
gauge_rank = 2
prepotential = "xplus[1]^2 * N"

[[nilpotent_generators]]
name = "N"
matrix = [[0, 1], [0, 0]]
"#;

    #[test]
    fn worked_config() {
        let c = PrepotentialConfig::from_toml(WORKED).unwrap();
        let p = c.prepare(None, None).unwrap();
        assert_eq!(p.mode, AnalyticMode::HalfFlat);
        assert!(!p.a_pp.is_zero());
    }

    #[test]
    fn rejects_non_nilpotent() {
        let text = WORKED.replace("[[0, 1], [0, 0]]", "[[1, 0], [0, 0]]");
        let c = PrepotentialConfig::from_toml(&text).unwrap();
        assert!(c.prepare(None, None).is_err());
    }

    #[test]
    fn rational_entries() {
        let text = WORKED.replace("[[0, 1], [0, 0]]", r#"[[0, "3/2"], [0, 0]]"#);
        let c = PrepotentialConfig::from_toml(&text).unwrap();
        assert!(c.prepare(None, None).is_ok());
    }

    #[test]
    fn mode_spin_mismatch() {
        let c = PrepotentialConfig::from_toml(WORKED).unwrap();
        assert!(c.prepare(Some(AnalyticMode::OnePartial), None).is_err());
    }
}
