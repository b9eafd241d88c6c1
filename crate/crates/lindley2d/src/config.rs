//! Experiment configuration: one TOML or JSON document per experiment.
//!
//! ```toml
//! name = "case_c_rho_zero"
//! seed = 2024
//!
//! [distribution]
//! kind = "product"
//! first = { kind = "finite_support", atoms = [[1, "1/2"], [-1, "1/2"]] }
//! second = { kind = "finite_support", atoms = [[1, "1/2"], [-1, "1/2"]] }
//!
//! [tail]
//! start = [1, 1]
//! n_max = 10000
//! paths = 1000000
//! ```
//!
//! Probabilities may be numbers, decimal strings (`"0.25"`) or fractions
//! of integers (`"1/3"`); strings are kept verbatim when the resolved
//! configuration is written back out.

use std::path::{Path, PathBuf};

use lindley2d_core::model::{IncrementDistribution, Marginal1D, PowerNegativeTail};
use lindley2d_core::{Point2, DEFAULT_DELTA};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

/// A probability as written in the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probability {
    Number(f64),
    Text(String),
}

impl Probability {
    pub fn value(&self) -> Result<f64, String> {
        match self {
            Probability::Number(p) => Ok(*p),
            Probability::Text(s) => {
                let s = s.trim();
                if let Some((num, den)) = s.split_once('/') {
                    let num: i64 = num.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
                    let den: i64 = den.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
                    if den == 0 {
                        return Err(format!("zero denominator in {s:?}"));
                    }
                    Ok(num as f64 / den as f64)
                } else {
                    s.parse::<f64>().map_err(|_| format!("cannot parse probability {s:?}"))
                }
            }
        }
    }
}

impl From<f64> for Probability {
    fn from(p: f64) -> Self {
        Probability::Number(p)
    }
}

impl From<&str> for Probability {
    fn from(p: &str) -> Self {
        Probability::Text(p.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarginalSpec {
    FiniteSupport {
        atoms: Vec<(f64, Probability)>,
    },
    Gaussian {
        mean: f64,
        variance: f64,
    },
    /// Either `mean` or `positive_atom` must be given.
    PowerNegativeTail {
        beta: f64,
        neg_mass: Probability,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        positive_atom: Option<f64>,
    },
}

impl MarginalSpec {
    pub fn build(&self, field: &str) -> Result<Marginal1D, ConfigError> {
        match self {
            MarginalSpec::FiniteSupport { atoms } => {
                let atoms = atoms
                    .iter()
                    .enumerate()
                    .map(|(i, (v, p))| {
                        p.value()
                            .map(|p| (*v, p))
                            .map_err(|e| ConfigError::field(format!("{field}.atoms[{i}]"), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Marginal1D::finite(atoms).map_err(|e| ConfigError::field(format!("{field}.atoms"), e))
            }
            MarginalSpec::Gaussian { mean, variance } => {
                Marginal1D::gaussian(*mean, *variance).map_err(|e| ConfigError::field(field, e))
            }
            MarginalSpec::PowerNegativeTail {
                beta,
                neg_mass,
                mean,
                positive_atom,
            } => {
                let q = neg_mass
                    .value()
                    .map_err(|e| ConfigError::field(format!("{field}.neg_mass"), e))?;
                let tail = match (mean, positive_atom) {
                    (Some(m), None) => PowerNegativeTail::with_mean(*beta, q, *m),
                    (None, Some(c)) => PowerNegativeTail::new(*beta, q, *c),
                    _ => {
                        return Err(ConfigError::field(
                            field,
                            "exactly one of `mean` and `positive_atom` is required",
                        ))
                    }
                };
                tail.map(Marginal1D::PowerNegativeTail)
                    .map_err(|e| ConfigError::field(field, e))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    FiniteSupport { atoms: Vec<(Point2, Probability)> },
    BivariateGaussian { mean: Point2, covariance: [[f64; 2]; 2] },
    Product { first: MarginalSpec, second: MarginalSpec },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<IncrementDistribution, ConfigError> {
        const FIELD: &str = "distribution";
        match self {
            DistributionSpec::FiniteSupport { atoms } => {
                let atoms = atoms
                    .iter()
                    .enumerate()
                    .map(|(i, (v, p))| {
                        p.value()
                            .map(|p| (*v, p))
                            .map_err(|e| ConfigError::field(format!("{FIELD}.atoms[{i}]"), e))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                IncrementDistribution::finite(atoms).map_err(|e| ConfigError::field(format!("{FIELD}.atoms"), e))
            }
            DistributionSpec::BivariateGaussian { mean, covariance } => {
                IncrementDistribution::gaussian(*mean, *covariance)
                    .map_err(|e| ConfigError::field(format!("{FIELD}.covariance"), e))
            }
            DistributionSpec::Product { first, second } => Ok(IncrementDistribution::product(
                first.build("distribution.first")?,
                second.build("distribution.second")?,
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyParams {
    pub delta: f64,
    /// Recorded as a violation when the verdict differs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_case: Option<String>,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            expected_verdict: None,
            expected_case: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailParams {
    pub start: Point2,
    /// Censoring horizon and largest grid point.
    pub n_max: u64,
    /// Log-spaced grid density when `n_grid` is absent.
    pub per_decade: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<u64>>,
    pub paths: u64,
    /// `[n_min, n_max]`; absent means the default window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[u64; 2]>,
    /// Acceptable range for the fitted exponent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_exponent: Option<[f64; 2]>,
    /// Check `P[τ > n] ≤ c·n^{−r}` with this `r` over `decay_window`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_window: Option<[u64; 2]>,
    /// `[n_ref, n_far]` for the flat-tail check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat: Option<[u64; 2]>,
}

impl Default for TailParams {
    fn default() -> Self {
        Self {
            start: [1.0, 1.0],
            n_max: 10_000,
            per_decade: 20,
            n_grid: None,
            paths: 100_000,
            window: None,
            expected_exponent: None,
            decay_power: None,
            decay_window: None,
            flat: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicMode {
    /// `h₁` by Monte Carlo.
    H1,
    /// `h₁` by the lattice linear solve.
    H1Exact,
    /// The 2-D function `h` by Monte Carlo.
    H2d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmonicParams {
    pub mode: HarmonicMode,
    /// One coordinate per point for `h₁`, two for `h`.
    pub points: Vec<Vec<f64>>,
    pub horizon: u64,
    pub paths: u64,
    pub truncation: usize,
    /// Lattice `h₁`: residuals are checked on `1..=residual_upto`.
    pub residual_upto: usize,
    /// `h`: residuals are checked on the `k × k` grid `{1..k}²`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_grid: Option<u32>,
    pub residual_paths: u64,
}

impl Default for HarmonicParams {
    fn default() -> Self {
        Self {
            mode: HarmonicMode::H1Exact,
            points: vec![vec![1.0], vec![10.0], vec![100.0], vec![1000.0]],
            horizon: 10_000,
            paths: 100_000,
            truncation: 10_000,
            residual_upto: 500,
            residual_grid: None,
            residual_paths: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovParams {
    pub grid_end: f64,
    pub grid_step: f64,
    /// Defaults to `1e-12` for finite support and `1e-6` otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        Self {
            grid_end: 10.0,
            grid_step: 0.01,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualityParams {
    pub trials: u64,
    pub max_len: usize,
    /// Relative tolerance for continuous increments.
    pub tolerance: f64,
}

impl Default for DualityParams {
    fn default() -> Self {
        Self {
            trials: 10_000,
            max_len: 200,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OccupationParams {
    pub corner: Point2,
    pub n_max: u64,
    pub paths: u64,
    /// Largest acceptable `|z|` between the two series.
    pub z_limit: f64,
}

impl Default for OccupationParams {
    fn default() -> Self {
        Self {
            corner: [2.0, 2.0],
            n_max: 1000,
            paths: 10_000,
            z_limit: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    /// 1-D law for `h₁` and the Lyapunov function; defaults to the first
    /// marginal of `distribution`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginal: Option<MarginalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic: Option<HarmonicParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality: Option<DualityParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupation: Option<OccupationParams>,
}

impl ExperimentConfig {
    /// Parses TOML or JSON, chosen by extension (`.json`, otherwise TOML).
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        };
        parsed.map_err(|message| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn distribution(&self) -> Result<IncrementDistribution, ConfigError> {
        self.distribution
            .as_ref()
            .ok_or_else(|| ConfigError::field("distribution", "section is required for this command"))?
            .build()
    }

    /// The `marginal` section, or else the first marginal of the
    /// distribution.
    pub fn marginal(&self) -> Result<Marginal1D, ConfigError> {
        match &self.marginal {
            Some(m) => m.build("marginal"),
            None => Ok(self.distribution()?.marginal(0)),
        }
    }

    /// Fills in the parameter section `command` needs, so that the
    /// serialized configuration is complete.
    pub fn resolve(mut self, command: crate::Command) -> Self {
        use crate::Command::*;
        match command {
            Classify => {
                self.classify.get_or_insert_with(Default::default);
            }
            Tail => {
                self.tail.get_or_insert_with(Default::default);
            }
            Harmonic => {
                self.harmonic.get_or_insert_with(Default::default);
            }
            Lyapunov => {
                self.lyapunov.get_or_insert_with(Default::default);
            }
            Duality => {
                self.duality.get_or_insert_with(Default::default);
            }
            Occupation => {
                self.occupation.get_or_insert_with(Default::default);
            }
        }
        self
    }
}
