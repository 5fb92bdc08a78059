use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::Deserialize;
use shiftlab_core::dyadic::Rat;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Declarative experiment description; flags override the scalar fields.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub horizon: Option<u64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub criterion: CriterionConfig,
    #[serde(default)]
    pub construct: ConstructConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

/// Rule-set expressions: `evens`, `odds`, `squares`, `full`, `empty`,
/// `explicit:[a,b,...]`, `interval-union base=B`, `ap start=A step=S`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityConfig {
    pub rules: Vec<String>,
    /// 0 means "pick horizon/100".
    pub stride: u64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            rules: vec![
                "evens".into(),
                "empty".into(),
                "interval-union base=2".into(),
            ],
            stride: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriterionConfig {
    /// `constant`, `fratio`, or `explicit`; anything else yields the
    /// `Unknown` verdict (not an error).
    pub family: String,
    /// Ratio of the constant family, e.g. "2" or "101/100".
    pub lambda: String,
    /// Exponent parameter of the f-ratio family.
    pub fpow: f64,
    /// Head/tail of the explicit family.
    pub head: Vec<String>,
    pub tail: String,
    /// Summability exponent.
    pub p: f64,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        Self {
            family: "constant".into(),
            lambda: "2".into(),
            fpow: 1.0,
            head: Vec::new(),
            tail: "2".into(),
            p: 2.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstructConfig {
    /// `fhc`, `tm`, `eq`, `ne-plan`, or `ne-scaled`.
    pub kind: String,
    pub p: f64,
    /// Cylinder target prefixes, rationals as strings; empty means built-in
    /// defaults for the selected construction.
    pub targets: Vec<Vec<String>>,
    /// Baire-point prefix for the tm construction.
    pub x: Vec<u64>,
    /// Cylinder radius.
    pub radius: String,
    /// Stage cap for the eq construction.
    pub t_max: usize,
    /// Cap on orbit-identity samples per stage for the tm manifest.
    pub pairs: u64,
    /// Literal index plan depth.
    pub i_max: usize,
    /// Fiber sizes for the index plan; empty means all ones.
    pub m: Vec<u64>,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        Self {
            kind: "fhc".into(),
            p: 2.0,
            targets: Vec::new(),
            x: vec![0, 1, 1, 1],
            radius: "1/4".into(),
            t_max: 12,
            pairs: 200,
            i_max: 1,
            m: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Random hereditary families to decompose.
    pub trials: u32,
    /// Universe bound for the families.
    pub bound: u32,
    /// Random instances per algebra law.
    pub instances: u32,
    /// Negative control: plant a non-hereditary family and expect the suite
    /// to catch it.
    pub inject_non_hereditary: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            bound: 10,
            instances: 200,
            inject_non_hereditary: false,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.horizon() < 2 {
            return Err(CliError::Validation(format!(
                "horizon must be >= 2, got {}",
                self.horizon()
            )));
        }
        for p in [self.criterion.p, self.construct.p] {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(CliError::Validation(format!("p must be in [1, inf), got {p}")));
            }
        }
        if self.density.rules.is_empty() {
            return Err(CliError::Validation("density.rules must be nonempty".into()));
        }
        Ok(())
    }

    pub fn horizon(&self) -> u64 {
        self.horizon.unwrap_or(10_000)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(7)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or(OutputFormat::Csv)
    }
}

pub fn parse_rat(s: &str) -> Result<Rat, CliError> {
    Rat::from_str(s.trim())
        .map_err(|e| CliError::Validation(format!("bad rational `{s}`: {e}")))
}

pub fn parse_rat_rows(rows: &[Vec<String>]) -> Result<Vec<Vec<Rat>>, CliError> {
    rows.iter()
        .map(|row| row.iter().map(|s| parse_rat(s)).collect())
        .collect()
}

/// Worker cap for parallel verification, from SHIFTLAB_THREADS.
pub fn thread_cap() -> Result<usize, CliError> {
    match std::env::var("SHIFTLAB_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|e| CliError::Validation(format!("SHIFTLAB_THREADS=`{v}`: {e}")))?;
            if n == 0 {
                return Err(CliError::Validation("SHIFTLAB_THREADS must be >= 1".into()));
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
