use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::fractal::{EstimatorParams, DEFAULT_OVERLAP};
use crate::fractal::grid::MIN_GRID;
use crate::ratmap::RationalMap;
use crate::semigroup::RationalSemigroup;

/// Numerator and denominator coefficients, ascending powers, as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub num: Vec<[f64; 2]>,
    pub den: Vec<[f64; 2]>,
}

impl GeneratorSpec {
    pub fn from_real(num: &[f64], den: &[f64]) -> Self {
        GeneratorSpec {
            num: num.iter().map(|&x| [x, 0.0]).collect(),
            den: den.iter().map(|&x| [x, 0.0]).collect(),
        }
    }

    pub fn to_map(&self) -> Result<RationalMap, crate::MapError> {
        let c = |v: &[[f64; 2]]| v.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        RationalMap::from_complex(c(&self.num), c(&self.den))
    }
}

fn default_grid() -> usize {
    256
}

fn default_overlap() -> f64 {
    DEFAULT_OVERLAP
}

fn default_resolutions() -> Vec<usize> {
    vec![256, 512]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Name recorded in the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default = "default_overlap")]
    pub overlap: f64,
    #[serde(default)]
    pub estimator: EstimatorParams,
    /// Grid sizes for the component-count trace.
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; the rayon default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl JobConfig {
    pub fn new(generators: Vec<GeneratorSpec>) -> Self {
        JobConfig {
            scenario: None,
            generators,
            grid_n: default_grid(),
            overlap: default_overlap(),
            estimator: EstimatorParams::default(),
            resolutions: default_resolutions(),
            output_dir: default_output_dir(),
            workers: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every field and builds the semigroup.
    pub fn semigroup(&self) -> Result<RationalSemigroup, CliError> {
        if self.generators.is_empty() {
            return Err(CliError::Config("at least one generator required".into()));
        }
        if self.grid_n < MIN_GRID {
            return Err(CliError::Config(format!(
                "grid_n {} is below the minimum {MIN_GRID}",
                self.grid_n
            )));
        }
        if !(self.overlap > 0.0 && self.overlap <= 0.5) {
            return Err(CliError::Config(format!(
                "overlap {} must lie in (0, 0.5]",
                self.overlap
            )));
        }
        if self.resolutions.len() < 2 || self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(
                "resolutions must be strictly increasing with at least 2 entries".into(),
            ));
        }
        if let Some(&r) = self.resolutions.iter().find(|&&r| r < MIN_GRID) {
            return Err(CliError::Config(format!(
                "resolution {r} is below the minimum {MIN_GRID}"
            )));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be positive".into()));
        }
        self.estimator
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let maps = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| {
                g.to_map()
                    .map_err(|e| CliError::Config(format!("generator {i}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        RationalSemigroup::new(maps).map_err(|e| CliError::Config(e.to_string()))
    }
}
