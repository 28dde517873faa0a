//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use graphsurf::{BaseKind, BaseManifold, DerivativeScheme, EstimatorSpec, FamilySpec, HeightField, Mode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub base: BaseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_field: Option<HeightFieldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Seeds the estimator searches and the family draws.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    pub kind: BaseKind,
    /// Points per axis; `[n_theta, n_phi]` on the sphere.
    pub grid_shape: Vec<usize>,
    /// Torus side lengths, `2 pi` each when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<f64>>,
    #[serde(default = "unit")]
    pub radius: f64,
    #[serde(default)]
    pub scheme: DerivativeScheme,
}

fn unit() -> f64 {
    1.0
}

fn unit_frequency() -> i32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HeightFieldConfig {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude * sin(frequency * 2 pi x_axis / L_axis)`; torus only.
    Sine {
        amplitude: f64,
        #[serde(default)]
        axis: usize,
        #[serde(default = "unit_frequency")]
        frequency: i32,
    },
    Modes {
        modes: Vec<Mode>,
        coeffs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub deltas: Vec<f64>,
    pub samples: usize,
    #[serde(default = "default_band_limit")]
    pub band_limit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

fn default_band_limit() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Adds a `wall_time_ms` column to the constants table. Off by default
    /// because it makes reruns differ.
    #[serde(default)]
    pub timings: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            timings: false,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Height field on `base`; zero when the section is absent.
    pub fn height_field(&self, base: &BaseManifold<f64>) -> Result<HeightField<f64>, CliError> {
        match &self.height_field {
            None => Ok(HeightField::zero(base)),
            Some(h) => h.build(base),
        }
    }

    pub fn family_spec(&self, base: &BaseManifold<f64>) -> Result<(FamilySpec<f64>, Vec<f64>), CliError> {
        let f = self
            .family
            .as_ref()
            .ok_or_else(|| CliError::Config("family: section required for sweep".into()))?;
        if f.deltas.is_empty() {
            return Err(CliError::Config("family.deltas: empty".into()));
        }
        let spec = FamilySpec {
            base: base.clone(),
            delta: 0.0,
            alpha: f.alpha,
            band_limit: f.band_limit,
            samples: f.samples,
            seed: self.seed,
        };
        for &d in &f.deltas {
            spec.with_delta(d)
                .validate()
                .map_err(|e| CliError::Config(format!("family: {e}")))?;
        }
        Ok((spec, f.deltas.clone()))
    }
}

impl BaseConfig {
    pub fn build(&self) -> Result<BaseManifold<f64>, CliError> {
        let bad = |e: graphsurf::GraphError| CliError::Config(format!("base: {e}"));
        let base = match self.kind {
            BaseKind::FlatTorus => match &self.periods {
                Some(p) => BaseManifold::flat_torus_with_periods(p, &self.grid_shape),
                None => BaseManifold::flat_torus(&self.grid_shape),
            }
            .and_then(|b| b.with_scheme(self.scheme)),
            BaseKind::Sphere => {
                if self.grid_shape.len() != 2 {
                    return Err(CliError::Config(format!(
                        "base.grid_shape: sphere needs [n_theta, n_phi], got {:?}",
                        self.grid_shape
                    )));
                }
                BaseManifold::sphere(self.radius, self.grid_shape[0], self.grid_shape[1])
            }
        };
        base.map_err(bad)
    }

    /// Same base with every axis `factor` times finer.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            grid_shape: self.grid_shape.iter().map(|&n| n * factor).collect(),
            ..self.clone()
        }
    }

    pub fn grid_label(&self) -> String {
        self.grid_shape.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x")
    }
}

impl HeightFieldConfig {
    pub fn build(&self, base: &BaseManifold<f64>) -> Result<HeightField<f64>, CliError> {
        let bad = |e: graphsurf::GraphError| CliError::Config(format!("height_field: {e}"));
        match self {
            HeightFieldConfig::Zero => Ok(HeightField::zero(base)),
            HeightFieldConfig::Constant { value } => Ok(HeightField::constant(base, *value)),
            HeightFieldConfig::Sine {
                amplitude,
                axis,
                frequency,
            } => {
                if base.kind() != BaseKind::FlatTorus {
                    return Err(CliError::Config("height_field.kind: sine needs a flat_torus base".into()));
                }
                if *axis >= base.dim() {
                    return Err(CliError::Config(format!(
                        "height_field.axis: {axis} out of range for dimension {}",
                        base.dim()
                    )));
                }
                let w = std::f64::consts::TAU * *frequency as f64 / base.periods()[*axis];
                HeightField::from_fn(base, |x| amplitude * (w * x[*axis]).sin()).map_err(bad)
            }
            HeightFieldConfig::Modes { modes, coeffs } => {
                HeightField::from_coeffs(base, modes.clone(), coeffs.clone()).map_err(bad)
            }
        }
    }
}

/// Configuration printed by `--print-default-config`.
pub fn default_config() -> Config {
    Config {
        base: BaseConfig {
            kind: BaseKind::FlatTorus,
            grid_shape: vec![32, 32],
            periods: None,
            radius: 1.0,
            scheme: DerivativeScheme::Spectral,
        },
        height_field: Some(HeightFieldConfig::Sine {
            amplitude: 0.1,
            axis: 0,
            frequency: 1,
        }),
        family: Some(FamilyConfig {
            deltas: vec![0.02, 0.05, 0.1],
            samples: 50,
            band_limit: 8,
            alpha: None,
        }),
        estimators: default_estimators(),
        output: OutputConfig::default(),
        seed: 0,
    }
}

/// Sobolev p=1, Poincare p=2, GN (1,2,2,2,3/4), CZ for B and for functions.
pub fn default_estimators() -> Vec<EstimatorSpec> {
    vec![
        EstimatorSpec::Sobolev {
            p: 1.0,
            trials: 32,
            ascent_steps: 50,
            band: 8,
        },
        EstimatorSpec::Poincare {
            p: 2.0,
            trials: 32,
            ascent_steps: 50,
            band: 8,
        },
        EstimatorSpec::Gn {
            j: 1,
            m: 2,
            r: 2.0,
            q: 2.0,
            theta: 0.75,
            trials: 32,
            ascent_steps: 50,
            band: 8,
        },
        EstimatorSpec::CzB { p: 2.0 },
        EstimatorSpec::CzFn {
            p: 2.0,
            trials: 32,
            ascent_steps: 50,
            band: 8,
        },
    ]
}
