//! Experiment configuration: a strict TOML schema (unknown keys rejected,
//! schema versioned) plus validation of every parameter against the model
//! bounds. Reproducibility hangs on configs being unambiguous.

use crate::error::Error;
use crate::mvsde::steps_for;
use crate::particles::{InteractionKernel, NoiseModel, SpdeEquation, SpdeModelSpec};
use crate::spectral::{PhiPolynomial, ScalarDim};
use crate::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Chaos,
    Galerkin,
    Stability,
    Audit,
    Simulate,
}

/// Model selection: the three spectral systems or the finite-dimensional
/// mean-field Ornstein-Uhlenbeck family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    #[serde(rename = "navier_stokes_2d")]
    NavierStokes2d {
        modes: usize,
        #[serde(default = "default_domain")]
        domain_size: f64,
        viscosity: f64,
        kernel: InteractionKernel,
        noise: NoiseModel,
        #[serde(default = "default_true")]
        nonlinear: bool,
        #[serde(default = "default_one")]
        initial_amplitude: f64,
        /// band-limit for the sampled initial data (None = all modes)
        #[serde(default)]
        initial_modes: Option<usize>,
    },
    CahnHilliard {
        modes: usize,
        #[serde(default = "default_domain")]
        domain_size: f64,
        phi: Vec<f64>,
        scalar_dim: ScalarDim,
        kernel: InteractionKernel,
        noise: NoiseModel,
        #[serde(default = "default_true")]
        nonlinear: bool,
        #[serde(default = "default_one")]
        initial_amplitude: f64,
    },
    KuramotoSivashinsky {
        modes: usize,
        #[serde(default = "default_domain")]
        domain_size: f64,
        phi: Vec<f64>,
        kernel: InteractionKernel,
        noise: NoiseModel,
        #[serde(default = "default_true")]
        nonlinear: bool,
        #[serde(default = "default_one")]
        initial_amplitude: f64,
    },
    MeanFieldOu {
        dim: usize,
        reversion: f64,
        coupling: f64,
        #[serde(default)]
        coupling_style: OuCouplingStyle,
        noise_sigma: f64,
        #[serde(default = "default_one")]
        initial: f64,
    },
}

/// How the OU drift couples to the empirical measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OuCouplingStyle {
    /// b = a x + beta mean(mu)
    Mean,
    /// b = a x + beta (mean(mu) - x): a drag toward the ensemble mean
    #[default]
    Drag,
}

fn default_domain() -> f64 {
    std::f64::consts::TAU
}

fn default_true() -> bool {
    true
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub save_stride: usize,
    pub master_seed: u64,
    /// Monte-Carlo replicas
    #[serde(default = "default_one_usize")]
    pub seeds: usize,
}

fn default_stride() -> usize {
    1
}

fn default_one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosSection {
    pub n_schedule: Vec<usize>,
    pub n_ref: usize,
    /// 0 = use min(N, n_ref) per cell
    #[serde(default)]
    pub subsample: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalerkinSection {
    pub mode_schedule: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_declared")]
    pub declared_constant: f64,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
}

fn default_samples() -> usize {
    500
}

fn default_declared() -> f64 {
    64.0
}

fn default_ensemble() -> usize {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_one_usize")]
    pub particles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    #[serde(default)]
    pub snapshots: bool,
}

/// Acceptance-band overrides; defaults pin the shipped tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// max/min band for sup moments across Galerkin levels
    #[serde(default = "default_moment_band")]
    pub galerkin_moment_band: f64,
    /// relative tolerance on the gap ratio 2 between eps and eps/2
    #[serde(default = "default_ratio_tol")]
    pub stability_ratio_tol: f64,
}

fn default_moment_band() -> f64 {
    1.25
}

fn default_ratio_tol() -> f64 {
    0.2
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            galerkin_moment_band: default_moment_band(),
            stability_ratio_tol: default_ratio_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub model: ModelConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub chaos: Option<ChaosSection>,
    #[serde(default)]
    pub galerkin: Option<GalerkinSection>,
    #[serde(default)]
    pub stability: Option<StabilitySection>,
    #[serde(default)]
    pub audit: Option<AuditSection>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialized config.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_toml().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        steps_for(self.run.t_end, self.run.dt)?;
        if self.run.seeds == 0 {
            return Err(Error::config("seeds must be at least 1"));
        }
        if let Some(spec) = self.spde_spec(0)? {
            spec.validate()?;
        }
        match self.kind {
            ExperimentKind::Chaos => {
                let section = self
                    .chaos
                    .as_ref()
                    .ok_or_else(|| Error::config("chaos experiments need a [chaos] section"))?;
                if section.n_schedule.is_empty()
                    || !section.n_schedule.windows(2).all(|w| w[1] > w[0])
                {
                    return Err(Error::config("n_schedule must be strictly increasing"));
                }
                let max_n = *section.n_schedule.last().unwrap();
                if section.n_ref < max_n {
                    return Err(Error::config("n_ref must be at least max(n_schedule)"));
                }
                if section.subsample > max_n {
                    return Err(Error::config("subsample exceeds the largest system size"));
                }
            }
            ExperimentKind::Galerkin => {
                let section = self.galerkin.as_ref().ok_or_else(|| {
                    Error::config("galerkin experiments need a [galerkin] section")
                })?;
                if section.mode_schedule.len() < 2
                    || !section.mode_schedule.windows(2).all(|w| w[1] > w[0])
                {
                    return Err(Error::config(
                        "mode_schedule must be strictly increasing with >= 2 levels",
                    ));
                }
            }
            ExperimentKind::Stability => {
                let section = self.stability.as_ref().ok_or_else(|| {
                    Error::config("stability experiments need a [stability] section")
                })?;
                if section.epsilons.is_empty() || section.epsilons.iter().any(|e| !(*e > 0.0)) {
                    return Err(Error::config("epsilons must be positive"));
                }
            }
            ExperimentKind::Audit => {
                let section = self
                    .audit
                    .as_ref()
                    .ok_or_else(|| Error::config("audit experiments need an [audit] section"))?;
                if section.samples == 0 {
                    return Err(Error::config("audit sample count must be positive"));
                }
            }
            ExperimentKind::Simulate => {}
        }
        Ok(())
    }

    /// The SPDE spec for spectral models (noise seeded for one cell), or
    /// None for the finite-dimensional family.
    pub fn spde_spec(&self, noise_seed: u64) -> Result<Option<SpdeModelSpec>> {
        let spec = match &self.model {
            ModelConfig::NavierStokes2d {
                modes,
                domain_size,
                viscosity,
                kernel,
                noise,
                nonlinear,
                ..
            } => Some(SpdeModelSpec {
                equation: SpdeEquation::NavierStokes2d {
                    viscosity: *viscosity,
                },
                modes: *modes,
                domain_size: *domain_size,
                kernel: *kernel,
                noise: NoiseModel {
                    master_seed: noise_seed,
                    ..*noise
                },
                include_nonlinear: *nonlinear,
            }),
            ModelConfig::CahnHilliard {
                modes,
                domain_size,
                phi,
                scalar_dim,
                kernel,
                noise,
                nonlinear,
                ..
            } => Some(SpdeModelSpec {
                equation: SpdeEquation::CahnHilliard {
                    phi: PhiPolynomial::new(phi.clone()),
                    dim: *scalar_dim,
                },
                modes: *modes,
                domain_size: *domain_size,
                kernel: *kernel,
                noise: NoiseModel {
                    master_seed: noise_seed,
                    ..*noise
                },
                include_nonlinear: *nonlinear,
            }),
            ModelConfig::KuramotoSivashinsky {
                modes,
                domain_size,
                phi,
                kernel,
                noise,
                nonlinear,
                ..
            } => Some(SpdeModelSpec {
                equation: SpdeEquation::KuramotoSivashinsky {
                    phi: PhiPolynomial::new(phi.clone()),
                },
                modes: *modes,
                domain_size: *domain_size,
                kernel: *kernel,
                noise: NoiseModel {
                    master_seed: noise_seed,
                    ..*noise
                },
                include_nonlinear: *nonlinear,
            }),
            ModelConfig::MeanFieldOu { .. } => None,
        };
        Ok(spec)
    }

    pub fn initial_amplitude(&self) -> f64 {
        match &self.model {
            ModelConfig::NavierStokes2d {
                initial_amplitude, ..
            }
            | ModelConfig::CahnHilliard {
                initial_amplitude, ..
            }
            | ModelConfig::KuramotoSivashinsky {
                initial_amplitude, ..
            } => *initial_amplitude,
            ModelConfig::MeanFieldOu { initial, .. } => *initial,
        }
    }

    /// Requested band limit for sampled initial data, if any.
    pub fn initial_modes(&self) -> Option<usize> {
        match &self.model {
            ModelConfig::NavierStokes2d { initial_modes, .. } => *initial_modes,
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const NSE_TOML: &str = r#"
schema_version = 1
kind = "chaos"

[model]
system = "navier_stokes_2d"
modes = 8
viscosity = 1.0
kernel = { kind = "stokes_drag" }
noise = { base_amplitude = 0.5, multiplicative = 0.2 }

[run]
t_end = 0.1
dt = 0.01
master_seed = 42
seeds = 2

[chaos]
n_schedule = [2, 4]
n_ref = 8

[output]
dir = "out"
"#;

    #[test]
    fn parses_and_validates_nse_config() {
        let cfg = ExperimentConfig::from_toml(NSE_TOML).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Chaos);
        let spec = cfg.spde_spec(7).unwrap().unwrap();
        assert_eq!(spec.noise.master_seed, 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = NSE_TOML.replace("[output]", "mystery_key = 3\n[output]");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let bad = NSE_TOML.replace("schema_version = 1", "schema_version = 9");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn non_increasing_schedule_is_rejected() {
        let bad = NSE_TOML.replace("n_schedule = [2, 4]", "n_schedule = [4, 4]");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn dt_must_tile_the_horizon() {
        let bad = NSE_TOML.replace("dt = 0.01", "dt = 0.003");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::from_toml(NSE_TOML).unwrap();
        let b = ExperimentConfig::from_toml(NSE_TOML).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c =
            ExperimentConfig::from_toml(&NSE_TOML.replace("master_seed = 42", "master_seed = 43"))
                .unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn ou_config_parses() {
        let toml = r#"
schema_version = 1
kind = "chaos"

[model]
system = "mean_field_ou"
dim = 1
reversion = -1.0
coupling = 0.5
noise_sigma = 1.0

[run]
t_end = 1.0
dt = 0.001
master_seed = 1
seeds = 3

[chaos]
n_schedule = [4, 8]
n_ref = 16

[output]
dir = "out"
"#;
        let cfg = ExperimentConfig::from_toml(toml).unwrap();
        assert!(cfg.spde_spec(0).unwrap().is_none());
    }
}
