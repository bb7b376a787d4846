//! Numeric auditors for the structural conditions behind the models:
//! coercivity, growth and local monotonicity of the drift/diffusion pair,
//! and the linear-growth bound on the interaction kernel.
//!
//! An audit evaluates its inequality on seeded random samples (fields with
//! power-law spectra at several decay rates, scaled up to x100 to probe
//! superlinear violations) and reports the worst signed margin at the
//! declared constant together with the smallest constant that would cover
//! every sample. A pass is sampled evidence, not a certification: the
//! inequalities quantify over an infinite-dimensional space.

use crate::error::Error;
use crate::measures::wasserstein2_states;
use crate::particles::{
    mean_field_drift_with_mean, ParticleEnsemble, SpdeEquation, SpdeModelSpec,
};
use crate::rng::CounterStream;
use crate::spectral::{bilinear, ScalarOp, ScalarSpectralField, SpectralVelocityField};
use crate::Result;
use serde::Serialize;

/// Disclaimer attached to every report.
pub const EVIDENCE_NOTE: &str =
    "sampled evidence at the listed sample count; a pass is not a certification";

/// Outcome of one audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    /// condition identifier, e.g. "coercivity"
    pub condition: String,
    pub samples: usize,
    /// the constant the inequality was checked against
    pub declared_constant: f64,
    /// min over samples of (RHS - LHS); positive = satisfied with slack
    pub worst_margin: f64,
    /// max over samples of the constant each sample requires
    pub fitted_constant: f64,
    pub violated: bool,
    /// descriptor of the worst sample when violated
    pub offender: Option<String>,
    pub note: &'static str,
}

impl AuditReport {
    fn from_samples(condition: &str, declared_constant: f64, rows: &[SampleRow]) -> AuditReport {
        let mut worst_margin = f64::INFINITY;
        let mut fitted = 0.0f64;
        let mut offender = None;
        for row in rows {
            let margin = row.rhs_at(declared_constant) - row.lhs;
            if margin < worst_margin {
                worst_margin = margin;
                if margin < 0.0 {
                    offender = Some(row.label.clone());
                }
            }
            fitted = fitted.max(row.required_constant());
        }
        AuditReport {
            condition: condition.to_string(),
            samples: rows.len(),
            declared_constant,
            worst_margin,
            fitted_constant: fitted,
            violated: worst_margin < 0.0,
            offender,
            note: EVIDENCE_NOTE,
        }
    }
}

/// One evaluated sample of an inequality LHS <= fixed + C * scaling.
struct SampleRow {
    label: String,
    lhs: f64,
    /// constant-independent part of the right-hand side
    fixed: f64,
    /// multiplier of the constant
    scaling: f64,
}

impl SampleRow {
    fn rhs_at(&self, c: f64) -> f64 {
        self.fixed + c * self.scaling
    }

    fn required_constant(&self) -> f64 {
        ((self.lhs - self.fixed) / self.scaling).max(0.0)
    }
}

/// Audit parameters: sample count, sampler seed, the declared constants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditConfig {
    pub samples: usize,
    pub seed: u64,
    pub declared_constant: f64,
    /// atoms per sampled empirical measure
    pub ensemble_size: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            samples: 500,
            seed: 17,
            declared_constant: 64.0,
            ensemble_size: 8,
        }
    }
}

const DECAYS: [f64; 2] = [1.5, 3.0];
const SCALES: [f64; 3] = [1.0, 10.0, 100.0];

fn sample_velocity(
    spec: &SpdeModelSpec,
    stream: &CounterStream,
    index: u64,
) -> SpectralVelocityField {
    let decay = DECAYS[(index / 3) as usize % DECAYS.len()];
    let scale = SCALES[index as usize % SCALES.len()];
    SpectralVelocityField::random(
        spec.modes,
        spec.domain_size,
        decay,
        scale,
        &stream.substream(index),
    )
}

fn sample_velocity_ensemble(
    spec: &SpdeModelSpec,
    stream: &CounterStream,
    index: u64,
    count: usize,
) -> ParticleEnsemble<SpectralVelocityField> {
    let atoms: Vec<SpectralVelocityField> = (0..count as u64)
        .map(|j| sample_velocity(spec, &stream.substream(1_000_000 + index), j * 7 + index))
        .collect();
    ParticleEnsemble::new(atoms).unwrap()
}

fn sample_scalar(
    spec: &SpdeModelSpec,
    dim: crate::spectral::ScalarDim,
    stream: &CounterStream,
    index: u64,
) -> ScalarSpectralField {
    let decay = DECAYS[(index / 3) as usize % DECAYS.len()];
    let scale = SCALES[index as usize % SCALES.len()];
    ScalarSpectralField::random(
        spec.modes,
        dim,
        spec.domain_size,
        decay,
        scale,
        &stream.substream(index),
    )
}

fn sample_label(index: u64) -> String {
    let decay = DECAYS[(index / 3) as usize % DECAYS.len()];
    let scale = SCALES[index as usize % SCALES.len()];
    format!("sample {index} (spectrum decay {decay}, amplitude x{scale})")
}

/// The full drift A(u, mu) of the fluid system against the sampled
/// empirical mean: nu * Stokes(u) - B(u) + kernel mean-field term.
fn nse_drift(
    spec: &SpdeModelSpec,
    u: &SpectralVelocityField,
    mean: &SpectralVelocityField,
) -> Result<SpectralVelocityField> {
    let viscosity = match spec.equation {
        SpdeEquation::NavierStokes2d { viscosity } => viscosity,
        _ => return Err(Error::config("fluid drift requested for a scalar model")),
    };
    let mut drift = u.stokes_apply();
    drift.scale_mut(viscosity);
    if spec.include_nonlinear {
        let b = bilinear(u, u)?;
        drift.axpy(-1.0, &b);
    }
    let k = mean_field_drift_with_mean(u, mean, &spec.kernel, 0.0);
    drift.axpy(1.0, &k);
    Ok(drift)
}

/// Scalar drift -Lap^2 u + Lap phi(u) [- u u_x] + kernel term.
fn scalar_drift(
    spec: &SpdeModelSpec,
    u: &ScalarSpectralField,
    mean: &ScalarSpectralField,
) -> Result<ScalarSpectralField> {
    let (phi, advect) = match &spec.equation {
        SpdeEquation::CahnHilliard { phi, .. } => (phi, false),
        SpdeEquation::KuramotoSivashinsky { phi } => (phi, true),
        _ => return Err(Error::config("scalar drift requested for the fluid model")),
    };
    let mut drift = u.apply_op(ScalarOp::Bilaplacian)?;
    drift.scale_mut(-1.0);
    if spec.include_nonlinear {
        let lap_phi = u.nonlinearity_phi(phi)?.apply_op(ScalarOp::Laplacian)?;
        drift.axpy(1.0, &lap_phi);
        if advect {
            let adv = u.self_advection_1d()?;
            drift.axpy(-1.0, &adv);
        }
    }
    let k = mean_field_drift_with_mean(u, mean, &spec.kernel, 0.0);
    drift.axpy(1.0, &k);
    Ok(drift)
}

fn sigma_hs_sq_velocity(spec: &SpdeModelSpec, own_norm: f64, stat: f64) -> f64 {
    let amp = spec.noise.amplitude(own_norm, stat);
    amp * amp * spec.noise.hs_norm_sq_velocity(spec.modes, spec.domain_size)
}

fn sigma_hs_sq_scalar(
    spec: &SpdeModelSpec,
    dim: crate::spectral::ScalarDim,
    own_norm: f64,
    stat: f64,
) -> f64 {
    let amp = spec.noise.amplitude(own_norm, stat);
    amp * amp * spec.noise.hs_norm_sq_scalar(spec.modes, dim, spec.domain_size)
}

/// Coercivity: 2 <A(u, mu), u> + ||sigma(u, mu)||^2 <= -N1(u) + C (1 +
/// ||u||^2 + mu(||.||^2)), with N1 the squared dissipation norm of the
/// equation (||.||_1^2 for the fluid system, ||.||_2^2 fourth order).
pub fn audit_coercivity(spec: &SpdeModelSpec, cfg: &AuditConfig) -> Result<AuditReport> {
    spec.validate()?;
    let stream = CounterStream::new(cfg.seed, 0xc0e5);
    let mut rows = Vec::with_capacity(cfg.samples);
    match spec.equation.scalar_dim() {
        None => {
            for i in 0..cfg.samples as u64 {
                let u = sample_velocity(spec, &stream, i);
                let ensemble = sample_velocity_ensemble(spec, &stream, i, cfg.ensemble_size);
                let mean = ensemble.mean_state();
                let norms: Vec<f64> = ensemble
                    .states()
                    .iter()
                    .map(|s| s.l2_norm_sq().sqrt())
                    .collect();
                let stat = spec.noise.ensemble_statistic(&norms);
                let drift = nse_drift(spec, &u, &mean)?;
                let own = u.l2_norm_sq().sqrt();
                let lhs =
                    2.0 * drift.inner_product(&u, 0)? + sigma_hs_sq_velocity(spec, own, stat);
                let n1 = u.norm_sq(1);
                let mu2 = ensemble.mean_l2_norm_sq();
                rows.push(SampleRow {
                    label: sample_label(i),
                    lhs,
                    fixed: -n1,
                    scaling: 1.0 + u.l2_norm_sq() + mu2,
                });
            }
        }
        Some(dim) => {
            for i in 0..cfg.samples as u64 {
                let u = sample_scalar(spec, dim, &stream, i);
                let atoms: Vec<ScalarSpectralField> = (0..cfg.ensemble_size as u64)
                    .map(|j| sample_scalar(spec, dim, &stream.substream(1_000_000 + i), j * 7 + i))
                    .collect();
                let ensemble = ParticleEnsemble::new(atoms).unwrap();
                let mean = ensemble.mean_state();
                let norms: Vec<f64> = ensemble
                    .states()
                    .iter()
                    .map(|s| s.l2_norm_sq().sqrt())
                    .collect();
                let stat = spec.noise.ensemble_statistic(&norms);
                let drift = scalar_drift(spec, &u, &mean)?;
                let own = u.l2_norm_sq().sqrt();
                let lhs =
                    2.0 * drift.inner_product(&u, 0)? + sigma_hs_sq_scalar(spec, dim, own, stat);
                let n1 = u.norm_sq(2);
                let mu2 = ensemble.mean_l2_norm_sq();
                rows.push(SampleRow {
                    label: sample_label(i),
                    lhs,
                    fixed: -n1,
                    scaling: 1.0 + u.l2_norm_sq() + mu2,
                });
            }
        }
    }
    Ok(AuditReport::from_samples(
        "coercivity",
        cfg.declared_constant,
        &rows,
    ))
}

/// Growth of the diffusion: ||sigma(u, mu)||^2 <= C (1 + ||u||^2 +
/// mu(||.||^2)).
pub fn audit_sigma_growth(spec: &SpdeModelSpec, cfg: &AuditConfig) -> Result<AuditReport> {
    spec.validate()?;
    let stream = CounterStream::new(cfg.seed, 0x519a);
    let mut rows = Vec::with_capacity(cfg.samples);
    let dim = spec.equation.scalar_dim();
    for i in 0..cfg.samples as u64 {
        let (own_sq, mu2, stat) = match dim {
            None => {
                let u = sample_velocity(spec, &stream, i);
                let ensemble = sample_velocity_ensemble(spec, &stream, i, cfg.ensemble_size);
                let norms: Vec<f64> = ensemble
                    .states()
                    .iter()
                    .map(|s| s.l2_norm_sq().sqrt())
                    .collect();
                (
                    u.l2_norm_sq(),
                    ensemble.mean_l2_norm_sq(),
                    spec.noise.ensemble_statistic(&norms),
                )
            }
            Some(d) => {
                let u = sample_scalar(spec, d, &stream, i);
                let atoms: Vec<ScalarSpectralField> = (0..cfg.ensemble_size as u64)
                    .map(|j| sample_scalar(spec, d, &stream.substream(1_000_000 + i), j * 7 + i))
                    .collect();
                let ensemble = ParticleEnsemble::new(atoms).unwrap();
                let norms: Vec<f64> = ensemble
                    .states()
                    .iter()
                    .map(|s| s.l2_norm_sq().sqrt())
                    .collect();
                (
                    u.l2_norm_sq(),
                    ensemble.mean_l2_norm_sq(),
                    spec.noise.ensemble_statistic(&norms),
                )
            }
        };
        let hs = match dim {
            None => sigma_hs_sq_velocity(spec, own_sq.sqrt(), stat),
            Some(d) => sigma_hs_sq_scalar(spec, d, own_sq.sqrt(), stat),
        };
        rows.push(SampleRow {
            label: sample_label(i),
            lhs: hs,
            fixed: 0.0,
            scaling: 1.0 + own_sq + mu2,
        });
    }
    Ok(AuditReport::from_samples(
        "sigma_growth",
        cfg.declared_constant,
        &rows,
    ))
}

/// Growth of the drift in the dual dissipation norm:
/// ||A(u, mu)||_{-r}^2 <= C (1 + N1(u) + mu(||.||^2)) (1 + ||u||^beta +
/// mu(||.||^2)), r = 1 and beta = 2 for the fluid system, r = 2 and
/// beta = 2p - 2 fourth order.
pub fn audit_drift_growth(spec: &SpdeModelSpec, cfg: &AuditConfig) -> Result<AuditReport> {
    spec.validate()?;
    let stream = CounterStream::new(cfg.seed, 0xd61f);
    let mut rows = Vec::with_capacity(cfg.samples);
    match spec.equation.scalar_dim() {
        None => {
            for i in 0..cfg.samples as u64 {
                let u = sample_velocity(spec, &stream, i);
                let ensemble = sample_velocity_ensemble(spec, &stream, i, cfg.ensemble_size);
                let mean = ensemble.mean_state();
                let drift = nse_drift(spec, &u, &mean)?;
                let mu2 = ensemble.mean_l2_norm_sq();
                let n1 = u.norm_sq(1);
                rows.push(SampleRow {
                    label: sample_label(i),
                    lhs: drift.norm_sq(-1),
                    fixed: 0.0,
                    scaling: (1.0 + n1 + mu2) * (1.0 + u.l2_norm_sq() + mu2),
                });
            }
        }
        Some(dim) => {
            let beta = match &spec.equation {
                SpdeEquation::CahnHilliard { phi, .. }
                | SpdeEquation::KuramotoSivashinsky { phi } => {
                    2.0 * phi.degree().max(1) as f64 - 2.0
                }
                _ => unreachable!(),
            };
            for i in 0..cfg.samples as u64 {
                let u = sample_scalar(spec, dim, &stream, i);
                let atoms: Vec<ScalarSpectralField> = (0..cfg.ensemble_size as u64)
                    .map(|j| sample_scalar(spec, dim, &stream.substream(1_000_000 + i), j * 7 + i))
                    .collect();
                let ensemble = ParticleEnsemble::new(atoms).unwrap();
                let mean = ensemble.mean_state();
                let drift = scalar_drift(spec, &u, &mean)?;
                let mu2 = ensemble.mean_l2_norm_sq();
                let n1 = u.norm_sq(2);
                rows.push(SampleRow {
                    label: sample_label(i),
                    lhs: drift.norm_sq(-2),
                    fixed: 0.0,
                    scaling: (1.0 + n1 + mu2) * (1.0 + u.l2_norm_sq().sqrt().powf(beta) + mu2),
                });
            }
        }
    }
    Ok(AuditReport::from_samples(
        "drift_growth",
        cfg.declared_constant,
        &rows,
    ))
}

/// Linear growth of the pairwise kernel: ||K(t, u, v)|| <= C (1 + ||u|| +
/// ||v||), checked against the kernel's declared constant.
pub fn audit_kernel_growth(spec: &SpdeModelSpec, cfg: &AuditConfig) -> Result<AuditReport> {
    spec.validate()?;
    let stream = CounterStream::new(cfg.seed, 0x6b65);
    let mut rows = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples as u64 {
        let u = sample_velocity(spec, &stream, 2 * i);
        let v = sample_velocity(spec, &stream, 2 * i + 1);
        let k = spec.kernel.eval(0.0, &u, &v);
        rows.push(SampleRow {
            label: sample_label(i),
            lhs: k.l2_norm_sq().sqrt(),
            fixed: 0.0,
            scaling: 1.0 + u.l2_norm_sq().sqrt() + v.l2_norm_sq().sqrt(),
        });
    }
    let declared = spec.kernel.lipschitz.max(f64::MIN_POSITIVE);
    Ok(AuditReport::from_samples("kernel_growth", declared, &rows))
}

/// Local monotonicity of the fluid drift/diffusion pair:
/// 2 <A(u,mu) - A(v,nu), u - v> + ||sigma(u,mu) - sigma(v,nu)||^2
///   <= (C + rho(u) + eta(v) + C mu_2 + C nu_2) ||u-v||^2
///      + C (1 + mu_2 + nu_2) W2(mu, nu)^2,
/// with rho(u) = ||u||_1^2 + ||u||^2 and eta(v) = ||v||^2.
pub fn audit_local_monotonicity(spec: &SpdeModelSpec, cfg: &AuditConfig) -> Result<AuditReport> {
    spec.validate()?;
    if spec.equation.scalar_dim().is_some() {
        return Err(Error::UnsupportedOp(
            "the local-monotonicity audit is wired for the fluid system".to_string(),
        ));
    }
    let stream = CounterStream::new(cfg.seed, 0x10c0);
    let mut rows = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples as u64 {
        let u = sample_velocity(spec, &stream, 2 * i);
        let v = sample_velocity(spec, &stream, 2 * i + 1);
        let mu = sample_velocity_ensemble(spec, &stream, 2 * i, cfg.ensemble_size);
        let nu = sample_velocity_ensemble(spec, &stream, 2 * i + 1, cfg.ensemble_size);
        let drift_u = nse_drift(spec, &u, &mu.mean_state())?;
        let drift_v = nse_drift(spec, &v, &nu.mean_state())?;
        let mut diff_drift = drift_u.clone();
        diff_drift.axpy(-1.0, &drift_v);
        let mut w = u.clone();
        w.axpy(-1.0, &v);

        let mu_norms: Vec<f64> = mu.states().iter().map(|s| s.l2_norm_sq().sqrt()).collect();
        let nu_norms: Vec<f64> = nu.states().iter().map(|s| s.l2_norm_sq().sqrt()).collect();
        let amp_u = spec
            .noise
            .amplitude(u.l2_norm_sq().sqrt(), spec.noise.ensemble_statistic(&mu_norms));
        let amp_v = spec
            .noise
            .amplitude(v.l2_norm_sq().sqrt(), spec.noise.ensemble_statistic(&nu_norms));
        let hs_unit = spec.noise.hs_norm_sq_velocity(spec.modes, spec.domain_size);
        let sigma_diff_sq = (amp_u - amp_v) * (amp_u - amp_v) * hs_unit;

        let lhs = 2.0 * diff_drift.inner_product(&w, 0)? + sigma_diff_sq;
        let rho = u.norm_sq(1) + u.l2_norm_sq();
        let eta = v.l2_norm_sq();
        let d2 = w.l2_norm_sq();
        let mu2 = mu.mean_l2_norm_sq();
        let nu2 = nu.mean_l2_norm_sq();
        let w2 = wasserstein2_states(&mu, &nu)?;
        rows.push(SampleRow {
            label: sample_label(i),
            lhs,
            fixed: (rho + eta) * d2,
            scaling: (1.0 + mu2 + nu2) * (d2 + w2 * w2),
        });
    }
    Ok(AuditReport::from_samples(
        "local_monotonicity",
        cfg.declared_constant,
        &rows,
    ))
}

/// All audits applicable to a model spec, in a stable order.
pub fn run_all_audits(spec: &SpdeModelSpec, cfg: &AuditConfig) -> Result<Vec<AuditReport>> {
    let mut reports = vec![
        audit_coercivity(spec, cfg)?,
        audit_sigma_growth(spec, cfg)?,
        audit_drift_growth(spec, cfg)?,
        audit_kernel_growth(spec, cfg)?,
    ];
    if spec.equation.scalar_dim().is_none() {
        reports.push(audit_local_monotonicity(spec, cfg)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::{InteractionKernel, NoiseGrowth, NoiseModel};
    use crate::spectral::{PhiPolynomial, ScalarDim};
    use std::f64::consts::TAU;

    fn nse_spec() -> SpdeModelSpec {
        SpdeModelSpec {
            equation: SpdeEquation::NavierStokes2d { viscosity: 1.0 },
            modes: 8,
            domain_size: TAU,
            kernel: InteractionKernel::stokes_drag(),
            noise: NoiseModel {
                retained_modes: 0,
                base_amplitude: 0.5,
                multiplicative: 0.2,
                clip: 10.0,
                include_mean_mode: false,
                growth: NoiseGrowth::ClippedLinear,
                master_seed: 3,
            },
            include_nonlinear: true,
        }
    }

    fn small_cfg() -> AuditConfig {
        AuditConfig {
            samples: 60,
            seed: 5,
            declared_constant: 64.0,
            ensemble_size: 6,
        }
    }

    #[test]
    fn stokes_only_model_has_zero_fitted_coercivity_constant() {
        // A = Stokes, sigma = 0, K = 0: 2 <Au, u> = -2 ||u||_1^2, so the
        // margin at C = 0 is exactly ||u||_1^2
        let mut spec = nse_spec();
        spec.kernel = InteractionKernel::zero();
        spec.noise = NoiseModel::silent(1);
        spec.include_nonlinear = false;
        let mut cfg = small_cfg();
        cfg.declared_constant = 0.0;
        let report = audit_coercivity(&spec, &cfg).unwrap();
        assert!(!report.violated, "margin {}", report.worst_margin);
        assert_eq!(report.fitted_constant, 0.0);
        assert!(report.worst_margin >= 0.0);
    }

    #[test]
    fn shipped_nse_model_passes_all_audits() {
        let spec = nse_spec();
        let cfg = small_cfg();
        for report in run_all_audits(&spec, &cfg).unwrap() {
            assert!(
                !report.violated,
                "{} violated: margin {}, fitted {}",
                report.condition, report.worst_margin, report.fitted_constant
            );
            assert!(report.fitted_constant.is_finite());
        }
    }

    #[test]
    fn bilinear_term_contributes_nothing_to_coercivity() {
        // fitted constants with and without B agree to rounding since
        // <B(u), u> = 0
        let mut with_b = nse_spec();
        with_b.kernel = InteractionKernel::zero();
        with_b.noise = NoiseModel::silent(1);
        let mut without_b = with_b.clone();
        without_b.include_nonlinear = false;
        let cfg = small_cfg();
        let a = audit_coercivity(&with_b, &cfg).unwrap();
        let b = audit_coercivity(&without_b, &cfg).unwrap();
        assert!(
            (a.fitted_constant - b.fitted_constant).abs() <= 1e-6 * (1.0 + b.fitted_constant),
            "{} vs {}",
            a.fitted_constant,
            b.fitted_constant
        );
    }

    #[test]
    fn broken_sigma_fails_coercivity_on_large_samples() {
        let mut spec = nse_spec();
        spec.noise.growth = NoiseGrowth::BrokenQuadratic;
        let report = audit_coercivity(&spec, &small_cfg()).unwrap();
        assert!(report.violated);
        let offender = report.offender.unwrap();
        assert!(
            offender.contains("x100") || offender.contains("x10"),
            "violation should surface on scaled samples, got {offender}"
        );
    }

    #[test]
    fn drag_kernel_passes_growth_with_unit_constant() {
        let spec = nse_spec();
        let report = audit_kernel_growth(&spec, &small_cfg()).unwrap();
        assert!(!report.violated);
        assert!(report.fitted_constant <= 1.0 + 1e-12);
    }

    #[test]
    fn bilinear_dual_norm_constant_is_finite() {
        // ||B(u)||_{-1} <= C ||u|| ||u||_1 sampled over random fields
        let spec = nse_spec();
        let stream = CounterStream::new(9, 0);
        let mut fitted = 0.0f64;
        for i in 0..100u64 {
            let u = sample_velocity(&spec, &stream, i);
            let b = bilinear(&u, &u).unwrap();
            let ratio = b.norm_sq(-1) / (u.l2_norm_sq() * u.norm_sq(1));
            fitted = fitted.max(ratio);
        }
        assert!(fitted.is_finite() && fitted > 0.0);
        // the constant is O(1) on the torus
        assert!(fitted < 10.0, "fitted {fitted}");
    }

    #[test]
    fn monotonicity_holds_with_finite_constant_and_matches_identity_route() {
        let spec = nse_spec();
        let report = audit_local_monotonicity(&spec, &small_cfg()).unwrap();
        assert!(
            !report.violated,
            "margin {} fitted {}",
            report.worst_margin, report.fitted_constant
        );

        // per-sample analytic route: <B(u) - B(v), u - v> = -<B(u - v), v>
        let stream = CounterStream::new(31, 0);
        for i in 0..20u64 {
            let u = sample_velocity(&spec, &stream, 2 * i);
            let v = sample_velocity(&spec, &stream, 2 * i + 1);
            let mut w = u.clone();
            w.axpy(-1.0, &v);
            let bu = bilinear(&u, &u).unwrap();
            let bv = bilinear(&v, &v).unwrap();
            let mut diff = bu.clone();
            diff.axpy(-1.0, &bv);
            let direct = diff.inner_product(&w, 0).unwrap();
            let via_identity = -bilinear(&w, &w).unwrap().inner_product(&v, 0).unwrap();
            let scale = direct.abs().max(via_identity.abs()).max(1e-300);
            assert!(
                (direct - via_identity).abs() / scale <= 1e-9,
                "sample {i}: {direct} vs {via_identity}"
            );
        }
    }

    #[test]
    fn fitted_constant_monotone_in_sample_count() {
        let spec = nse_spec();
        let mut few = small_cfg();
        few.samples = 30;
        let mut many = small_cfg();
        many.samples = 90;
        for (a, b) in run_all_audits(&spec, &few)
            .unwrap()
            .iter()
            .zip(run_all_audits(&spec, &many).unwrap().iter())
        {
            assert!(
                a.fitted_constant <= b.fitted_constant + 1e-12,
                "{}: {} vs {}",
                a.condition,
                a.fitted_constant,
                b.fitted_constant
            );
        }
    }

    #[test]
    fn scalar_models_pass_coercivity_and_growth() {
        for equation in [
            SpdeEquation::CahnHilliard {
                phi: PhiPolynomial::double_well(),
                dim: ScalarDim::One,
            },
            SpdeEquation::KuramotoSivashinsky {
                phi: PhiPolynomial::new(vec![0.0, -1.0]),
            },
        ] {
            let spec = SpdeModelSpec {
                equation,
                modes: 8,
                domain_size: TAU,
                kernel: InteractionKernel::stokes_drag(),
                noise: nse_spec().noise,
                include_nonlinear: true,
            };
            let reports = run_all_audits(&spec, &small_cfg()).unwrap();
            assert_eq!(reports.len(), 4, "monotonicity not applicable");
            for report in reports {
                assert!(
                    !report.violated,
                    "{} violated for {:?} with margin {}",
                    report.condition, spec.equation, report.worst_margin
                );
            }
        }
    }

    #[test]
    fn demicontinuity_smoke_test() {
        // pairings of A(u_n, mu) converge along u_n -> u (a perturbation
        // with shrinking amplitude)
        let spec = nse_spec();
        let stream = CounterStream::new(41, 0);
        let u = sample_velocity(&spec, &stream, 0);
        let bump = sample_velocity(&spec, &stream, 4);
        let test_field = sample_velocity(&spec, &stream, 8);
        let mu = sample_velocity_ensemble(&spec, &stream, 0, 4);
        let mean = mu.mean_state();
        let target = nse_drift(&spec, &u, &mean)
            .unwrap()
            .inner_product(&test_field, 0)
            .unwrap();
        let mut prev_gap = f64::INFINITY;
        for level in 1..=4 {
            let eps = 10f64.powi(-level);
            let mut un = u.clone();
            un.axpy(eps, &bump);
            let pairing = nse_drift(&spec, &un, &mean)
                .unwrap()
                .inner_product(&test_field, 0)
                .unwrap();
            let gap = (pairing - target).abs();
            assert!(gap <= prev_gap * 1.01 + 1e-12, "no convergence at {eps}");
            prev_gap = gap;
        }
        assert!(prev_gap <= 1e-3 * target.abs().max(1.0));
    }

    #[test]
    fn reports_serialize_to_json() {
        let spec = nse_spec();
        let mut cfg = small_cfg();
        cfg.samples = 5;
        let report = audit_coercivity(&spec, &cfg).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"condition\":\"coercivity\""));
        assert!(json.contains("not a certification"));
    }
}
