//! IMEX stepping of N coupled spectral fields.
//!
//! The stiff linear operator (Stokes term for the fluid system, bilaplacian
//! for the fourth-order scalar models) is diagonal in Fourier space and
//! treated implicitly; convection, the polynomial nonlinearity, the
//! interaction drift and the noise are explicit. Each step has two phases:
//! phase 1 computes the shared ensemble statistics (mean field, clipped
//! norms), phase 2 updates particles independently in parallel. Noise is
//! drawn from per-(particle, mode) counter streams, so trajectories are
//! bitwise reproducible for any worker count.

use super::kernel::{mean_field_drift_with_mean, InteractionKernel, KernelKind};
use super::noise::NoiseModel;
use super::{Diagnostics, L2State, LinearState, PathEnsemble, PathMeta};
use crate::error::Error;
use crate::mvsde::steps_for;
use crate::rng::CounterStream;
use crate::spectral::{
    bilinear, PhiPolynomial, ScalarDim, ScalarOp, ScalarSpectralField, SpectralVelocityField,
    MAX_MODES,
};
use crate::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Stream tag of a Fourier mode, independent of any truncation level, so
/// noise draws nest across mode counts.
#[inline]
pub fn mode_stream_tag(kx: i64, ky: i64) -> u64 {
    (((kx + 512) as u64) << 32) | ((ky + 512) as u64)
}

/// Sub-stream tags under one master seed.
const NOISE_TAG: u64 = 0x6e6f_6973;
const INIT_TAG: u64 = 0x696e_6974;

/// The model classes the engine integrates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "equation")]
pub enum SpdeEquation {
    /// du = [nu A u - B(u) + K] dt + sigma dW on the 2D torus
    #[serde(rename = "navier_stokes_2d")]
    NavierStokes2d { viscosity: f64 },
    /// du = [-Lap^2 u + Lap phi(u) + K] dt + sigma dW
    CahnHilliard {
        phi: PhiPolynomial,
        dim: ScalarDim,
    },
    /// du = [-u_xxxx + phi(u)_xx - u u_x + K] dt + sigma dW (1D); the
    /// classical flame-front equation is phi(x) = -x
    KuramotoSivashinsky { phi: PhiPolynomial },
}

impl SpdeEquation {
    pub fn tag(&self) -> u32 {
        match self {
            SpdeEquation::NavierStokes2d { .. } => 1,
            SpdeEquation::CahnHilliard { .. } => 2,
            SpdeEquation::KuramotoSivashinsky { .. } => 3,
        }
    }

    pub fn scalar_dim(&self) -> Option<ScalarDim> {
        match self {
            SpdeEquation::NavierStokes2d { .. } => None,
            SpdeEquation::CahnHilliard { dim, .. } => Some(*dim),
            SpdeEquation::KuramotoSivashinsky { .. } => Some(ScalarDim::One),
        }
    }
}

/// Full model description: equation, grid, interaction and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdeModelSpec {
    #[serde(flatten)]
    pub equation: SpdeEquation,
    pub modes: usize,
    pub domain_size: f64,
    pub kernel: InteractionKernel,
    pub noise: NoiseModel,
    /// switch for the nonlinear terms (convection / phi); linear-flow
    /// studies and decay oracles turn them off
    #[serde(default = "default_true")]
    pub include_nonlinear: bool,
}

fn default_true() -> bool {
    true
}

impl SpdeModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.modes < 1 || self.modes > MAX_MODES {
            return Err(Error::config(format!(
                "modes must lie in 1..={MAX_MODES}, got {}",
                self.modes
            )));
        }
        if !(self.domain_size > 0.0) {
            return Err(Error::config("domain_size must be positive"));
        }
        match &self.equation {
            SpdeEquation::NavierStokes2d { viscosity } => {
                if !(*viscosity > 0.0) {
                    return Err(Error::config("viscosity must be positive"));
                }
            }
            SpdeEquation::CahnHilliard { phi, dim } => phi.check_degree(*dim)?,
            SpdeEquation::KuramotoSivashinsky { phi } => phi.check_degree(ScalarDim::One)?,
        }
        if !(self.noise.base_amplitude >= 0.0)
            || !(self.noise.multiplicative >= 0.0)
            || !(self.noise.clip > 0.0)
        {
            return Err(Error::config("noise amplitudes must be nonnegative"));
        }
        Ok(())
    }

    /// Dissipation norm order: 1 for the fluid system, 2 for the
    /// fourth-order models.
    pub fn dissipation_order(&self) -> i32 {
        match self.equation {
            SpdeEquation::NavierStokes2d { .. } => 1,
            _ => 2,
        }
    }
}

/// Time-stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub save_stride: usize,
    /// arm the stopping rule at this threshold
    #[serde(default)]
    pub stop_threshold: Option<f64>,
}

fn default_stride() -> usize {
    1
}

/// A completed run: the saved trajectory plus per-step diagnostics.
#[derive(Debug, Clone)]
pub struct SpdeRun<S> {
    pub path: PathEnsemble<S>,
    pub diagnostics: Diagnostics,
    /// time at which the armed stopping rule fired, if it did
    pub stopped_at: Option<f64>,
}

/// Default initial sampler: i.i.d. random divergence-free fields with
/// velocity amplitude decay |k|^-3.
pub fn sample_initial_velocity(
    modes: usize,
    domain_size: f64,
    n: usize,
    master_seed: u64,
    amplitude: f64,
    stream_ids: &[u64],
) -> Vec<SpectralVelocityField> {
    assert_eq!(stream_ids.len(), n);
    let root = CounterStream::new(master_seed, INIT_TAG);
    (0..n)
        .map(|i| {
            SpectralVelocityField::random(
                modes,
                domain_size,
                3.0,
                amplitude,
                &root.substream(stream_ids[i]),
            )
        })
        .collect()
}

/// Scalar counterpart, |k|^-3 coefficient decay, zero mean.
pub fn sample_initial_scalar(
    modes: usize,
    dim: ScalarDim,
    domain_size: f64,
    n: usize,
    master_seed: u64,
    amplitude: f64,
    stream_ids: &[u64],
) -> Vec<ScalarSpectralField> {
    assert_eq!(stream_ids.len(), n);
    let root = CounterStream::new(master_seed, INIT_TAG);
    (0..n)
        .map(|i| {
            ScalarSpectralField::random(
                modes,
                dim,
                domain_size,
                3.0,
                amplitude,
                &root.substream(stream_ids[i]),
            )
        })
        .collect()
}

fn ensure_homogeneous_velocity(
    spec: &SpdeModelSpec,
    states: &[SpectralVelocityField],
) -> Result<()> {
    for s in states {
        if s.modes() != spec.modes || s.domain_size() != spec.domain_size {
            return Err(Error::dim(
                "ensemble states do not share the spec grid".to_string(),
            ));
        }
    }
    Ok(())
}

/// Particle visit order keyed by stream id. Ensemble reductions follow this
/// order, so relabeling particle slots permutes trajectories bit-exactly.
fn canonical_order(stream_ids: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..stream_ids.len()).collect();
    order.sort_by_key(|&i| stream_ids[i]);
    order
}

fn mean_state_ordered<S: LinearState>(states: &[S], order: &[usize]) -> S {
    let mut mean = states[0].zero_like();
    for &i in order {
        mean.axpy(1.0, &states[i]);
    }
    mean.scale_mut(1.0 / states.len() as f64);
    mean
}

/// One IMEX step of the coupled fluid system:
/// w^{m+1} = [w^m + dt (-B_w + K_w) + amp * noise_w] / (1 + dt nu s^2 |k|^2).
pub fn imex_step_nse(
    states: &[SpectralVelocityField],
    spec: &SpdeModelSpec,
    t: f64,
    dt: f64,
    step: u64,
    stream_ids: &[u64],
) -> Result<Vec<SpectralVelocityField>> {
    let viscosity = match spec.equation {
        SpdeEquation::NavierStokes2d { viscosity } => viscosity,
        _ => return Err(Error::config("imex_step_nse needs the fluid equation")),
    };
    ensure_homogeneous_velocity(spec, states)?;

    // phase 1: shared empirical statistics, reduced in canonical order
    let order = canonical_order(stream_ids);
    let mean = match spec.kernel.kind {
        KernelKind::Zero => None,
        _ => Some(mean_state_ordered(states, &order)),
    };
    let norms: Vec<f64> = states.iter().map(|s| s.l2_norm_sq().sqrt()).collect();
    let ordered_norms: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let stat = spec.noise.ensemble_statistic(&ordered_norms);
    let noise_root = CounterStream::new(spec.noise.master_seed, NOISE_TAG);

    // phase 2: independent particle updates
    let updates: Vec<Result<SpectralVelocityField>> = states
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let mut explicit = u.zero_like();
            if spec.include_nonlinear {
                let b = bilinear(u, u)?;
                explicit.axpy(-1.0, &b);
            }
            if let Some(mean) = &mean {
                let k = mean_field_drift_with_mean(u, mean, &spec.kernel, t);
                explicit.axpy(1.0, &k);
            }
            let amp = spec.noise.amplitude(norms[i], stat);
            let mut noise = spec.noise.velocity_increment(
                spec.modes,
                spec.domain_size,
                &noise_root.substream(stream_ids[i]),
                step,
                dt,
            );
            noise.scale_mut(amp);
            let next = u.imex_combine(&explicit, &noise, dt, viscosity);
            if !next.l2_norm_sq().is_finite() {
                return Err(Error::BlowUp {
                    particle: i,
                    time: t,
                    energy: norms[i] * norms[i],
                });
            }
            Ok(next)
        })
        .collect();
    updates.into_iter().collect()
}

/// One IMEX step of a fourth-order scalar model: the bilaplacian is
/// implicit, Lap phi(u), the advection term (KS) and the interaction are
/// explicit with dealiasing.
pub fn imex_step_scalar(
    states: &[ScalarSpectralField],
    spec: &SpdeModelSpec,
    t: f64,
    dt: f64,
    step: u64,
    stream_ids: &[u64],
) -> Result<Vec<ScalarSpectralField>> {
    let (phi, advect, dim) = match &spec.equation {
        SpdeEquation::CahnHilliard { phi, dim } => (phi, false, *dim),
        SpdeEquation::KuramotoSivashinsky { phi } => (phi, true, ScalarDim::One),
        _ => {
            return Err(Error::config(
                "imex_step_scalar needs a fourth-order scalar equation",
            ))
        }
    };
    for s in states {
        if s.modes() != spec.modes || s.domain_size() != spec.domain_size || s.dim() != dim {
            return Err(Error::dim(
                "ensemble states do not share the spec grid".to_string(),
            ));
        }
    }

    let order = canonical_order(stream_ids);
    let mean = match spec.kernel.kind {
        KernelKind::Zero => None,
        _ => Some(mean_state_ordered(states, &order)),
    };
    let norms: Vec<f64> = states.iter().map(|s| s.l2_norm_sq().sqrt()).collect();
    let ordered_norms: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let stat = spec.noise.ensemble_statistic(&ordered_norms);
    let noise_root = CounterStream::new(spec.noise.master_seed, NOISE_TAG);

    let updates: Vec<Result<ScalarSpectralField>> = states
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let mut explicit = u.zero_like();
            if spec.include_nonlinear {
                let lap_phi = u.nonlinearity_phi(phi)?.apply_op(ScalarOp::Laplacian)?;
                explicit.axpy(1.0, &lap_phi);
                if advect {
                    let adv = u.self_advection_1d()?;
                    explicit.axpy(-1.0, &adv);
                }
            }
            if let Some(mean) = &mean {
                let k = mean_field_drift_with_mean(u, mean, &spec.kernel, t);
                explicit.axpy(1.0, &k);
            }
            let amp = spec.noise.amplitude(norms[i], stat);
            let mut noise = spec.noise.scalar_increment(
                spec.modes,
                dim,
                spec.domain_size,
                &noise_root.substream(stream_ids[i]),
                step,
                dt,
            );
            noise.scale_mut(amp);
            let next = u.imex_combine_fourth_order(&explicit, &noise, dt);
            if !next.l2_norm_sq().is_finite() {
                return Err(Error::BlowUp {
                    particle: i,
                    time: t,
                    energy: norms[i] * norms[i],
                });
            }
            Ok(next)
        })
        .collect();
    updates.into_iter().collect()
}

fn record<S: L2State>(
    diag: &mut Diagnostics,
    t: f64,
    states: &[S],
    dissipation_sq: impl Fn(&S) -> f64,
) {
    let n = states.len() as f64;
    diag.times.push(t);
    diag.l2_sq_first.push(states[0].l2_norm_sq());
    diag.dissipation_sq_first.push(dissipation_sq(&states[0]));
    diag.mean_l2_sq
        .push(states.iter().map(|s| s.l2_norm_sq()).sum::<f64>() / n);
    diag.mean_dissipation_sq
        .push(states.iter().map(&dissipation_sq).sum::<f64>() / n);
    diag.max_l2_sq.push(
        states
            .iter()
            .map(|s| s.l2_norm_sq())
            .fold(0.0f64, f64::max),
    );
}

/// The stopping rule evaluated incrementally while the run progresses.
struct StopRule {
    threshold: f64,
    integral: f64,
    prev_dissipation: f64,
    prev_t: f64,
}

impl StopRule {
    fn new(threshold: f64, l2_sq0: f64, dissipation0: f64) -> (Self, bool) {
        let rule = StopRule {
            threshold,
            integral: 0.0,
            prev_dissipation: dissipation0,
            prev_t: 0.0,
        };
        let fired = l2_sq0 > threshold;
        (rule, fired)
    }

    fn advance(&mut self, t: f64, l2_sq: f64, dissipation_sq: f64) -> bool {
        self.integral += 0.5 * (t - self.prev_t) * (self.prev_dissipation + dissipation_sq);
        self.prev_dissipation = dissipation_sq;
        self.prev_t = t;
        l2_sq > self.threshold || self.integral > self.threshold
    }
}

macro_rules! drive {
    ($spec:expr, $initial:expr, $sim:expr, $ids:expr, $meta:expr, $step_fn:ident, $diss_order:expr) => {{
        let spec = $spec;
        let sim = $sim;
        spec.validate()?;
        let steps = steps_for(sim.t_end, sim.dt)? as u64;
        let stride = sim.save_stride.max(1) as u64;
        let n = $initial.len();
        if n == 0 {
            return Err(Error::config("need at least one particle"));
        }
        let ids: Vec<u64> = match $ids {
            Some(v) => v.to_vec(),
            None => (0..n as u64).collect(),
        };
        if ids.len() != n {
            return Err(Error::config("one stream id per particle required"));
        }
        let mut states = $initial;
        let mut diag = Diagnostics::default();
        let diss_order = $diss_order;
        record(&mut diag, 0.0, &states, |s| s.norm_sq(diss_order));
        let mut rule_state = sim
            .stop_threshold
            .map(|m| StopRule::new(m, diag.l2_sq_first[0], diag.dissipation_sq_first[0]));
        let mut stopped_at = None;
        if let Some((_, fired)) = &rule_state {
            if *fired {
                stopped_at = Some(0.0);
            }
        }
        let mut times = vec![0.0];
        let mut frames = vec![states.clone()];
        if stopped_at.is_none() {
            for m in 0..steps {
                let t = m as f64 * sim.dt;
                states = $step_fn(&states, spec, t, sim.dt, m, &ids)?;
                let t_next = (m + 1) as f64 * sim.dt;
                record(&mut diag, t_next, &states, |s| s.norm_sq(diss_order));
                let mut fire = false;
                if let Some((rule, _)) = rule_state.as_mut() {
                    fire = rule.advance(
                        t_next,
                        *diag.l2_sq_first.last().unwrap(),
                        *diag.dissipation_sq_first.last().unwrap(),
                    );
                }
                let last = m + 1 == steps;
                if (m + 1) % stride == 0 || last || fire {
                    times.push(t_next);
                    frames.push(states.clone());
                }
                if fire {
                    stopped_at = Some(t_next);
                    break;
                }
            }
        }
        let path = PathEnsemble::new(times, frames, $meta)?;
        Ok(SpdeRun {
            path,
            diagnostics: diag,
            stopped_at,
        })
    }};
}

/// Drive the coupled fluid system over [0, t_end].
pub fn simulate_nse(
    spec: &SpdeModelSpec,
    initial: Vec<SpectralVelocityField>,
    sim: &SimParams,
    stream_ids: Option<&[u64]>,
    meta: PathMeta,
) -> Result<SpdeRun<SpectralVelocityField>> {
    drive!(spec, initial, sim, stream_ids, meta, imex_step_nse, 1)
}

/// Drive a fourth-order scalar system over [0, t_end].
pub fn simulate_scalar(
    spec: &SpdeModelSpec,
    initial: Vec<ScalarSpectralField>,
    sim: &SimParams,
    stream_ids: Option<&[u64]>,
    meta: PathMeta,
) -> Result<SpdeRun<ScalarSpectralField>> {
    drive!(spec, initial, sim, stream_ids, meta, imex_step_scalar, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::stopping_time_tau;
    use num_complex::Complex64;
    use std::f64::consts::TAU;

    fn nse_spec(modes: usize, noise_amp: f64) -> SpdeModelSpec {
        SpdeModelSpec {
            equation: SpdeEquation::NavierStokes2d { viscosity: 1.0 },
            modes,
            domain_size: TAU,
            kernel: InteractionKernel::stokes_drag(),
            noise: NoiseModel {
                retained_modes: 0,
                base_amplitude: if noise_amp > 0.0 { 0.5 } else { 0.0 },
                multiplicative: noise_amp,
                clip: 10.0,
                include_mean_mode: false,
                growth: Default::default(),
                master_seed: 99,
            },
            include_nonlinear: true,
        }
    }

    fn single_mode_field(modes: usize, amplitude: f64) -> SpectralVelocityField {
        let mut raw = crate::spectral::RawVectorField::zero(modes, TAU);
        raw.set_mode_pair(
            1,
            0,
            [Complex64::default(), Complex64::new(amplitude, 0.0)],
        );
        crate::spectral::leray_project(&raw)
    }

    #[test]
    fn heat_decay_of_single_mode_matches_exponential() {
        // nu = 1, B off, K = 0, sigma = 0, k = (1,0): factor 1/(1+dt) per
        // step; over [0,1] at dt = 1e-3 the relative error to e^{-1} is
        // below 1e-3
        let mut spec = nse_spec(4, 0.0);
        spec.kernel = InteractionKernel::zero();
        spec.include_nonlinear = false;
        let initial = vec![single_mode_field(4, 1.0)];
        let sim = SimParams {
            t_end: 1.0,
            dt: 1e-3,
            save_stride: 1000,
            stop_threshold: None,
        };
        let run = simulate_nse(&spec, initial, &sim, None, PathMeta::default()).unwrap();
        let final_amp = run.path.final_frame()[0].coeff(1, 0)[1].re;
        let target = (-1.0f64).exp();
        assert!(
            ((final_amp - target) / target).abs() < 1e-3,
            "amp {final_amp} vs {target}"
        );
    }

    #[test]
    fn shear_flow_evolves_exactly_like_stokes_flow() {
        // B(u) vanishes identically for the shear field, so the nonlinear
        // run and the linear run agree to rounding
        let mut spec = nse_spec(8, 0.0);
        spec.kernel = InteractionKernel::zero();
        let initial = vec![single_mode_field(8, 1.0)];
        let sim = SimParams {
            t_end: 0.1,
            dt: 1e-2,
            save_stride: 1,
            stop_threshold: None,
        };
        let with_b = simulate_nse(&spec, initial.clone(), &sim, None, PathMeta::default()).unwrap();
        let mut linear = spec.clone();
        linear.include_nonlinear = false;
        let without_b = simulate_nse(&linear, initial, &sim, None, PathMeta::default()).unwrap();
        for (fa, fb) in with_b.path.frames().iter().zip(without_b.path.frames()) {
            let d = fa[0].l2_distance_sq(&fb[0]).sqrt();
            assert!(d <= 1e-13 * fb[0].l2_norm_sq().sqrt().max(1e-30), "gap {d}");
        }
    }

    #[test]
    fn discrete_energy_inequality_every_step() {
        // sigma = 0, K = 0: ||u+||^2 + 2 nu dt ||u+||_1^2 <= ||u||^2 + O(dt^2)
        let mut spec = nse_spec(8, 0.0);
        spec.kernel = InteractionKernel::zero();
        let stream = crate::rng::CounterStream::new(7, 0);
        let mut states =
            vec![SpectralVelocityField::random(8, TAU, 2.0, 1.0, &stream)];
        let dt = 1e-2;
        for m in 0..50u64 {
            let before = states[0].l2_norm_sq();
            let b_norm = bilinear(&states[0], &states[0]).unwrap().l2_norm_sq().sqrt();
            states = imex_step_nse(&states, &spec, m as f64 * dt, dt, m, &[0]).unwrap();
            let after = states[0].l2_norm_sq();
            let h1_after = states[0].norm_sq(1);
            let lap_after = states[0].norm_sq(2).sqrt();
            let slack = dt * dt * 2.0 * b_norm * (b_norm + lap_after) + 1e-13 * before;
            assert!(
                after + 2.0 * dt * h1_after <= before + slack,
                "step {m}: {after} + {h1_after} vs {before}"
            );
        }
    }

    #[test]
    fn energy_nonincreasing_without_forcing() {
        let mut spec = nse_spec(8, 0.0);
        spec.kernel = InteractionKernel::zero();
        let stream = crate::rng::CounterStream::new(8, 0);
        let initial = vec![SpectralVelocityField::random(8, TAU, 2.0, 1.0, &stream)];
        let sim = SimParams {
            t_end: 0.5,
            dt: 1e-2,
            save_stride: 1,
            stop_threshold: None,
        };
        let run = simulate_nse(&spec, initial, &sim, None, PathMeta::default()).unwrap();
        for w in run.diagnostics.mean_l2_sq.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "energy grew: {w:?}");
        }
    }

    #[test]
    fn runs_are_exchangeable_under_relabeling() {
        let spec = nse_spec(6, 0.3);
        let ids = [0u64, 1, 2, 3];
        let initial = sample_initial_velocity(6, TAU, 4, 2024, 1.0, &ids);
        let sim = SimParams {
            t_end: 0.05,
            dt: 1e-2,
            save_stride: 1,
            stop_threshold: None,
        };
        let base = simulate_nse(&spec, initial.clone(), &sim, Some(&ids), PathMeta::default())
            .unwrap();
        // permute initial states and stream labels together
        let perm = [2usize, 0, 3, 1];
        let perm_initial: Vec<_> = perm.iter().map(|&i| initial[i].clone()).collect();
        let perm_ids: Vec<u64> = perm.iter().map(|&i| ids[i]).collect();
        let permuted = simulate_nse(
            &spec,
            perm_initial,
            &sim,
            Some(&perm_ids),
            PathMeta::default(),
        )
        .unwrap();
        for (f_base, f_perm) in base.path.frames().iter().zip(permuted.path.frames()) {
            for (slot, &src) in perm.iter().enumerate() {
                assert_eq!(
                    f_base[src].transverse(),
                    f_perm[slot].transverse(),
                    "permuted run differs"
                );
            }
        }
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible_across_thread_counts() {
        let spec = nse_spec(6, 0.3);
        let ids = [0u64, 1, 2, 3, 4, 5];
        let initial = sample_initial_velocity(6, TAU, 6, 555, 1.0, &ids);
        let sim = SimParams {
            t_end: 0.05,
            dt: 1e-2,
            save_stride: 2,
            stop_threshold: None,
        };
        let run_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                simulate_nse(&spec, initial.clone(), &sim, Some(&ids), PathMeta::default())
                    .unwrap()
            })
        };
        let a = run_with(1);
        let b = run_with(4);
        assert_eq!(a.path.times(), b.path.times());
        for (fa, fb) in a.path.frames().iter().zip(b.path.frames()) {
            for (sa, sb) in fa.iter().zip(fb.iter()) {
                assert_eq!(sa.transverse(), sb.transverse());
            }
        }
    }

    #[test]
    fn ch_single_mode_implicit_decay() {
        // phi = 0, K = 0, sigma = 0: amplitude x 1/(1 + dt k^4) per step
        let spec = SpdeModelSpec {
            equation: SpdeEquation::CahnHilliard {
                phi: PhiPolynomial::new(vec![0.0]),
                dim: ScalarDim::One,
            },
            modes: 8,
            domain_size: TAU,
            kernel: InteractionKernel::zero(),
            noise: NoiseModel::silent(1),
            include_nonlinear: true,
        };
        let mut f = ScalarSpectralField::zero(8, ScalarDim::One, TAU);
        f.set_mode_pair(2, 0, Complex64::new(0.3, 0.0));
        let dt = 1e-2;
        let states = imex_step_scalar(&[f.clone()], &spec, 0.0, dt, 0, &[0]).unwrap();
        let expect = 0.3 / (1.0 + dt * 16.0);
        assert!(
            (states[0].coeff(2, 0).re - expect).abs() < 1e-14,
            "{} vs {expect}",
            states[0].coeff(2, 0).re
        );
    }

    #[test]
    fn ks_classical_energy_stays_bounded() {
        // phi(x) = -x reproduces -u_xxxx - u_xx - u u_x; on a length-22
        // domain the attractor keeps the L2 norm bounded over long runs
        let spec = SpdeModelSpec {
            equation: SpdeEquation::KuramotoSivashinsky {
                phi: PhiPolynomial::new(vec![0.0, -1.0]),
            },
            modes: 32,
            domain_size: 22.0,
            kernel: InteractionKernel::zero(),
            noise: NoiseModel::silent(2),
            include_nonlinear: true,
        };
        let stream = crate::rng::CounterStream::new(404, 0);
        let initial =
            vec![ScalarSpectralField::random(32, ScalarDim::One, 22.0, 2.0, 0.5, &stream)];
        let sim = SimParams {
            t_end: 50.0,
            dt: 0.01,
            save_stride: 500,
            stop_threshold: None,
        };
        let run = simulate_scalar(&spec, initial, &sim, None, PathMeta::default()).unwrap();
        let sup = run
            .diagnostics
            .l2_sq_first
            .iter()
            .copied()
            .fold(0.0f64, f64::max);
        assert!(sup.is_finite() && sup < 1e3, "sup energy {sup}");
        // the flame front is active, not decayed to zero
        let last = *run.diagnostics.l2_sq_first.last().unwrap();
        assert!(last > 1e-2, "KS died out: {last}");
    }

    #[test]
    fn ch_conserves_mass_without_mean_mode_noise() {
        let spec = SpdeModelSpec {
            equation: SpdeEquation::CahnHilliard {
                phi: PhiPolynomial::double_well(),
                dim: ScalarDim::One,
            },
            modes: 16,
            domain_size: TAU,
            kernel: InteractionKernel::zero(),
            noise: NoiseModel {
                retained_modes: 0,
                base_amplitude: 0.5,
                multiplicative: 0.3,
                clip: 10.0,
                include_mean_mode: false,
                growth: Default::default(),
                master_seed: 31,
            },
            include_nonlinear: true,
        };
        let stream = crate::rng::CounterStream::new(17, 0);
        let mut f = ScalarSpectralField::random(16, ScalarDim::One, TAU, 2.0, 0.5, &stream);
        *f.coeff_mut(0, 0) = Complex64::new(0.25, 0.0);
        let m0 = f.mean();
        let sim = SimParams {
            t_end: 0.5,
            dt: 1e-3,
            save_stride: 100,
            stop_threshold: None,
        };
        let run = simulate_scalar(&spec, vec![f], &sim, None, PathMeta::default()).unwrap();
        let m_end = run.path.final_frame()[0].mean();
        assert!((m_end - m0).abs() < 1e-12, "mass drifted: {m0} -> {m_end}");
    }

    #[test]
    fn armed_stopping_rule_truncates_run() {
        let mut spec = nse_spec(6, 0.0);
        spec.kernel = InteractionKernel::zero();
        let stream = crate::rng::CounterStream::new(12, 0);
        let initial = vec![SpectralVelocityField::random(6, TAU, 2.0, 2.0, &stream)];
        let sim = SimParams {
            t_end: 1.0,
            dt: 1e-2,
            save_stride: 1,
            // the H1 integral of this decaying field crosses a small
            // threshold quickly
            stop_threshold: Some(0.05),
        };
        let run = simulate_nse(&spec, initial, &sim, None, PathMeta::default()).unwrap();
        let tau = run.stopped_at.expect("rule should fire");
        assert!(tau < 1.0);
        assert_eq!(
            stopping_time_tau(&run.diagnostics, 0.05),
            tau,
            "post-hoc stopping time disagrees with the armed rule"
        );
        assert_eq!(run.path.times().last().copied().unwrap(), tau);
    }

    #[test]
    fn zero_noise_zero_kernel_single_particle_is_deterministic_pde() {
        let mut spec = nse_spec(6, 0.0);
        spec.kernel = InteractionKernel::zero();
        let stream = crate::rng::CounterStream::new(21, 0);
        let initial = vec![SpectralVelocityField::random(6, TAU, 2.0, 1.0, &stream)];
        let sim = SimParams {
            t_end: 0.1,
            dt: 1e-2,
            save_stride: 1,
            stop_threshold: None,
        };
        let a = simulate_nse(&spec, initial.clone(), &sim, None, PathMeta::default()).unwrap();
        let b = simulate_nse(&spec, initial, &sim, None, PathMeta::default()).unwrap();
        for (fa, fb) in a.path.frames().iter().zip(b.path.frames()) {
            assert_eq!(fa[0].transverse(), fb[0].transverse());
        }
    }
}
