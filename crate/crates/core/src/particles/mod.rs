//! The weakly interacting N-field engine: ensembles, trajectory storage,
//! per-step diagnostics and the stopping rule.

pub mod kernel;
pub mod noise;
pub mod spde;

pub use kernel::{
    mean_field_drift, mean_field_drift_with_mean, InteractionKernel, KernelKind,
};
pub use noise::{NoiseGrowth, NoiseModel};
pub use spde::{
    sample_initial_scalar, sample_initial_velocity, simulate_nse, simulate_scalar, SimParams,
    SpdeEquation, SpdeModelSpec, SpdeRun,
};

use crate::error::Error;
use crate::mvsde::VectorState;
use crate::spectral::{ScalarSpectralField, SpectralVelocityField};
use crate::Result;

/// States that live in a (discrete) L^2 space: the metric the empirical
/// Wasserstein distances are built on.
pub trait L2State: Clone + Send + Sync {
    fn l2_norm_sq(&self) -> f64;
    fn l2_distance_sq(&self, other: &Self) -> f64;
}

impl L2State for SpectralVelocityField {
    fn l2_norm_sq(&self) -> f64 {
        SpectralVelocityField::l2_norm_sq(self)
    }
    fn l2_distance_sq(&self, other: &Self) -> f64 {
        SpectralVelocityField::l2_distance_sq(self, other)
    }
}

impl L2State for ScalarSpectralField {
    fn l2_norm_sq(&self) -> f64 {
        ScalarSpectralField::l2_norm_sq(self)
    }
    fn l2_distance_sq(&self, other: &Self) -> f64 {
        ScalarSpectralField::l2_distance_sq(self, other)
    }
}

impl L2State for VectorState {
    fn l2_norm_sq(&self) -> f64 {
        crate::mvsde::norm_sq(self)
    }
    fn l2_distance_sq(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// States supporting the linear operations the mean-field averages need.
pub trait LinearState: L2State {
    fn zero_like(&self) -> Self;
    fn scale_mut(&mut self, factor: f64);
    /// self += factor * other
    fn axpy(&mut self, factor: f64, other: &Self);
}

impl LinearState for SpectralVelocityField {
    fn zero_like(&self) -> Self {
        SpectralVelocityField::zero(self.modes(), self.domain_size())
    }
    fn scale_mut(&mut self, factor: f64) {
        SpectralVelocityField::scale_mut(self, factor)
    }
    fn axpy(&mut self, factor: f64, other: &Self) {
        SpectralVelocityField::axpy(self, factor, other)
    }
}

impl LinearState for ScalarSpectralField {
    fn zero_like(&self) -> Self {
        ScalarSpectralField::zero(self.modes(), self.dim(), self.domain_size())
    }
    fn scale_mut(&mut self, factor: f64) {
        ScalarSpectralField::scale_mut(self, factor)
    }
    fn axpy(&mut self, factor: f64, other: &Self) {
        ScalarSpectralField::axpy(self, factor, other)
    }
}

impl LinearState for VectorState {
    fn zero_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn scale_mut(&mut self, factor: f64) {
        for v in self.iter_mut() {
            *v *= factor;
        }
    }
    fn axpy(&mut self, factor: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += factor * b;
        }
    }
}

/// N particle states at one time instant with implicit uniform weights:
/// the carrier of the empirical measure.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble<S> {
    states: Vec<S>,
}

impl<S: L2State> ParticleEnsemble<S> {
    pub fn new(states: Vec<S>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::config("an ensemble needs at least one particle"));
        }
        Ok(ParticleEnsemble { states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn into_states(self) -> Vec<S> {
        self.states
    }

    /// (1/N) sum of squared L2 norms.
    pub fn mean_l2_norm_sq(&self) -> f64 {
        self.states.iter().map(|s| s.l2_norm_sq()).sum::<f64>() / self.states.len() as f64
    }
}

impl<S: LinearState> ParticleEnsemble<S> {
    /// Ensemble mean state, summed in particle-index order.
    pub fn mean_state(&self) -> S {
        let mut mean = self.states[0].zero_like();
        for s in &self.states {
            mean.axpy(1.0, s);
        }
        mean.scale_mut(1.0 / self.states.len() as f64);
        mean
    }
}

/// Run identity attached to a stored trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathMeta {
    pub config_hash: u64,
    pub seed: u64,
}

/// Time-gridded trajectories of N particles. Frame f holds the states of
/// all particles at `times[f]`; the grid is strictly increasing.
#[derive(Debug, Clone)]
pub struct PathEnsemble<S> {
    times: Vec<f64>,
    frames: Vec<Vec<S>>,
    pub meta: PathMeta,
}

impl<S: L2State> PathEnsemble<S> {
    pub fn new(times: Vec<f64>, frames: Vec<Vec<S>>, meta: PathMeta) -> Result<Self> {
        if times.len() != frames.len() || times.is_empty() {
            return Err(Error::dim("one frame per grid time required"));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::config("time grid must be strictly increasing"));
        }
        let n = frames[0].len();
        if n == 0 || frames.iter().any(|f| f.len() != n) {
            return Err(Error::dim("all frames must hold the same particles"));
        }
        Ok(PathEnsemble {
            times,
            frames,
            meta,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[Vec<S>] {
        &self.frames
    }

    pub fn particles(&self) -> usize {
        self.frames[0].len()
    }

    pub fn state(&self, frame: usize, particle: usize) -> &S {
        &self.frames[frame][particle]
    }

    pub fn final_frame(&self) -> &[S] {
        self.frames.last().unwrap()
    }

    /// Discretized path-space norm: max over the grid of state L2 norms.
    pub fn path_sup_norm(&self, particle: usize) -> f64 {
        self.frames
            .iter()
            .map(|f| f[particle].l2_norm_sq())
            .fold(0.0f64, f64::max)
            .sqrt()
    }

    /// Squared sup-in-time L2 distance between particle `i` here and
    /// particle `j` of `other`, over the shared grid.
    pub fn path_distance_sq(&self, i: usize, other: &Self, j: usize) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::dim("path ensembles live on different grids"));
        }
        let mut worst = 0.0f64;
        for (fa, fb) in self.frames.iter().zip(other.frames.iter()) {
            worst = worst.max(fa[i].l2_distance_sq(&fb[j]));
        }
        Ok(worst)
    }

    /// Restriction to a subset of grid indices (must be increasing).
    pub fn restrict_to_times(&self, indices: &[usize]) -> Result<Self> {
        let times: Vec<f64> = indices.iter().map(|&i| self.times[i]).collect();
        let frames: Vec<Vec<S>> = indices.iter().map(|&i| self.frames[i].clone()).collect();
        PathEnsemble::new(times, frames, self.meta)
    }

    /// Restriction to a subset of particles.
    pub fn select_particles(&self, indices: &[usize]) -> Result<Self> {
        if indices.iter().any(|&i| i >= self.particles()) {
            return Err(Error::dim("particle index out of range"));
        }
        let frames: Vec<Vec<S>> = self
            .frames
            .iter()
            .map(|f| indices.iter().map(|&i| f[i].clone()).collect())
            .collect();
        PathEnsemble::new(self.times.clone(), frames, self.meta)
    }

    pub fn ensemble_at(&self, frame: usize) -> Result<ParticleEnsemble<S>> {
        ParticleEnsemble::new(self.frames[frame].clone())
    }
}

/// Per-step scalar diagnostics recorded on every step of an SPDE run (the
/// saved state frames may be strided; these are not).
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// step-boundary times 0 = t_0 < ... < t_steps
    pub times: Vec<f64>,
    /// ||X^1_t||_{L2}^2 of the first particle
    pub l2_sq_first: Vec<f64>,
    /// dissipation norm squared of the first particle (||.||_1^2 for the
    /// fluid system, ||.||_2^2 for the fourth-order scalar models)
    pub dissipation_sq_first: Vec<f64>,
    /// ensemble averages of the same quantities
    pub mean_l2_sq: Vec<f64>,
    pub mean_dissipation_sq: Vec<f64>,
    /// largest particle energy per step
    pub max_l2_sq: Vec<f64>,
}

impl Diagnostics {
    /// sup over the recorded grid of the ensemble-average squared L2 norm.
    pub fn sup_mean_l2_sq(&self) -> f64 {
        self.mean_l2_sq.iter().copied().fold(0.0, f64::max)
    }

    /// Trapezoidal quadrature of the first particle's dissipation stream.
    pub fn dissipation_integral_first(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.times.len() {
            let h = self.times[i] - self.times[i - 1];
            acc += 0.5 * h * (self.dissipation_sq_first[i] + self.dissipation_sq_first[i - 1]);
        }
        acc
    }
}

/// First grid time at which the running integral of the first particle's
/// dissipation norm exceeds `threshold`, or its squared L2 norm does;
/// clipped at the final time (the infimum of an empty set).
pub fn stopping_time_tau(diag: &Diagnostics, threshold: f64) -> f64 {
    let t_end = *diag.times.last().expect("diagnostics are nonempty");
    let mut integral = 0.0;
    for i in 0..diag.times.len() {
        if diag.l2_sq_first[i] > threshold {
            return diag.times[i];
        }
        if i > 0 {
            let h = diag.times[i] - diag.times[i - 1];
            integral += 0.5 * h * (diag.dissipation_sq_first[i] + diag.dissipation_sq_first[i - 1]);
            if integral > threshold {
                return diag.times[i];
            }
        }
    }
    t_end
}
