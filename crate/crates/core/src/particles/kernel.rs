//! Interaction kernels: the pairwise force K(t, u, v) whose empirical
//! average couples the particles.

use super::{LinearState, ParticleEnsemble};
use serde::{Deserialize, Serialize};

/// Kernel families. The drag kernel returns u - v exactly; its empirical
/// mean is u - mean(ensemble), which lets the mean-field sum collapse to a
/// single ensemble mean without changing any bit of the result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KernelKind {
    Zero,
    StokesDrag,
    /// K(t, u, v) = self_gain * u + other_gain * v
    LinearCustom { self_gain: f64, other_gain: f64 },
}

/// A drift kernel with its declared Lipschitz constant (used by auditors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionKernel {
    #[serde(flatten)]
    pub kind: KernelKind,
    /// declared constant of the linear-growth/Lipschitz bound
    #[serde(default = "default_lipschitz")]
    pub lipschitz: f64,
}

fn default_lipschitz() -> f64 {
    1.0
}

impl InteractionKernel {
    pub fn zero() -> Self {
        InteractionKernel {
            kind: KernelKind::Zero,
            lipschitz: 0.0,
        }
    }

    pub fn stokes_drag() -> Self {
        InteractionKernel {
            kind: KernelKind::StokesDrag,
            lipschitz: 1.0,
        }
    }

    /// Pairwise drift K(t, u, v).
    pub fn eval<S: LinearState>(&self, _t: f64, u: &S, v: &S) -> S {
        match self.kind {
            KernelKind::Zero => u.zero_like(),
            KernelKind::StokesDrag => {
                let mut out = u.clone();
                out.axpy(-1.0, v);
                out
            }
            KernelKind::LinearCustom {
                self_gain,
                other_gain,
            } => {
                let mut out = u.zero_like();
                out.axpy(self_gain, u);
                out.axpy(other_gain, v);
                out
            }
        }
    }

    /// Naive N-term empirical average (1/N) sum_j K(t, u, X_j).
    pub fn mean_field_naive<S: LinearState>(
        &self,
        t: f64,
        state: &S,
        ensemble: &ParticleEnsemble<S>,
    ) -> S {
        let mut acc = state.zero_like();
        for v in ensemble.states() {
            let k = self.eval(t, state, v);
            acc.axpy(1.0, &k);
        }
        acc.scale_mut(1.0 / ensemble.len() as f64);
        acc
    }
}

/// Mean-field drift (1/N) sum_j K(t, state, X_j), with the ensemble mean
/// factored out for kernels linear in their second argument.
pub fn mean_field_drift<S: LinearState>(
    state: &S,
    ensemble: &ParticleEnsemble<S>,
    kernel: &InteractionKernel,
    _t: f64,
) -> S {
    match kernel.kind {
        KernelKind::Zero => state.zero_like(),
        KernelKind::StokesDrag => {
            let mut out = state.clone();
            out.axpy(-1.0, &ensemble.mean_state());
            out
        }
        KernelKind::LinearCustom {
            self_gain,
            other_gain,
        } => {
            let mut out = state.zero_like();
            out.axpy(self_gain, state);
            out.axpy(other_gain, &ensemble.mean_state());
            out
        }
    }
}

/// Same, but against a precomputed ensemble mean (the per-step phase-1
/// statistic), avoiding the N-fold sum per particle.
pub fn mean_field_drift_with_mean<S: LinearState>(
    state: &S,
    mean: &S,
    kernel: &InteractionKernel,
    _t: f64,
) -> S {
    match kernel.kind {
        KernelKind::Zero => state.zero_like(),
        KernelKind::StokesDrag => {
            let mut out = state.clone();
            out.axpy(-1.0, mean);
            out
        }
        KernelKind::LinearCustom {
            self_gain,
            other_gain,
        } => {
            let mut out = state.zero_like();
            out.axpy(self_gain, state);
            out.axpy(other_gain, mean);
            out
        }
    }
}
