//! Bundled finite-dimensional model instances.

use super::{norm_sq, MeasureView, MvsdeModel, VectorState};

/// Mean-field Ornstein-Uhlenbeck: b(t, x, mu) = a x + beta mean(mu),
/// sigma = s I. The ensemble mean obeys m' = (a + beta) m in the large-N
/// limit and the single-particle variance v' = 2 a v + s^2.
#[derive(Debug, Clone, Copy)]
pub struct MeanFieldOu {
    pub dim: usize,
    /// a (reversion rate, typically negative)
    pub reversion: f64,
    /// beta (strength of the mean term)
    pub coupling: f64,
    /// s (scalar noise amplitude)
    pub noise: f64,
}

impl MvsdeModel for MeanFieldOu {
    fn dim(&self) -> usize {
        self.dim
    }

    fn drift(&self, _t: f64, x: &[f64], measure: &MeasureView<'_>) -> VectorState {
        x.iter()
            .zip(measure.mean().iter())
            .map(|(xi, mi)| self.reversion * xi + self.coupling * mi)
            .collect()
    }

    fn diffusion_apply(
        &self,
        _t: f64,
        _x: &[f64],
        _measure: &MeasureView<'_>,
        dw: &[f64],
    ) -> VectorState {
        dw.iter().map(|w| self.noise * w).collect()
    }

    fn diffusion_hs_norm_sq(&self, _t: f64, _x: &[f64], _measure: &MeasureView<'_>) -> f64 {
        self.noise * self.noise * self.dim as f64
    }

    fn structural_constant(&self) -> f64 {
        self.reversion.abs() + self.coupling.abs() + self.noise * self.noise * self.dim as f64
    }
}

/// Ornstein-Uhlenbeck with a drag-type interaction: the coupling pulls each
/// particle toward the ensemble mean at rate `drag`,
/// b(t, x, mu) = a x + drag (mean(mu) - x).
#[derive(Debug, Clone, Copy)]
pub struct StokesCoupledOu {
    pub dim: usize,
    pub reversion: f64,
    pub drag: f64,
    pub noise: f64,
}

impl MvsdeModel for StokesCoupledOu {
    fn dim(&self) -> usize {
        self.dim
    }

    fn drift(&self, _t: f64, x: &[f64], measure: &MeasureView<'_>) -> VectorState {
        x.iter()
            .zip(measure.mean().iter())
            .map(|(xi, mi)| self.reversion * xi + self.drag * (mi - xi))
            .collect()
    }

    fn diffusion_apply(
        &self,
        _t: f64,
        _x: &[f64],
        _measure: &MeasureView<'_>,
        dw: &[f64],
    ) -> VectorState {
        dw.iter().map(|w| self.noise * w).collect()
    }

    fn diffusion_hs_norm_sq(&self, _t: f64, _x: &[f64], _measure: &MeasureView<'_>) -> f64 {
        self.noise * self.noise * self.dim as f64
    }

    fn structural_constant(&self) -> f64 {
        self.reversion.abs() + 2.0 * self.drag.abs() + self.noise * self.noise * self.dim as f64
    }
}

/// A deliberately broken diffusion: sigma = s |x|^2 I grows quadratically,
/// violating the square-growth bound on sigma. Used as the auditors'
/// counterexample.
#[derive(Debug, Clone, Copy)]
pub struct BrokenSigmaOu {
    pub dim: usize,
    pub reversion: f64,
    pub noise: f64,
}

impl MvsdeModel for BrokenSigmaOu {
    fn dim(&self) -> usize {
        self.dim
    }

    fn drift(&self, _t: f64, x: &[f64], _measure: &MeasureView<'_>) -> VectorState {
        x.iter().map(|xi| self.reversion * xi).collect()
    }

    fn diffusion_apply(
        &self,
        _t: f64,
        x: &[f64],
        _measure: &MeasureView<'_>,
        dw: &[f64],
    ) -> VectorState {
        let amp = self.noise * norm_sq(x);
        dw.iter().map(|w| amp * w).collect()
    }

    fn diffusion_hs_norm_sq(&self, _t: f64, x: &[f64], _measure: &MeasureView<'_>) -> f64 {
        let amp = self.noise * norm_sq(x);
        amp * amp * self.dim as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvsde::{moment_monitor, simulate};
    use crate::rng::CounterStream;

    #[test]
    fn ou_ensemble_mean_follows_closed_form() {
        // m' = (a + beta) m, a = -1, beta = 0.5, m(0) = 1 -> e^{-0.5} at t = 1
        let model = MeanFieldOu {
            dim: 1,
            reversion: -1.0,
            coupling: 0.5,
            noise: 1.0,
        };
        let n = 4000;
        let initial = vec![vec![1.0]; n];
        let streams = CounterStream::new(2024, 0);
        let path = simulate(&model, initial, 1.0, 1e-3, 100, &streams).unwrap();
        let last = path.states.last().unwrap();
        let mean = last.iter().map(|s| s[0]).sum::<f64>() / n as f64;
        let var = last.iter().map(|s| (s[0] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let target = (-0.5f64).exp();
        assert!(
            (mean - target).abs() < 3.0 * se + 2e-3,
            "mean {mean} vs {target} (se {se})"
        );
    }

    #[test]
    fn ou_variance_follows_scalar_ode() {
        // v' = 2 a v + s^2, a = -1, s = 1, v(0) = 0 -> (1 - e^{-2}) / 2
        let model = MeanFieldOu {
            dim: 1,
            reversion: -1.0,
            coupling: 0.5,
            noise: 1.0,
        };
        let n = 4000;
        let initial = vec![vec![1.0]; n];
        let streams = CounterStream::new(77, 0);
        let path = simulate(&model, initial, 1.0, 1e-3, 100, &streams).unwrap();
        let last = path.states.last().unwrap();
        let mean = last.iter().map(|s| s[0]).sum::<f64>() / n as f64;
        let var = last.iter().map(|s| (s[0] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let target = (1.0 - (-2.0f64).exp()) / 2.0;
        let se = target * (2.0 / (n as f64 - 1.0)).sqrt();
        assert!(
            (var - target).abs() < 3.0 * se + 2e-3,
            "var {var} vs {target} (se {se})"
        );
    }

    #[test]
    fn moment_monitor_bounded_for_ou_paths() {
        let model = StokesCoupledOu {
            dim: 1,
            reversion: -1.0,
            drag: 0.5,
            noise: 0.5,
        };
        let initial = vec![vec![1.0]; 256];
        let streams = CounterStream::new(5, 0);
        let path = simulate(&model, initial, 1.0, 1e-2, 10, &streams).unwrap();
        let rep = moment_monitor(&path, 2.0);
        assert!(rep.sup_moment.is_finite() && rep.sup_moment < 4.0);
        assert!(rep.dissipation_integral < 4.0);
    }
}
