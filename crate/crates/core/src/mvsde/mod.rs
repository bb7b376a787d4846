//! Finite-dimensional distribution-dependent SDEs.
//!
//! The engine steps N particles jointly with explicit Euler-Maruyama,
//! replacing the law of the solution by the ensemble's own empirical
//! measure, evaluated once per step. A radial cut-off maps states into the
//! ball of radius n while fixing its interior; truncating both the state
//! and the empirical measure through it turns superlinear coefficients into
//! bounded ones without touching the dynamics inside the ball.

use crate::error::Error;
use crate::rng::CounterStream;
use crate::Result;

/// A point in R^d.
pub type VectorState = Vec<f64>;

#[inline]
pub fn norm(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub fn norm_sq(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>()
}

/// Radial cut-off psi_n(u) = n u / max(n, |u|): the identity on the closed
/// ball of radius n, radial projection outside, direction preserved.
/// The scale factor is clamped so that |psi_n(u)| <= n and
/// |psi_n(u)_j| <= |u_j| hold in float arithmetic, not just in exact math.
pub fn cutoff_psi(u: &[f64], n: f64) -> VectorState {
    assert!(n > 0.0, "cut-off level must be positive");
    let r2 = norm_sq(u);
    if r2 <= n * n {
        return u.to_vec();
    }
    let mut f = n / r2.sqrt(); // < 1
    let scaled = |f: f64, u: &[f64]| -> Vec<f64> { u.iter().map(|x| x * f).collect() };
    let mut out = scaled(f, u);
    // keep a few ulps below the level so that ensemble averages of the
    // squared norms stay below n^2 as well
    let cap = n * n * (1.0 - 4.0 * f64::EPSILON);
    while norm_sq(&out) > cap {
        f = f64::from_bits(f.to_bits() - 1);
        out = scaled(f, u);
    }
    out
}

/// Image of an empirical measure under the cut-off: apply psi_n to every
/// particle. For empirical measures this realizes mu o psi_n^{-1} exactly.
pub fn pushforward_truncate(states: &[VectorState], n: f64) -> Vec<VectorState> {
    states.iter().map(|u| cutoff_psi(u, n)).collect()
}

/// Empirical-measure view handed to model coefficients: the particle states
/// with their uniform weights, plus the cached statistics models typically
/// consume.
#[derive(Debug, Clone)]
pub struct MeasureView<'a> {
    states: &'a [VectorState],
    mean: VectorState,
    second_moment: f64,
}

impl<'a> MeasureView<'a> {
    pub fn new(states: &'a [VectorState]) -> Self {
        let n = states.len().max(1);
        let dim = states.first().map(|s| s.len()).unwrap_or(0);
        let mut mean = vec![0.0; dim];
        let mut second = crate::spectral::CompensatedSum::new();
        for s in states {
            for (m, x) in mean.iter_mut().zip(s.iter()) {
                *m += x;
            }
            second.add(norm_sq(s));
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        MeasureView {
            states,
            mean,
            second_moment: second.value() / n as f64,
        }
    }

    pub fn states(&self) -> &[VectorState] {
        self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// mu(|.|^2).
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// mu(|.|^p) for arbitrary p.
    pub fn moment(&self, p: f64) -> f64 {
        if self.states.is_empty() {
            return 0.0;
        }
        self.states.iter().map(|s| norm(s).powf(p)).sum::<f64>() / self.states.len() as f64
    }
}

/// A distribution-dependent drift/diffusion pair with its declared growth
/// exponent and structural constant.
pub trait MvsdeModel: Sync {
    fn dim(&self) -> usize;

    /// Drift b(t, x, mu).
    fn drift(&self, t: f64, x: &[f64], measure: &MeasureView<'_>) -> VectorState;

    /// Diffusion applied to a noise increment: sigma(t, x, mu) dw.
    fn diffusion_apply(
        &self,
        t: f64,
        x: &[f64],
        measure: &MeasureView<'_>,
        dw: &[f64],
    ) -> VectorState;

    /// Squared Hilbert-Schmidt norm of sigma(t, x, mu).
    fn diffusion_hs_norm_sq(&self, t: f64, x: &[f64], measure: &MeasureView<'_>) -> f64;

    /// Declared growth exponent kappa >= 2.
    fn kappa(&self) -> f64 {
        2.0
    }

    /// Declared structural constant.
    fn structural_constant(&self) -> f64 {
        1.0
    }
}

/// Coefficients evaluated at (psi_n(x), mu o psi_n^{-1}): bounded by the
/// base model's bound over the radius-n ball, with a coercivity constant
/// independent of the level.
pub struct TruncatedModel<'a, M: MvsdeModel> {
    pub base: &'a M,
    pub level: f64,
}

impl<'a, M: MvsdeModel> TruncatedModel<'a, M> {
    pub fn new(base: &'a M, level: f64) -> Self {
        assert!(level > 0.0);
        TruncatedModel { base, level }
    }
}

impl<'a, M: MvsdeModel> MvsdeModel for TruncatedModel<'a, M> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn drift(&self, t: f64, x: &[f64], measure: &MeasureView<'_>) -> VectorState {
        let truncated = pushforward_truncate(measure.states(), self.level);
        let view = MeasureView::new(&truncated);
        self.base.drift(t, &cutoff_psi(x, self.level), &view)
    }

    fn diffusion_apply(
        &self,
        t: f64,
        x: &[f64],
        measure: &MeasureView<'_>,
        dw: &[f64],
    ) -> VectorState {
        let truncated = pushforward_truncate(measure.states(), self.level);
        let view = MeasureView::new(&truncated);
        self.base
            .diffusion_apply(t, &cutoff_psi(x, self.level), &view, dw)
    }

    fn diffusion_hs_norm_sq(&self, t: f64, x: &[f64], measure: &MeasureView<'_>) -> f64 {
        let truncated = pushforward_truncate(measure.states(), self.level);
        let view = MeasureView::new(&truncated);
        self.base
            .diffusion_hs_norm_sq(t, &cutoff_psi(x, self.level), &view)
    }

    fn kappa(&self) -> f64 {
        self.base.kappa()
    }

    fn structural_constant(&self) -> f64 {
        self.base.structural_constant()
    }
}

/// One explicit Euler-Maruyama step of the coupled N-particle system.
///
/// The empirical measure is the input ensemble's own, computed once before
/// any particle moves (explicit coupling). `noise` holds one increment
/// vector per particle, expected N(0, dt I) from the caller's seeded
/// streams; the update is deterministic given inputs.
pub fn em_step<M: MvsdeModel>(
    states: &[VectorState],
    model: &M,
    t: f64,
    dt: f64,
    noise: &[VectorState],
) -> Result<Vec<VectorState>> {
    assert!(dt > 0.0);
    assert_eq!(states.len(), noise.len());
    let view = MeasureView::new(states);
    let mut out = Vec::with_capacity(states.len());
    for (i, (x, dw)) in states.iter().zip(noise.iter()).enumerate() {
        let b = model.drift(t, x, &view);
        let s = model.diffusion_apply(t, x, &view, dw);
        let mut next = x.clone();
        for j in 0..next.len() {
            next[j] += b[j] * dt + s[j];
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                particle: i,
                time: t,
                energy: norm_sq(x),
            });
        }
        out.push(next);
    }
    Ok(out)
}

/// Time-gridded trajectories of a finite-dimensional particle ensemble.
#[derive(Debug, Clone)]
pub struct VectorPathEnsemble {
    pub times: Vec<f64>,
    /// `states[frame][particle]`
    pub states: Vec<Vec<VectorState>>,
}

impl VectorPathEnsemble {
    pub fn particles(&self) -> usize {
        self.states.first().map(|f| f.len()).unwrap_or(0)
    }
}

/// Gaussian increments for one step: one d-vector per particle, variance dt.
/// Stream layout: particle i draws from substream i, component c of step m
/// at counter m * d + c.
pub fn gaussian_increments(
    streams: &CounterStream,
    particles: usize,
    dim: usize,
    step: u64,
    dt: f64,
) -> Vec<VectorState> {
    let sqrt_dt = dt.sqrt();
    (0..particles)
        .map(|i| {
            let s = streams.substream(i as u64);
            (0..dim)
                .map(|c| sqrt_dt * s.normal(step * dim as u64 + c as u64))
                .collect()
        })
        .collect()
}

/// Drive the coupled system over [0, t_end] and record every `save_stride`-th
/// frame (plus the final one).
pub fn simulate<M: MvsdeModel>(
    model: &M,
    initial: Vec<VectorState>,
    t_end: f64,
    dt: f64,
    save_stride: usize,
    noise_streams: &CounterStream,
) -> Result<VectorPathEnsemble> {
    let steps = steps_for(t_end, dt)?;
    let dim = model.dim();
    let n = initial.len();
    let stride = save_stride.max(1);
    let mut states = initial;
    let mut times = vec![0.0];
    let mut frames = vec![states.clone()];
    for m in 0..steps {
        let t = m as f64 * dt;
        let noise = gaussian_increments(noise_streams, n, dim, m as u64, dt);
        states = em_step(&states, model, t, dt, &noise)?;
        if (m + 1) % stride == 0 || m + 1 == steps {
            times.push((m + 1) as f64 * dt);
            frames.push(states.clone());
        }
    }
    Ok(VectorPathEnsemble {
        times,
        states: frames,
    })
}

/// Number of steps covering [0, t_end]; dt must tile the horizon to within
/// one ulp.
pub fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(Error::config("t_end and dt must be positive"));
    }
    let steps = (t_end / dt).round();
    let err = (steps * dt - t_end).abs();
    let ulp = t_end * f64::EPSILON;
    if steps < 1.0 || err > ulp {
        return Err(Error::config(format!(
            "dt = {dt} does not tile t_end = {t_end} (residual {err:.3e})"
        )));
    }
    Ok(steps as usize)
}

/// Sup-in-time p-th moment and the dissipation quadrature
/// int (1/N) sum |X_t|^{p-2} N1(X_t) dt with N1(x) = |x|^2, by the
/// trapezoidal rule on the saved grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub sup_moment: f64,
    pub dissipation_integral: f64,
}

pub fn moment_monitor(path: &VectorPathEnsemble, p: f64) -> MomentReport {
    assert!(!path.states.is_empty(), "path must be nonempty");
    let ensemble_moment = |frame: &[VectorState], q: f64| -> f64 {
        if frame.is_empty() {
            return 0.0;
        }
        frame.iter().map(|s| norm(s).powf(q)).sum::<f64>() / frame.len() as f64
    };
    let mut sup = f64::MIN;
    for frame in &path.states {
        sup = sup.max(ensemble_moment(frame, p));
    }
    // integrand: |X|^{p-2} N1(X) with N1(x) = |x|^2, i.e. |X|^p
    let mut integral = 0.0;
    for (ts, fs) in path.times.windows(2).zip(path.states.windows(2)) {
        let h = ts[1] - ts[0];
        integral += 0.5 * h * (ensemble_moment(&fs[0], p) + ensemble_moment(&fs[1], p));
    }
    MomentReport {
        sup_moment: sup,
        dissipation_integral: integral,
    }
}

pub mod models;
