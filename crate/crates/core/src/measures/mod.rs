//! Empirical measures and exact Wasserstein-2 distances.
//!
//! Between two equal-size uniform empirical measures the optimal-transport
//! infimum is attained at a permutation, so W2 reduces to a minimum-cost
//! assignment over the matrix of squared distances, solved exactly. The
//! path-space distance uses the sup-in-time L2 metric discretized on the
//! saved grid.

pub mod assignment;

use crate::error::Error;
use crate::particles::{L2State, ParticleEnsemble, PathEnsemble};
use crate::rng::CounterRng;
use crate::Result;
use rayon::prelude::*;

/// N x N matrix of squared distances between two ensembles, row-major;
/// entry (i, j) is the squared metric between particle i of the first and
/// particle j of the second.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::dim("cost matrix must be n x n"));
        }
        Ok(CostMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn build(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let entries: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        CostMatrix { n, entries }
    }
}

/// Metric used when comparing trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMetric {
    /// squared L2 distance of the states at one saved frame
    StateL2At(usize),
    /// squared sup-in-time L2 distance over the shared grid
    PathSupL2,
}

/// Squared-distance matrix between two equal-size state ensembles.
pub fn pairwise_cost_states<S: L2State>(
    a: &ParticleEnsemble<S>,
    b: &ParticleEnsemble<S>,
) -> Result<CostMatrix> {
    if a.len() != b.len() {
        return Err(Error::dim(format!(
            "equal-size ensembles required, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (sa, sb) = (a.states(), b.states());
    Ok(CostMatrix::build(a.len(), |i, j| {
        sa[i].l2_distance_sq(&sb[j])
    }))
}

/// Squared-distance matrix between two equal-size path ensembles.
pub fn pairwise_cost_paths<S: L2State>(
    a: &PathEnsemble<S>,
    b: &PathEnsemble<S>,
    metric: PathMetric,
) -> Result<CostMatrix> {
    if a.particles() != b.particles() {
        return Err(Error::dim(format!(
            "equal-size ensembles required, got {} and {}",
            a.particles(),
            b.particles()
        )));
    }
    if a.times() != b.times() {
        return Err(Error::dim("path ensembles live on different grids"));
    }
    let n = a.particles();
    match metric {
        PathMetric::StateL2At(frame) => {
            if frame >= a.times().len() {
                return Err(Error::dim("frame index out of range"));
            }
            let (fa, fb) = (&a.frames()[frame], &b.frames()[frame]);
            Ok(CostMatrix::build(n, |i, j| fa[i].l2_distance_sq(&fb[j])))
        }
        PathMetric::PathSupL2 => Ok(CostMatrix::build(n, |i, j| {
            let mut worst = 0.0f64;
            for (fa, fb) in a.frames().iter().zip(b.frames().iter()) {
                worst = worst.max(fa[i].l2_distance_sq(&fb[j]));
            }
            worst
        })),
    }
}

/// Exact Wasserstein-2 distance between the equal-weight empirical measures
/// behind a squared-distance matrix: sqrt of the optimal assignment value
/// divided by N.
pub fn wasserstein2(cost: &CostMatrix) -> f64 {
    let (_, total) = assignment::solve(cost.entries(), cost.n());
    (total / cost.n() as f64).max(0.0).sqrt()
}

/// W2 between two state ensembles.
pub fn wasserstein2_states<S: L2State>(
    a: &ParticleEnsemble<S>,
    b: &ParticleEnsemble<S>,
) -> Result<f64> {
    Ok(wasserstein2(&pairwise_cost_states(a, b)?))
}

/// W2 between two path ensembles under the sup-in-time metric.
pub fn wasserstein2_paths<S: L2State>(
    a: &PathEnsemble<S>,
    b: &PathEnsemble<S>,
) -> Result<f64> {
    Ok(wasserstein2(&pairwise_cost_paths(a, b, PathMetric::PathSupL2)?))
}

/// Draw `count` distinct indices from 0..n (partial Fisher-Yates on a
/// seeded counter stream).
fn subsample_indices(n: usize, count: usize, rng: &mut CounterRng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = i + rng.below((n - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(count);
    idx
}

/// The chaos-decay statistic: squared W2 (sup-in-time metric) between the
/// system's empirical path measure and the surrogate limit law, both
/// restricted to `subsample` particles drawn without replacement. The
/// Monte-Carlo average over seeds is the caller's.
pub fn chaos_statistic<S: L2State>(
    system: &PathEnsemble<S>,
    reference: &PathEnsemble<S>,
    subsample: usize,
    seed: u64,
) -> Result<f64> {
    if subsample == 0 || subsample > system.particles() || subsample > reference.particles() {
        return Err(Error::dim(format!(
            "subsample {subsample} exceeds ensemble sizes {} / {}",
            system.particles(),
            reference.particles()
        )));
    }
    let mut rng = CounterRng::new(seed, 0x7375_6273);
    let sys_idx = if subsample == system.particles() {
        (0..subsample).collect::<Vec<_>>()
    } else {
        subsample_indices(system.particles(), subsample, &mut rng)
    };
    let ref_idx = if subsample == reference.particles() {
        (0..subsample).collect::<Vec<_>>()
    } else {
        subsample_indices(reference.particles(), subsample, &mut rng)
    };
    let sys = system.select_particles(&sys_idx)?;
    let rf = reference.select_particles(&ref_idx)?;
    let w = wasserstein2_paths(&sys, &rf)?;
    Ok(w * w)
}
