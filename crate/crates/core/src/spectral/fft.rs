//! Cached FFT plans and in-place 1D/2D complex transforms.
//!
//! Synthesis (coefficients -> grid values) uses the e^{+i 2 pi k j / n}
//! convention with no scaling; analysis (grid -> coefficients) divides by
//! the point count. Plans are cached globally behind a mutex; scratch
//! buffers are per call, so concurrent transforms on distinct data are
//! race-free.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            planner.plan_fft(n, dir)
        })
        .clone()
}

/// Grid values from spectral coefficients, in place (1D).
pub fn synthesize_1d(data: &mut [Complex64]) {
    let p = plan(data.len(), true);
    let mut scratch = vec![Complex64::default(); p.get_inplace_scratch_len()];
    p.process_with_scratch(data, &mut scratch);
}

/// Spectral coefficients from grid values, in place (1D), normalized by 1/n.
pub fn analyze_1d(data: &mut [Complex64]) {
    let n = data.len();
    let p = plan(n, false);
    let mut scratch = vec![Complex64::default(); p.get_inplace_scratch_len()];
    p.process_with_scratch(data, &mut scratch);
    let inv = 1.0 / n as f64;
    for v in data.iter_mut() {
        *v *= inv;
    }
}

fn transform_2d(data: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(data.len(), n * n, "2d transform expects an n x n grid");
    let p = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); p.get_inplace_scratch_len().max(n)];
    // rows
    for row in data.chunks_exact_mut(n) {
        p.process_with_scratch(row, &mut scratch);
    }
    // columns via gather/scatter
    let mut col = vec![Complex64::default(); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        p.process_with_scratch(&mut col, &mut scratch);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Grid values from spectral coefficients, in place (n x n grid).
pub fn synthesize_2d(data: &mut [Complex64], n: usize) {
    transform_2d(data, n, true);
}

/// Spectral coefficients from grid values, in place, normalized by 1/n^2.
pub fn analyze_2d(data: &mut [Complex64], n: usize) {
    transform_2d(data, n, false);
    let inv = 1.0 / (n * n) as f64;
    for v in data.iter_mut() {
        *v *= inv;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analysis_inverts_synthesis_1d() {
        let n = 24;
        let mut data = vec![Complex64::default(); n];
        data[1] = Complex64::new(0.5, -0.25);
        data[n - 1] = Complex64::new(0.5, 0.25);
        let orig = data.clone();
        synthesize_1d(&mut data);
        analyze_1d(&mut data);
        for (a, b) in data.iter().zip(orig.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_mode_synthesis_matches_cosine() {
        let n = 32;
        let mut data = vec![Complex64::default(); n];
        data[2] = Complex64::new(0.5, 0.0);
        data[n - 2] = Complex64::new(0.5, 0.0);
        synthesize_1d(&mut data);
        for (j, v) in data.iter().enumerate() {
            let x = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            assert!((v.re - (2.0 * x).cos()).abs() < 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn analysis_inverts_synthesis_2d() {
        let n = 12;
        let mut data = vec![Complex64::default(); n * n];
        data[3 * n + 5] = Complex64::new(1.0, 2.0);
        data[(n - 3) * n + (n - 5)] = Complex64::new(1.0, -2.0);
        let orig = data.clone();
        synthesize_2d(&mut data, n);
        analyze_2d(&mut data, n);
        for (a, b) in data.iter().zip(orig.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
