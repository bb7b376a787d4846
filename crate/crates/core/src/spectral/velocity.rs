//! Divergence-free velocity fields on the 2D torus.
//!
//! A velocity field is stored by its transverse amplitude w(k): the Fourier
//! coefficient is materialized as
//!
//! ```text
//! u_hat(k) = (-ky, kx) * w(k),   u_hat(0) = 0,
//! ```
//!
//! so every instance is incompressible by construction. Per mode, the
//! amplitude drops just enough low mantissa bits that its products with the
//! integer wavenumbers are exact; the two terms of the discrete divergence
//! kx*ux + ky*uy are then single roundings of the same real number and
//! cancel to exactly 0.0, and recovering w through |k|^2 is lossless, which
//! is what makes the Leray projection bit-exactly idempotent. Reality
//! w(-k) = -conj(w(k)) makes the materialized field real-valued.

use super::fft;
use super::{
    dealias_grid, index_of_mode, mode_of_index, quantize_mantissa, side, transverse_drop_bits,
    wavenumber_scale, wrap, MAX_MODES,
};
use crate::error::Error;
use crate::rng::CounterStream;
use crate::Result;
use num_complex::Complex64;

/// An unconstrained vector-valued Fourier field, the input of the Leray
/// projection and the carrier of intermediate nonlinear terms.
#[derive(Debug, Clone)]
pub struct RawVectorField {
    modes: usize,
    domain_size: f64,
    coeffs: Vec<[Complex64; 2]>,
}

impl RawVectorField {
    pub fn zero(modes: usize, domain_size: f64) -> Self {
        let s = side(modes);
        RawVectorField {
            modes,
            domain_size,
            coeffs: vec![[Complex64::default(); 2]; s * s],
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn domain_size(&self) -> f64 {
        self.domain_size
    }

    pub fn coeff(&self, kx: i64, ky: i64) -> [Complex64; 2] {
        self.coeffs[index_of_mode(kx, ky, self.modes)]
    }

    pub fn set_coeff(&mut self, kx: i64, ky: i64, value: [Complex64; 2]) {
        self.coeffs[index_of_mode(kx, ky, self.modes)] = value;
    }

    /// Set a conjugate pair at +-k in one call, keeping the field real.
    pub fn set_mode_pair(&mut self, kx: i64, ky: i64, value: [Complex64; 2]) {
        self.set_coeff(kx, ky, value);
        if kx != 0 || ky != 0 {
            self.set_coeff(-kx, -ky, [value[0].conj(), value[1].conj()]);
        }
    }

    /// Whether coefficients satisfy the reality condition exactly.
    pub fn is_reality_symmetric(&self) -> bool {
        let m = self.modes as i64;
        for kx in -m..=m {
            for ky in -m..=m {
                let a = self.coeff(kx, ky);
                let b = self.coeff(-kx, -ky);
                if a[0] != b[0].conj() || a[1] != b[1].conj() {
                    return false;
                }
            }
        }
        true
    }
}

/// Divergence-free 2D velocity as truncated Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVelocityField {
    modes: usize,
    domain_size: f64,
    transverse: Vec<Complex64>,
}

impl SpectralVelocityField {
    pub fn zero(modes: usize, domain_size: f64) -> Self {
        assert!(
            modes >= 1 && modes <= MAX_MODES,
            "modes_per_axis must be in 1..={MAX_MODES}"
        );
        assert!(domain_size > 0.0);
        let s = side(modes);
        SpectralVelocityField {
            modes,
            domain_size,
            transverse: vec![Complex64::default(); s * s],
        }
    }

    /// Build from a transverse-amplitude generator evaluated on the canonical
    /// half lattice (kx > 0, or kx == 0 and ky > 0); the conjugate half is
    /// mirrored so the materialized field is real.
    pub fn from_half_plane(
        modes: usize,
        domain_size: f64,
        mut f: impl FnMut(i64, i64) -> Complex64,
    ) -> Self {
        let mut field = Self::zero(modes, domain_size);
        let m = modes as i64;
        for kx in 0..=m {
            for ky in -m..=m {
                if kx == 0 && ky <= 0 {
                    continue;
                }
                let w = quantize_mode(f(kx, ky), kx, ky);
                field.transverse[index_of_mode(kx, ky, modes)] = w;
                field.transverse[index_of_mode(-kx, -ky, modes)] = -w.conj();
            }
        }
        field
    }

    /// Random divergence-free field with coefficient magnitude decaying like
    /// |k|^-decay (in velocity amplitude), complex Gaussian per mode.
    pub fn random(
        modes: usize,
        domain_size: f64,
        decay: f64,
        amplitude: f64,
        stream: &CounterStream,
    ) -> Self {
        let m = modes as i64;
        Self::from_half_plane(modes, domain_size, |kx, ky| {
            let idx = ((kx + m) * (2 * m + 1) + (ky + m)) as u64;
            let (a, b) = stream.normal_pair(idx);
            let k2 = (kx * kx + ky * ky) as f64;
            // |u_hat| = |k| |w|: shift the exponent by one so the velocity
            // coefficient decays at the requested rate
            let mag = amplitude * k2.sqrt().powf(-(decay + 1.0)) * 0.5f64.sqrt();
            Complex64::new(a * mag, b * mag)
        })
    }

    /// Restriction (or zero-padded extension) to a different mode count.
    pub fn with_modes(&self, modes: usize) -> Self {
        let mut out = Self::zero(modes, self.domain_size);
        let keep = self.modes.min(modes) as i64;
        for kx in -keep..=keep {
            for ky in -keep..=keep {
                out.transverse[index_of_mode(kx, ky, modes)] =
                    self.transverse[index_of_mode(kx, ky, self.modes)];
            }
        }
        out
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn domain_size(&self) -> f64 {
        self.domain_size
    }

    pub fn transverse(&self) -> &[Complex64] {
        &self.transverse
    }

    /// Rebuild from stored transverse amplitudes (snapshot loading). The
    /// amplitudes must already satisfy the reality condition.
    pub fn from_transverse(
        modes: usize,
        domain_size: f64,
        transverse: Vec<Complex64>,
    ) -> Result<Self> {
        let s = side(modes);
        if transverse.len() != s * s {
            return Err(Error::dim(format!(
                "expected {} transverse amplitudes, got {}",
                s * s,
                transverse.len()
            )));
        }
        let field = SpectralVelocityField {
            modes,
            domain_size,
            transverse,
        };
        let m = modes as i64;
        for kx in -m..=m {
            for ky in -m..=m {
                let w = field.transverse[index_of_mode(kx, ky, modes)];
                let wm = field.transverse[index_of_mode(-kx, -ky, modes)];
                if (kx == 0 && ky == 0 && w != Complex64::default())
                    || wm != -w.conj()
                    || w != quantize_mode(w, kx, ky)
                {
                    return Err(Error::config(
                        "transverse amplitudes violate field invariants",
                    ));
                }
            }
        }
        Ok(field)
    }

    /// Materialized Fourier coefficient of mode k.
    #[inline]
    pub fn coeff(&self, kx: i64, ky: i64) -> [Complex64; 2] {
        let w = self.transverse[index_of_mode(kx, ky, self.modes)];
        materialize(kx, ky, w)
    }

    /// Discrete divergence k . u_hat(k), as computed (exactly zero).
    pub fn divergence_at(&self, kx: i64, ky: i64) -> Complex64 {
        let c = self.coeff(kx, ky);
        c[0] * kx as f64 + c[1] * ky as f64
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale_mut(factor);
        out
    }

    pub fn scale_mut(&mut self, factor: f64) {
        let m = self.modes;
        for (idx, w) in self.transverse.iter_mut().enumerate() {
            let (kx, ky) = mode_of_index(idx, m);
            *w = quantize_mode(*w * factor, kx, ky);
        }
    }

    /// self += factor * other.
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        debug_assert_eq!(self.modes, other.modes);
        let m = self.modes;
        for (idx, (w, o)) in self
            .transverse
            .iter_mut()
            .zip(other.transverse.iter())
            .enumerate()
        {
            let (kx, ky) = mode_of_index(idx, m);
            *w = quantize_mode(*w + factor * *o, kx, ky);
        }
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes || self.domain_size != other.domain_size {
            return Err(Error::dim(format!(
                "velocity grids differ: ({}, {}) vs ({}, {})",
                self.modes, self.domain_size, other.modes, other.domain_size
            )));
        }
        Ok(())
    }

    /// Parseval pairing of Sobolev order `order`:
    /// L^2 sum_k ((2 pi / L)^2 |k|^2)^order Re(u_hat . conj(v_hat)).
    /// Order 0 is the L2 inner product, order 1 the gradient pairing; order
    /// -1 is well defined because the mean mode carries no energy.
    pub fn inner_product(&self, other: &Self, order: i32) -> Result<f64> {
        self.check_grid(other)?;
        let s2 = wavenumber_scale(self.domain_size).powi(2);
        let vol = self.domain_size * self.domain_size;
        let mut sum = CompensatedSum::new();
        for (idx, (wu, wv)) in self
            .transverse
            .iter()
            .zip(other.transverse.iter())
            .enumerate()
        {
            let (kx, ky) = mode_of_index(idx, self.modes);
            let k2 = (kx * kx + ky * ky) as f64;
            if k2 == 0.0 {
                continue;
            }
            // Re(u_hat . conj(v_hat)) = |k|^2 Re(w_u conj(w_v))
            let re = wu.re * wv.re + wu.im * wv.im;
            sum.add((s2 * k2).powi(order) * k2 * re);
        }
        Ok(vol * sum.value())
    }

    /// Squared Sobolev norm of the given order.
    pub fn norm_sq(&self, order: i32) -> f64 {
        self.inner_product(self, order).expect("same grid")
    }

    pub fn sobolev_norm(&self, order: i32) -> SobolevNorm {
        SobolevNorm {
            order,
            value: self.norm_sq(order).max(0.0).sqrt(),
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.norm_sq(0)
    }

    /// ||self - other||_{L^2}^2, tolerant of differing mode counts (missing
    /// modes count as zero). Compensated summation keeps entries
    /// reproducible at the 1e-13 level.
    pub fn l2_distance_sq(&self, other: &Self) -> f64 {
        let vol = self.domain_size * self.domain_size;
        let big = self.modes.max(other.modes) as i64;
        let mut sum = CompensatedSum::new();
        for kx in -big..=big {
            for ky in -big..=big {
                // |u_hat - v_hat|^2 = |k|^2 |w_u - w_v|^2
                let k2 = (kx * kx + ky * ky) as f64;
                if k2 == 0.0 {
                    continue;
                }
                let d = self.transverse_at(kx, ky) - other.transverse_at(kx, ky);
                sum.add(k2 * (d.re * d.re + d.im * d.im));
            }
        }
        vol * sum.value()
    }

    #[inline]
    fn transverse_at(&self, kx: i64, ky: i64) -> Complex64 {
        let m = self.modes as i64;
        if kx.abs() > m || ky.abs() > m {
            Complex64::default()
        } else {
            self.transverse[index_of_mode(kx, ky, self.modes)]
        }
    }

    /// One semi-implicit update in coefficient space:
    /// w' = (w + dt explicit_w + noise_w) / (1 + dt nu (2 pi / L)^2 |k|^2),
    /// the Stokes term implicit, everything else explicit.
    pub fn imex_combine(&self, explicit: &Self, noise: &Self, dt: f64, viscosity: f64) -> Self {
        let s2 = wavenumber_scale(self.domain_size).powi(2);
        let mut out = self.clone();
        for (idx, w) in out.transverse.iter_mut().enumerate() {
            let (kx, ky) = mode_of_index(idx, self.modes);
            let k2 = (kx * kx + ky * ky) as f64;
            let num = *w + dt * explicit.transverse[idx] + noise.transverse[idx];
            *w = quantize_mode(num / (1.0 + dt * viscosity * s2 * k2), kx, ky);
        }
        out
    }

    /// Stokes operator: per-mode multiplication by -(2 pi / L)^2 |k|^2.
    /// Equals the Laplacian composed with the Leray projection, which is a
    /// no-op on this representation.
    pub fn stokes_apply(&self) -> Self {
        let s2 = wavenumber_scale(self.domain_size).powi(2);
        let mut out = self.clone();
        for (idx, w) in out.transverse.iter_mut().enumerate() {
            let (kx, ky) = mode_of_index(idx, self.modes);
            let k2 = (kx * kx + ky * ky) as f64;
            *w = quantize_mode(*w * (-s2 * k2), kx, ky);
        }
        out
    }

    /// Physical-space samples of both components on an ng x ng grid.
    pub fn synthesize(&self, ng: usize) -> [Vec<Complex64>; 2] {
        assert!(ng > 2 * self.modes, "grid too small for retained modes");
        let m = self.modes as i64;
        let mut u1 = vec![Complex64::default(); ng * ng];
        let mut u2 = vec![Complex64::default(); ng * ng];
        for kx in -m..=m {
            for ky in -m..=m {
                let c = self.coeff(kx, ky);
                let pos = wrap(kx, ng) * ng + wrap(ky, ng);
                u1[pos] = c[0];
                u2[pos] = c[1];
            }
        }
        fft::synthesize_2d(&mut u1, ng);
        fft::synthesize_2d(&mut u2, ng);
        [u1, u2]
    }

    /// Largest imaginary residue of the materialized physical field relative
    /// to the field norm; a reality-symmetry diagnostic.
    pub fn reality_residue(&self) -> f64 {
        let ng = dealias_grid(self.modes, 1);
        let [u1, u2] = self.synthesize(ng);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for v in u1.iter().chain(u2.iter()) {
            worst = worst.max(v.im.abs());
            scale = scale.max(v.re.abs());
        }
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }
}

/// Sobolev norm value tagged with its order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorm {
    pub order: i32,
    pub value: f64,
}

#[inline]
fn quantize_mode(z: Complex64, kx: i64, ky: i64) -> Complex64 {
    let drop = transverse_drop_bits(kx, ky);
    Complex64::new(
        quantize_mantissa(z.re, drop),
        quantize_mantissa(z.im, drop),
    )
}

/// Materialize u_hat(k) from a transverse amplitude, with exact signed
/// zeros on the axes so axis modes keep bit-clean components.
#[inline]
fn materialize(kx: i64, ky: i64, w: Complex64) -> [Complex64; 2] {
    let ux = if ky == 0 {
        Complex64::default()
    } else {
        w * (-ky as f64)
    };
    let uy = if kx == 0 {
        Complex64::default()
    } else {
        w * (kx as f64)
    };
    [ux, uy]
}

/// Leray-Helmholtz projection of a raw vector field: per mode k != 0 the
/// coefficient becomes u_hat - k (k . u_hat) / |k|^2, the mean mode is
/// zeroed. Modes whose computed divergence is exactly 0.0 are kept
/// untouched, which makes the projection bit-exactly idempotent.
pub fn leray_project(raw: &RawVectorField) -> SpectralVelocityField {
    let modes = raw.modes();
    let mut out = SpectralVelocityField::zero(modes, raw.domain_size());
    let m = modes as i64;
    for kx in -m..=m {
        for ky in -m..=m {
            if kx == 0 && ky == 0 {
                continue;
            }
            let [ux, uy] = raw.coeff(kx, ky);
            let k2 = (kx * kx + ky * ky) as f64;
            // transverse amplitude: u_hat = (-ky, kx) w  =>  |k|^2 w = -ky ux + kx uy;
            // for fields already in materialized form the recovery is exact
            let w = (ux * (-ky as f64) + uy * kx as f64) / k2;
            out.transverse[index_of_mode(kx, ky, modes)] = quantize_mode(w, kx, ky);
        }
    }
    out
}

/// Projected convection term B(u, v) = P[(u . grad) v], evaluated
/// pseudospectrally in conservative form div(u (x) v) (identical to the
/// advective form because u is exactly divergence-free), with dealiasing on
/// a grid of at least 3M + 1 points and the result truncated to the
/// retained mode square.
pub fn bilinear(u: &SpectralVelocityField, v: &SpectralVelocityField) -> Result<SpectralVelocityField> {
    u.check_grid(v)?;
    let m = u.modes();
    let ng = dealias_grid(m, 2);
    let [u1, u2] = u.synthesize(ng);
    let same = std::ptr::eq(u, v);
    let [v1, v2] = if same {
        [u1.clone(), u2.clone()]
    } else {
        v.synthesize(ng)
    };

    // pointwise tensor products on the padded grid, real parts only
    let mut t11 = vec![Complex64::default(); ng * ng];
    let mut t12 = vec![Complex64::default(); ng * ng];
    let mut t21 = vec![Complex64::default(); ng * ng];
    let mut t22 = vec![Complex64::default(); ng * ng];
    for i in 0..ng * ng {
        let (a1, a2) = (u1[i].re, u2[i].re);
        let (b1, b2) = (v1[i].re, v2[i].re);
        t11[i] = Complex64::new(a1 * b1, 0.0);
        t12[i] = Complex64::new(a1 * b2, 0.0);
        t21[i] = Complex64::new(a2 * b1, 0.0);
        t22[i] = Complex64::new(a2 * b2, 0.0);
    }
    fft::analyze_2d(&mut t11, ng);
    fft::analyze_2d(&mut t12, ng);
    fft::analyze_2d(&mut t21, ng);
    fft::analyze_2d(&mut t22, ng);

    let s = wavenumber_scale(u.domain_size());
    let mi = m as i64;
    let mut raw = RawVectorField::zero(m, u.domain_size());
    let grab = |t: &Vec<Complex64>, kx: i64, ky: i64| -> Complex64 {
        // symmetrized read: exact reality for the product coefficients
        let a = t[wrap(kx, ng) * ng + wrap(ky, ng)];
        let b = t[wrap(-kx, ng) * ng + wrap(-ky, ng)];
        0.5 * (a + b.conj())
    };
    for kx in -mi..=mi {
        for ky in -mi..=mi {
            if kx == 0 && ky == 0 {
                continue;
            }
            let ik = Complex64::new(0.0, s);
            let b1 = ik * (grab(&t11, kx, ky) * kx as f64 + grab(&t21, kx, ky) * ky as f64);
            let b2 = ik * (grab(&t12, kx, ky) * kx as f64 + grab(&t22, kx, ky) * ky as f64);
            raw.set_coeff(kx, ky, [b1, b2]);
        }
    }
    Ok(leray_project(&raw))
}

/// Streaming compensated (Neumaier) summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
