//! Periodic scalar fields (Cahn-Hilliard / Kuramoto-Sivashinsky state) in
//! one or two dimensions, with per-mode differential symbols and dealiased
//! pointwise nonlinearities.

use super::fft;
use super::{dealias_grid, quantize_mantissa, side, wavenumber_scale, wrap, MAX_MODES};
use crate::error::Error;
use crate::rng::CounterStream;
use crate::Result;
use num_complex::Complex64;

/// Spatial dimension of a scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ScalarDim {
    One,
    Two,
}

/// Differential operators acting mode-by-mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarOp {
    /// symbol -|k|^2
    Laplacian,
    /// symbol |k|^4
    Bilaplacian,
    /// symbol i k (1D only)
    Dx,
    /// symbol -k^2 (1D only)
    Dx2,
    /// symbol k^4 (1D only)
    Dx4,
}

/// Polynomial nonlinearity phi(x) = sum_i coeffs[i] x^i.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhiPolynomial {
    coeffs: Vec<f64>,
}

impl PhiPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        PhiPolynomial { coeffs }
    }

    /// The derivative of the double-well potential: phi(x) = x^3 - x.
    pub fn double_well() -> Self {
        PhiPolynomial::new(vec![0.0, -1.0, 0.0, 1.0])
    }

    pub fn identity() -> Self {
        PhiPolynomial::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != 0.0)
            .unwrap_or(0)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Largest admissible degree for the growth bound in dimension `dim`:
    /// p <= (d + 4) / d, except 1D fourth-order models admit p <= 5.
    pub fn max_degree(dim: ScalarDim) -> usize {
        match dim {
            ScalarDim::One => 5,
            ScalarDim::Two => 3,
        }
    }

    pub fn check_degree(&self, dim: ScalarDim) -> Result<()> {
        let p = self.degree();
        if p > Self::max_degree(dim) {
            return Err(Error::config(format!(
                "phi degree {p} exceeds the bound {} for this dimension",
                Self::max_degree(dim)
            )));
        }
        Ok(())
    }
}

/// Periodic scalar field as truncated Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpectralField {
    modes: usize,
    dim: ScalarDim,
    domain_size: f64,
    coeffs: Vec<Complex64>,
}

impl ScalarSpectralField {
    pub fn zero(modes: usize, dim: ScalarDim, domain_size: f64) -> Self {
        assert!(modes >= 1 && modes <= MAX_MODES);
        assert!(domain_size > 0.0);
        let len = match dim {
            ScalarDim::One => side(modes),
            ScalarDim::Two => side(modes) * side(modes),
        };
        ScalarSpectralField {
            modes,
            dim,
            domain_size,
            coeffs: vec![Complex64::default(); len],
        }
    }

    /// Build from a generator on the canonical half lattice; the conjugate
    /// half is mirrored so the field is real. The mean mode is `mean`.
    pub fn from_half_plane(
        modes: usize,
        dim: ScalarDim,
        domain_size: f64,
        mean: f64,
        mut f: impl FnMut(i64, i64) -> Complex64,
    ) -> Self {
        let mut field = Self::zero(modes, dim, domain_size);
        let m = modes as i64;
        match dim {
            ScalarDim::One => {
                for k in 1..=m {
                    let c = f(k, 0);
                    field.coeffs[(k + m) as usize] = c;
                    field.coeffs[(-k + m) as usize] = c.conj();
                }
            }
            ScalarDim::Two => {
                let s = side(modes) as i64;
                for kx in 0..=m {
                    for ky in -m..=m {
                        if kx == 0 && ky <= 0 {
                            continue;
                        }
                        let c = f(kx, ky);
                        field.coeffs[((kx + m) * s + (ky + m)) as usize] = c;
                        field.coeffs[((-kx + m) * s + (-ky + m)) as usize] = c.conj();
                    }
                }
            }
        }
        *field.coeff_mut(0, 0) = Complex64::new(mean, 0.0);
        field
    }

    /// Random real field with Gaussian modes of magnitude |k|^-decay.
    pub fn random(
        modes: usize,
        dim: ScalarDim,
        domain_size: f64,
        decay: f64,
        amplitude: f64,
        stream: &CounterStream,
    ) -> Self {
        let m = modes as i64;
        Self::from_half_plane(modes, dim, domain_size, 0.0, |kx, ky| {
            let idx = ((kx + m) * (2 * m + 1) + (ky + m)) as u64;
            let (a, b) = stream.normal_pair(idx);
            let k2 = (kx * kx + ky * ky) as f64;
            let mag = amplitude * k2.sqrt().powf(-decay) * 0.5f64.sqrt();
            Complex64::new(a * mag, b * mag)
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> ScalarDim {
        self.dim
    }

    pub fn domain_size(&self) -> f64 {
        self.domain_size
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn from_coeffs(
        modes: usize,
        dim: ScalarDim,
        domain_size: f64,
        coeffs: Vec<Complex64>,
    ) -> Result<Self> {
        let expected = match dim {
            ScalarDim::One => side(modes),
            ScalarDim::Two => side(modes) * side(modes),
        };
        if coeffs.len() != expected {
            return Err(Error::dim(format!(
                "expected {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        let field = ScalarSpectralField {
            modes,
            dim,
            domain_size,
            coeffs,
        };
        for (kx, ky) in field.lattice() {
            if field.coeff(kx, ky) != field.coeff(-kx, -ky).conj() {
                return Err(Error::config("coefficients violate the reality condition"));
            }
        }
        Ok(field)
    }

    fn index_of(&self, kx: i64, ky: i64) -> usize {
        let m = self.modes as i64;
        match self.dim {
            ScalarDim::One => {
                debug_assert_eq!(ky, 0);
                (kx + m) as usize
            }
            ScalarDim::Two => ((kx + m) * side(self.modes) as i64 + (ky + m)) as usize,
        }
    }

    /// All retained modes as (kx, ky); 1D uses ky = 0.
    pub fn lattice(&self) -> Vec<(i64, i64)> {
        let m = self.modes as i64;
        match self.dim {
            ScalarDim::One => (-m..=m).map(|k| (k, 0)).collect(),
            ScalarDim::Two => {
                let mut v = Vec::with_capacity(side(self.modes) * side(self.modes));
                for kx in -m..=m {
                    for ky in -m..=m {
                        v.push((kx, ky));
                    }
                }
                v
            }
        }
    }

    pub fn coeff(&self, kx: i64, ky: i64) -> Complex64 {
        self.coeffs[self.index_of(kx, ky)]
    }

    pub fn coeff_mut(&mut self, kx: i64, ky: i64) -> &mut Complex64 {
        let i = self.index_of(kx, ky);
        &mut self.coeffs[i]
    }

    /// Set a conjugate pair at +-k.
    pub fn set_mode_pair(&mut self, kx: i64, ky: i64, value: Complex64) {
        *self.coeff_mut(kx, ky) = value;
        if kx != 0 || ky != 0 {
            *self.coeff_mut(-kx, -ky) = value.conj();
        }
    }

    /// Mean value of the field (the zero-mode coefficient).
    pub fn mean(&self) -> f64 {
        self.coeff(0, 0).re
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes
            || self.dim != other.dim
            || self.domain_size != other.domain_size
        {
            return Err(Error::dim("scalar grids differ".to_string()));
        }
        Ok(())
    }

    pub fn scale_mut(&mut self, factor: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= factor;
        }
    }

    pub fn axpy(&mut self, factor: f64, other: &Self) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (c, o) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += factor * *o;
        }
    }

    /// Restriction (or zero-padded extension) to a different mode count.
    pub fn with_modes(&self, modes: usize) -> Self {
        let mut out = Self::zero(modes, self.dim, self.domain_size);
        let keep = self.modes.min(modes) as i64;
        match self.dim {
            ScalarDim::One => {
                for k in -keep..=keep {
                    *out.coeff_mut(k, 0) = self.coeff(k, 0);
                }
            }
            ScalarDim::Two => {
                for kx in -keep..=keep {
                    for ky in -keep..=keep {
                        *out.coeff_mut(kx, ky) = self.coeff(kx, ky);
                    }
                }
            }
        }
        out
    }

    /// Per-mode differential operator.
    pub fn apply_op(&self, op: ScalarOp) -> Result<Self> {
        if self.dim == ScalarDim::Two
            && matches!(op, ScalarOp::Dx | ScalarOp::Dx2 | ScalarOp::Dx4)
        {
            return Err(Error::UnsupportedOp(format!(
                "{op:?} requires a one-dimensional field"
            )));
        }
        let s = wavenumber_scale(self.domain_size);
        let mut out = self.clone();
        for (kx, ky) in self.lattice() {
            let k2 = ((kx * kx + ky * ky) as f64) * s * s;
            let sym = match op {
                ScalarOp::Laplacian => Complex64::new(-k2, 0.0),
                ScalarOp::Bilaplacian => Complex64::new(k2 * k2, 0.0),
                ScalarOp::Dx => Complex64::new(0.0, kx as f64 * s),
                ScalarOp::Dx2 => Complex64::new(-k2, 0.0),
                ScalarOp::Dx4 => Complex64::new(k2 * k2, 0.0),
            };
            *out.coeff_mut(kx, ky) = self.coeff(kx, ky) * sym;
        }
        Ok(out)
    }

    /// Physical samples on a grid with `ng` points per axis.
    pub fn synthesize(&self, ng: usize) -> Vec<Complex64> {
        assert!(ng > 2 * self.modes);
        match self.dim {
            ScalarDim::One => {
                let m = self.modes as i64;
                let mut data = vec![Complex64::default(); ng];
                for k in -m..=m {
                    data[wrap(k, ng)] = self.coeff(k, 0);
                }
                fft::synthesize_1d(&mut data);
                data
            }
            ScalarDim::Two => {
                let m = self.modes as i64;
                let mut data = vec![Complex64::default(); ng * ng];
                for kx in -m..=m {
                    for ky in -m..=m {
                        data[wrap(kx, ng) * ng + wrap(ky, ng)] = self.coeff(kx, ky);
                    }
                }
                fft::synthesize_2d(&mut data, ng);
                data
            }
        }
    }

    fn analyze_into(&self, grid: &mut Vec<Complex64>, ng: usize) -> Self {
        match self.dim {
            ScalarDim::One => fft::analyze_1d(grid),
            ScalarDim::Two => fft::analyze_2d(grid, ng),
        }
        let mut out = Self::zero(self.modes, self.dim, self.domain_size);
        let read = |kx: i64, ky: i64| -> Complex64 {
            let a = match self.dim {
                ScalarDim::One => grid[wrap(kx, ng)],
                ScalarDim::Two => grid[wrap(kx, ng) * ng + wrap(ky, ng)],
            };
            let b = match self.dim {
                ScalarDim::One => grid[wrap(-kx, ng)],
                ScalarDim::Two => grid[wrap(-kx, ng) * ng + wrap(-ky, ng)],
            };
            // exact reality symmetrization
            0.5 * (a + b.conj())
        };
        for (kx, ky) in out.lattice() {
            *out.coeff_mut(kx, ky) = read(kx, ky);
        }
        out
    }

    /// Pointwise polynomial nonlinearity, evaluated on a grid padded for the
    /// polynomial degree and truncated back to the retained modes.
    pub fn nonlinearity_phi(&self, phi: &PhiPolynomial) -> Result<Self> {
        phi.check_degree(self.dim)?;
        let p = phi.degree().max(1);
        let ng = dealias_grid(self.modes, p);
        let mut grid = self.synthesize(ng);
        for v in grid.iter_mut() {
            *v = Complex64::new(phi.eval(v.re), 0.0);
        }
        Ok(self.analyze_into(&mut grid, ng))
    }

    /// The advection term u u_x of the 1D fourth-order models, computed in
    /// conservative form (u^2 / 2)_x with quadratic dealiasing.
    pub fn self_advection_1d(&self) -> Result<Self> {
        if self.dim != ScalarDim::One {
            return Err(Error::UnsupportedOp(
                "self-advection is defined for 1D fields".to_string(),
            ));
        }
        let ng = dealias_grid(self.modes, 2);
        let mut grid = self.synthesize(ng);
        for v in grid.iter_mut() {
            *v = Complex64::new(0.5 * v.re * v.re, 0.0);
        }
        let half_sq = self.analyze_into(&mut grid, ng);
        half_sq.apply_op(ScalarOp::Dx)
    }

    /// One semi-implicit update with the bilaplacian implicit:
    /// c' = (c + dt explicit + noise) / (1 + dt (2 pi / L)^4 |k|^4).
    pub fn imex_combine_fourth_order(&self, explicit: &Self, noise: &Self, dt: f64) -> Self {
        let s2 = wavenumber_scale(self.domain_size).powi(2);
        let mut out = self.clone();
        for (kx, ky) in self.lattice() {
            let k2 = ((kx * kx + ky * ky) as f64) * s2;
            let num = self.coeff(kx, ky) + dt * explicit.coeff(kx, ky) + noise.coeff(kx, ky);
            *out.coeff_mut(kx, ky) = num / (1.0 + dt * k2 * k2);
        }
        out
    }

    /// Parseval pairing of Sobolev order `order`; order -1 restricts to the
    /// mean-free part.
    pub fn inner_product(&self, other: &Self, order: i32) -> Result<f64> {
        self.check_grid(other)?;
        let s2 = wavenumber_scale(self.domain_size).powi(2);
        let vol = match self.dim {
            ScalarDim::One => self.domain_size,
            ScalarDim::Two => self.domain_size * self.domain_size,
        };
        let mut sum = crate::spectral::velocity::CompensatedSum::new();
        for (kx, ky) in self.lattice() {
            let k2 = (kx * kx + ky * ky) as f64;
            let a = self.coeff(kx, ky);
            let b = other.coeff(kx, ky);
            let re = a.re * b.re + a.im * b.im;
            let weight = if k2 == 0.0 {
                if order == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (s2 * k2).powi(order)
            };
            sum.add(weight * re);
        }
        Ok(vol * sum.value())
    }

    pub fn norm_sq(&self, order: i32) -> f64 {
        self.inner_product(self, order).expect("same grid")
    }

    pub fn sobolev_norm(&self, order: i32) -> crate::spectral::SobolevNorm {
        crate::spectral::SobolevNorm {
            order,
            value: self.norm_sq(order).max(0.0).sqrt(),
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.norm_sq(0)
    }

    pub fn l2_distance_sq(&self, other: &Self) -> f64 {
        let vol = match self.dim {
            ScalarDim::One => self.domain_size,
            ScalarDim::Two => self.domain_size * self.domain_size,
        };
        let big = self.modes.max(other.modes);
        let probe = if self.modes >= other.modes { self } else { other };
        let mut sum = crate::spectral::velocity::CompensatedSum::new();
        for (kx, ky) in probe.lattice() {
            let _ = big;
            let a = self.coeff_or_zero(kx, ky);
            let b = other.coeff_or_zero(kx, ky);
            let d = a - b;
            sum.add(d.re * d.re + d.im * d.im);
        }
        vol * sum.value()
    }

    fn coeff_or_zero(&self, kx: i64, ky: i64) -> Complex64 {
        let m = self.modes as i64;
        if kx.abs() > m || ky.abs() > m {
            Complex64::default()
        } else {
            self.coeff(kx, ky)
        }
    }

    /// Largest imaginary residue of the synthesized field relative to its
    /// largest real value.
    pub fn reality_residue(&self) -> f64 {
        let ng = dealias_grid(self.modes, 1);
        let grid = self.synthesize(ng);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for v in grid.iter() {
            worst = worst.max(v.im.abs());
            scale = scale.max(v.re.abs());
        }
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    /// Quantized copy (used by the snapshot format for stable bytes).
    pub fn quantized(&self, drop: u32) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = Complex64::new(quantize_mantissa(c.re, drop), quantize_mantissa(c.im, drop));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn cos_x(modes: usize) -> ScalarSpectralField {
        let mut f = ScalarSpectralField::zero(modes, ScalarDim::One, TAU);
        f.set_mode_pair(1, 0, Complex64::new(0.5, 0.0));
        f
    }

    #[test]
    fn laplacian_of_cos_is_minus_cos() {
        let f = cos_x(8);
        let lap = f.apply_op(ScalarOp::Laplacian).unwrap();
        assert!((lap.coeff(1, 0) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((lap.coeff(-1, 0) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bilaplacian_composes_laplacian() {
        let stream = crate::rng::CounterStream::new(3, 1);
        let f = ScalarSpectralField::random(10, ScalarDim::Two, TAU, 1.5, 1.0, &stream);
        let twice = f
            .apply_op(ScalarOp::Laplacian)
            .unwrap()
            .apply_op(ScalarOp::Laplacian)
            .unwrap();
        let once = f.apply_op(ScalarOp::Bilaplacian).unwrap();
        for ((kx, ky), _) in once.lattice().iter().zip(0..) {
            let a = once.coeff(*kx, *ky);
            let b = twice.coeff(*kx, *ky);
            let scale = a.norm().max(b.norm()).max(1e-300);
            assert!(
                (a - b).norm() / scale < 4.0 * f64::EPSILON,
                "mode ({kx},{ky}): {a} vs {b}"
            );
        }
    }

    #[test]
    fn dx4_on_sin_2x() {
        // dx4 sin(2x) = 16 sin(2x); sin(2x) has c(2) = -i/2, c(-2) = i/2
        let mut f = ScalarSpectralField::zero(8, ScalarDim::One, TAU);
        f.set_mode_pair(2, 0, Complex64::new(0.0, -0.5));
        let d4 = f.apply_op(ScalarOp::Dx4).unwrap();
        assert!((d4.coeff(2, 0) - Complex64::new(0.0, -8.0)).norm() < 1e-12);
    }

    #[test]
    fn derivative_ops_reject_2d_fields() {
        let f = ScalarSpectralField::zero(4, ScalarDim::Two, TAU);
        for op in [ScalarOp::Dx, ScalarOp::Dx2, ScalarOp::Dx4] {
            assert!(matches!(f.apply_op(op), Err(Error::UnsupportedOp(_))));
        }
        assert!(f.apply_op(ScalarOp::Laplacian).is_ok());
    }

    #[test]
    fn phi_identity_is_identity() {
        let stream = crate::rng::CounterStream::new(4, 2);
        let f = ScalarSpectralField::random(8, ScalarDim::One, TAU, 1.0, 1.0, &stream);
        let out = f.nonlinearity_phi(&PhiPolynomial::identity()).unwrap();
        for (kx, ky) in f.lattice() {
            assert!((out.coeff(kx, ky) - f.coeff(kx, ky)).norm() < 1e-13);
        }
    }

    #[test]
    fn phi_on_constant_field() {
        let mut f = ScalarSpectralField::zero(6, ScalarDim::One, TAU);
        *f.coeff_mut(0, 0) = Complex64::new(2.0, 0.0);
        let out = f.nonlinearity_phi(&PhiPolynomial::double_well()).unwrap();
        // phi(2) = 8 - 2 = 6
        assert!((out.mean() - 6.0).abs() < 1e-12);
        for (kx, ky) in out.lattice() {
            if kx != 0 || ky != 0 {
                assert!(out.coeff(kx, ky).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn phi_matches_refined_grid_oracle() {
        let stream = crate::rng::CounterStream::new(5, 7);
        let f = ScalarSpectralField::random(8, ScalarDim::One, TAU, 1.5, 0.7, &stream);
        let phi = PhiPolynomial::double_well();
        let spectral = f.nonlinearity_phi(&phi).unwrap();
        // dense-grid oracle at 4x the dealias resolution
        let ng = 4 * dealias_grid(8, 3);
        let mut grid = f.synthesize(ng);
        for v in grid.iter_mut() {
            *v = Complex64::new(phi.eval(v.re), 0.0);
        }
        let oracle = f.analyze_into(&mut grid, ng);
        for (kx, ky) in spectral.lattice() {
            let d = (spectral.coeff(kx, ky) - oracle.coeff(kx, ky)).norm();
            assert!(d < 1e-10, "mode ({kx},{ky}) differs by {d}");
        }
    }

    #[test]
    fn phi_degree_bound_enforced() {
        let f1 = ScalarSpectralField::zero(4, ScalarDim::One, TAU);
        let f2 = ScalarSpectralField::zero(4, ScalarDim::Two, TAU);
        let p5 = PhiPolynomial::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let p6 = PhiPolynomial::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(f1.nonlinearity_phi(&p5).is_ok());
        assert!(matches!(f1.nonlinearity_phi(&p6), Err(Error::Config(_))));
        assert!(matches!(f2.nonlinearity_phi(&p5), Err(Error::Config(_))));
    }

    #[test]
    fn inner_product_matches_quadrature_1d() {
        let stream = crate::rng::CounterStream::new(6, 0);
        let a = ScalarSpectralField::random(6, ScalarDim::One, TAU, 1.0, 1.0, &stream.substream(0));
        let b = ScalarSpectralField::random(6, ScalarDim::One, TAU, 1.0, 1.0, &stream.substream(1));
        let spectral = a.inner_product(&b, 0).unwrap();
        let ng = 64;
        let ga = a.synthesize(ng);
        let gb = b.synthesize(ng);
        let mut acc = 0.0;
        for i in 0..ng {
            acc += ga[i].re * gb[i].re;
        }
        let quad = acc * TAU / ng as f64;
        assert!((spectral - quad).abs() < 1e-12 * spectral.abs().max(1.0));
    }

    #[test]
    fn reality_preserved_through_nonlinearity() {
        let stream = crate::rng::CounterStream::new(8, 0);
        let f = ScalarSpectralField::random(10, ScalarDim::Two, TAU, 1.5, 1.0, &stream);
        let out = f.nonlinearity_phi(&PhiPolynomial::double_well()).unwrap();
        for (kx, ky) in out.lattice() {
            assert_eq!(out.coeff(kx, ky), out.coeff(-kx, -ky).conj());
        }
        assert!(out.reality_residue() < 1e-12);
    }

    #[test]
    fn self_advection_of_single_mode() {
        // u = sin x: u u_x = sin x cos x = sin(2x) / 2
        let mut f = ScalarSpectralField::zero(8, ScalarDim::One, TAU);
        f.set_mode_pair(1, 0, Complex64::new(0.0, -0.5));
        let adv = f.self_advection_1d().unwrap();
        // sin(2x)/2 has c(2) = -i/4
        assert!((adv.coeff(2, 0) - Complex64::new(0.0, -0.25)).norm() < 1e-13);
        assert!(adv.coeff(1, 0).norm() < 1e-14);
    }

    #[test]
    fn sobolev_norms_monotone_in_field_magnitude() {
        let stream = crate::rng::CounterStream::new(9, 0);
        let f = ScalarSpectralField::random(8, ScalarDim::One, TAU, 1.0, 1.0, &stream);
        let g = {
            let mut g = f.clone();
            g.scale_mut(2.0);
            g
        };
        for order in [-1, 0, 1, 2] {
            assert!(g.norm_sq(order) > f.norm_sq(order));
        }
        // m = 0 case is the L2 norm by Parseval
        assert!((f.norm_sq(0) - f.l2_norm_sq()).abs() < 1e-15);
    }
}
