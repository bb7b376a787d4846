//! Fourier representation of periodic fields and the operators acting on
//! them: Leray projection, Stokes operator, the Navier-Stokes bilinear term,
//! and the scalar differential operators used by the fourth-order models.
//!
//! All fields retain the symmetric mode square k in {-M..M}^d. Products are
//! evaluated pseudospectrally on a padded grid large enough that no alias of
//! the product lands back in the retained square (the 2/3 rule for quadratic
//! terms, tighter for higher polynomial degree), which is exactly the
//! condition under which the Galerkin-truncated bilinear identities hold to
//! rounding error.

pub mod fft;
pub mod scalar;
pub mod velocity;

pub use scalar::{PhiPolynomial, ScalarDim, ScalarOp, ScalarSpectralField};
pub use velocity::{
    bilinear, leray_project, CompensatedSum, RawVectorField, SobolevNorm, SpectralVelocityField,
};

/// Number of retained wavenumbers per axis for `modes_per_axis = m`.
#[inline]
pub fn side(m: usize) -> usize {
    2 * m + 1
}

/// Largest supported mode count per axis. Transverse amplitudes drop a
/// mode-dependent number of low mantissa bits (at most 16 at this cap, a
/// 2^-37 relative perturbation on the highest modes) so that integer
/// wavenumber products are exact; that is what makes divergence and
/// idempotency checks hold to the last bit.
pub const MAX_MODES: usize = 128;

/// 2 pi / L, the physical wavenumber of mode 1.
#[inline]
pub fn wavenumber_scale(domain_size: f64) -> f64 {
    std::f64::consts::TAU / domain_size
}

/// Linear index of mode (kx, ky) in the (2m+1)^2 row-major layout.
#[inline]
pub fn index_of_mode(kx: i64, ky: i64, m: usize) -> usize {
    let s = side(m) as i64;
    let i = kx + m as i64;
    let j = ky + m as i64;
    debug_assert!(i >= 0 && i < s && j >= 0 && j < s);
    (i * s + j) as usize
}

/// Mode (kx, ky) of a linear index.
#[inline]
pub fn mode_of_index(idx: usize, m: usize) -> (i64, i64) {
    let s = side(m);
    let i = idx / s;
    let j = idx % s;
    (i as i64 - m as i64, j as i64 - m as i64)
}

/// Wrap a signed mode into the [0, n) index of an n-point FFT grid.
#[inline]
pub fn wrap(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Smallest 5-smooth grid size that evaluates degree-`degree` pointwise
/// products of fields with modes up to `m` without aliasing the retained
/// square: n >= (degree + 1) * m + 1.
pub fn dealias_grid(m: usize, degree: usize) -> usize {
    let min = (degree + 1) * m + 1;
    let mut n = min.max(4);
    loop {
        let mut r = n;
        for p in [2usize, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 1;
    }
}

/// Clear the low `drop` mantissa bits of a float (truncation toward zero).
#[inline]
pub fn quantize_mantissa(x: f64, drop: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mask = !((1u64 << drop) - 1);
    f64::from_bits(x.to_bits() & mask)
}

#[inline]
fn int_bits(v: i64) -> u32 {
    64 - v.unsigned_abs().leading_zeros()
}

/// Mantissa bits to drop from the transverse amplitude of mode (kx, ky) so
/// that materialization (integer component products), the discrete
/// divergence (one extra integer product per term) and amplitude recovery
/// (multiplication by |k|^2, division back) are all exact float operations.
#[inline]
pub(crate) fn transverse_drop_bits(kx: i64, ky: i64) -> u32 {
    let k2 = kx * kx + ky * ky;
    (2 * int_bits(kx)).max(2 * int_bits(ky)).max(int_bits(k2))
}
