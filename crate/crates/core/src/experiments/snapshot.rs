//! Binary snapshot format.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic      8 bytes  "MVLSNAP1"
//! version    u32      1
//! equation   u32      1 = fluid, 2 = fourth-order 2D/1D scalar (see dim)
//! modes      u32      retained wavenumbers per axis M
//! particles  u32      N
//! dim        u32      0 = divergence-free vector field, 1/2 = scalar
//! domain     f64      torus side length L
//! dt         f64      step the run used
//! time       f64      snapshot time
//! payload             per particle, row-major complex coefficients as
//!                     (re, im) f64 pairs: the transverse amplitudes for
//!                     velocity fields ((2M+1)^2 entries), the Fourier
//!                     coefficients for scalars ((2M+1)^d entries)
//! ```
//!
//! Transverse amplitudes rather than raw vector pairs keep the file
//! bit-portable: reloading reproduces the exact field, including its
//! exactness invariants.

use crate::error::Error;
use crate::spectral::{ScalarDim, ScalarSpectralField, SpectralVelocityField};
use crate::Result;
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"MVLSNAP1";
const VERSION: u32 = 1;

/// A snapshot of one ensemble at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Velocity {
        time: f64,
        dt: f64,
        states: Vec<SpectralVelocityField>,
    },
    Scalar {
        time: f64,
        dt: f64,
        states: Vec<ScalarSpectralField>,
    },
}

impl Snapshot {
    pub fn particles(&self) -> usize {
        match self {
            Snapshot::Velocity { states, .. } => states.len(),
            Snapshot::Scalar { states, .. } => states.len(),
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            Snapshot::Velocity { time, .. } | Snapshot::Scalar { time, .. } => *time,
        }
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        push_u32(&mut buf, VERSION);
        match self {
            Snapshot::Velocity { time, dt, states } => {
                let first = states
                    .first()
                    .ok_or_else(|| Error::config("empty snapshot"))?;
                push_u32(&mut buf, 1);
                push_u32(&mut buf, first.modes() as u32);
                push_u32(&mut buf, states.len() as u32);
                push_u32(&mut buf, 0);
                push_f64(&mut buf, first.domain_size());
                push_f64(&mut buf, *dt);
                push_f64(&mut buf, *time);
                for s in states {
                    if s.modes() != first.modes() || s.domain_size() != first.domain_size() {
                        return Err(Error::dim("snapshot states share one grid".to_string()));
                    }
                    for c in s.transverse() {
                        push_f64(&mut buf, c.re);
                        push_f64(&mut buf, c.im);
                    }
                }
            }
            Snapshot::Scalar { time, dt, states } => {
                let first = states
                    .first()
                    .ok_or_else(|| Error::config("empty snapshot"))?;
                push_u32(&mut buf, 2);
                push_u32(&mut buf, first.modes() as u32);
                push_u32(&mut buf, states.len() as u32);
                push_u32(
                    &mut buf,
                    match first.dim() {
                        ScalarDim::One => 1,
                        ScalarDim::Two => 2,
                    },
                );
                push_f64(&mut buf, first.domain_size());
                push_f64(&mut buf, *dt);
                push_f64(&mut buf, *time);
                for s in states {
                    for c in s.coeffs() {
                        push_f64(&mut buf, c.re);
                        push_f64(&mut buf, c.im);
                    }
                }
            }
        }
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&buf)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Snapshot> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        let magic = cur.take(8)?;
        if magic != MAGIC {
            return Err(Error::config("not a snapshot file (bad magic)"));
        }
        let version = cur.u32()?;
        if version != VERSION {
            return Err(Error::config(format!("unsupported snapshot version {version}")));
        }
        let equation = cur.u32()?;
        let modes = cur.u32()? as usize;
        let particles = cur.u32()? as usize;
        let dim = cur.u32()?;
        let domain = cur.f64()?;
        let dt = cur.f64()?;
        let time = cur.f64()?;
        let side = 2 * modes + 1;
        match (equation, dim) {
            (1, 0) => {
                let per = side * side;
                let mut states = Vec::with_capacity(particles);
                for _ in 0..particles {
                    let mut tr = Vec::with_capacity(per);
                    for _ in 0..per {
                        tr.push(Complex64::new(cur.f64()?, cur.f64()?));
                    }
                    states.push(SpectralVelocityField::from_transverse(modes, domain, tr)?);
                }
                cur.expect_end()?;
                Ok(Snapshot::Velocity { time, dt, states })
            }
            (2, d @ (1 | 2)) => {
                let sd = if d == 1 { ScalarDim::One } else { ScalarDim::Two };
                let per = if d == 1 { side } else { side * side };
                let mut states = Vec::with_capacity(particles);
                for _ in 0..particles {
                    let mut coeffs = Vec::with_capacity(per);
                    for _ in 0..per {
                        coeffs.push(Complex64::new(cur.f64()?, cur.f64()?));
                    }
                    states.push(ScalarSpectralField::from_coeffs(modes, sd, domain, coeffs)?);
                }
                cur.expect_end()?;
                Ok(Snapshot::Scalar { time, dt, states })
            }
            _ => Err(Error::config(format!(
                "corrupt snapshot header: equation {equation}, dim {dim}"
            ))),
        }
    }
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::config("truncated snapshot file"));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::config("trailing bytes in snapshot file"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterStream;
    use std::f64::consts::TAU;

    #[test]
    fn velocity_snapshot_roundtrips_bit_exact() {
        let stream = CounterStream::new(1, 0);
        let states: Vec<SpectralVelocityField> = (0..3)
            .map(|i| SpectralVelocityField::random(5, TAU, 2.0, 1.0, &stream.substream(i)))
            .collect();
        let snap = Snapshot::Velocity {
            time: 0.25,
            dt: 1e-3,
            states: states.clone(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.snap");
        snap.write_to(&path).unwrap();
        let loaded = Snapshot::read_from(&path).unwrap();
        assert_eq!(snap, loaded);
    }

    #[test]
    fn scalar_snapshot_roundtrips() {
        let stream = CounterStream::new(2, 0);
        let states: Vec<ScalarSpectralField> = (0..2)
            .map(|i| {
                ScalarSpectralField::random(6, ScalarDim::One, 22.0, 1.5, 1.0, &stream.substream(i))
            })
            .collect();
        let snap = Snapshot::Scalar {
            time: 1.0,
            dt: 1e-2,
            states,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.snap");
        snap.write_to(&path).unwrap();
        assert_eq!(Snapshot::read_from(&path).unwrap(), snap);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.snap");
        std::fs::write(&path, b"NOTASNAPxxxxxxx").unwrap();
        assert!(Snapshot::read_from(&path).is_err());
    }

    #[test]
    fn snapshot_bytes_are_deterministic() {
        let stream = CounterStream::new(3, 0);
        let states: Vec<SpectralVelocityField> =
            vec![SpectralVelocityField::random(4, TAU, 2.0, 1.0, &stream)];
        let snap = Snapshot::Velocity {
            time: 0.0,
            dt: 1e-3,
            states,
        };
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("d1.snap");
        let p2 = dir.path().join("d2.snap");
        snap.write_to(&p1).unwrap();
        snap.write_to(&p2).unwrap();
        assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
    }
}
