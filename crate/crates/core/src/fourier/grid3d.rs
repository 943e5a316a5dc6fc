use std::f64::consts::PI;

use num_complex::Complex64;

use super::spectral::{fft_cube, wavenumber};
use crate::error::{Error, Result};

fn check_resolution(n: usize) -> Result<()> {
    if n >= 8 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "3D grid resolution {n} must be a power of two >= 8"
        )))
    }
}

/// Real samples on the `n³` periodic grid of `[0, 2π)³`, stored as
/// `data[(ix * n + iy) * n + iz]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3D {
    n: usize,
    data: Vec<f64>,
}

impl ScalarField3D {
    pub fn from_fn(n: usize, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        check_resolution(n)?;
        let h = 2.0 * PI / n as f64;
        let mut data = Vec::with_capacity(n * n * n);
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    data.push(f(ix as f64 * h, iy as f64 * h, iz as f64 * h));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_, _, _| c)
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::ResolutionMismatch(self.n, other.n))
        }
    }

    /// Spectral derivative along `axis` (0 = x, 1 = y, 2 = z).
    pub fn partial(&self, axis: usize) -> Self {
        let n = self.n;
        let mut spec: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_cube(&mut spec, n, 3, false);
        let norm = 1.0 / (n * n * n) as f64;
        let nyq = -(n as i64) / 2;
        for (idx, z) in spec.iter_mut().enumerate() {
            let along = match axis {
                0 => idx / (n * n),
                1 => (idx / n) % n,
                _ => idx % n,
            };
            let k = wavenumber(along, n);
            *z = if k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                *z * Complex64::new(0.0, k as f64) * norm
            };
        }
        fft_cube(&mut spec, n, 3, true);
        Self {
            n,
            data: spec.iter().map(|z| z.re).collect(),
        }
    }

    pub fn gradient(&self) -> VectorField3D {
        VectorField3D {
            components: [self.partial(0), self.partial(1), self.partial(2)],
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Three-component field (velocity `u` or vorticity `Ω`) on the periodic cube.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3D {
    pub components: [ScalarField3D; 3],
}

impl VectorField3D {
    pub fn new(x: ScalarField3D, y: ScalarField3D, z: ScalarField3D) -> Result<Self> {
        x.check_same(&y)?;
        x.check_same(&z)?;
        Ok(Self {
            components: [x, y, z],
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Result<Self> {
        Self::new(
            ScalarField3D::from_fn(n, |x, y, z| f(x, y, z)[0])?,
            ScalarField3D::from_fn(n, |x, y, z| f(x, y, z)[1])?,
            ScalarField3D::from_fn(n, |x, y, z| f(x, y, z)[2])?,
        )
    }

    pub fn resolution(&self) -> usize {
        self.components[0].n
    }

    pub fn curl(&self) -> Self {
        let [u, v, w] = &self.components;
        let sub =
            |a: ScalarField3D, b: ScalarField3D| a.zip_with(&b, |p, q| p - q).expect("same grid");
        Self {
            components: [
                sub(w.partial(1), v.partial(2)),
                sub(u.partial(2), w.partial(0)),
                sub(v.partial(0), u.partial(1)),
            ],
        }
    }

    pub fn divergence(&self) -> ScalarField3D {
        let [u, v, w] = &self.components;
        let s = u
            .partial(0)
            .zip_with(&v.partial(1), |a, b| a + b)
            .expect("same grid");
        s.zip_with(&w.partial(2), |a, b| a + b).expect("same grid")
    }

    /// `(self · ∇) φ`.
    pub fn directional(&self, phi: &ScalarField3D) -> Result<ScalarField3D> {
        self.components[0].check_same(phi)?;
        let g = phi.gradient();
        let n = phi.n;
        let data = (0..n * n * n)
            .map(|i| {
                (0..3)
                    .map(|a| self.components[a].data[i] * g.components[a].data[i])
                    .sum()
            })
            .collect();
        Ok(ScalarField3D { n, data })
    }

    /// `(self · ∇) φ` applied componentwise to a vector field.
    pub fn directional_vector(&self, phi: &VectorField3D) -> Result<VectorField3D> {
        Ok(VectorField3D {
            components: [
                self.directional(&phi.components[0])?,
                self.directional(&phi.components[1])?,
                self.directional(&phi.components[2])?,
            ],
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            components: [
                self.components[0].zip_with(&other.components[0], |a, b| a - b)?,
                self.components[1].zip_with(&other.components[1], |a, b| a - b)?,
                self.components[2].zip_with(&other.components[2], |a, b| a - b)?,
            ],
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.max_abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..3)
            .map(|a| self.components[a].max_abs_diff(&other.components[a]))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abc_flow_is_beltrami_and_solenoidal() {
        let (a, b, c) = (1.0, 0.7, 0.4);
        let u = VectorField3D::from_fn(16, |x, y, z| {
            [
                a * z.sin() + c * y.cos(),
                b * x.sin() + a * z.cos(),
                c * y.sin() + b * x.cos(),
            ]
        })
        .unwrap();
        assert!(u.divergence().max_abs() < 1e-13);
        assert!(u.curl().max_abs_diff(&u) < 1e-13);
    }

    #[test]
    fn partials_of_monomials() {
        let f = ScalarField3D::from_fn(16, |x, y, z| (2.0 * x).sin() * y.cos() * (3.0 * z).cos())
            .unwrap();
        let fz = ScalarField3D::from_fn(16, |x, y, z| {
            -3.0 * (2.0 * x).sin() * y.cos() * (3.0 * z).sin()
        })
        .unwrap();
        assert!(f.partial(2).max_abs_diff(&fz) < 1e-12);
        assert!(ScalarField3D::from_fn(12, |_, _, _| 0.0).is_err());
    }
}
