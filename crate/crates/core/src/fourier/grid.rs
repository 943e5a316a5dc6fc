use std::f64::consts::PI;

use num_complex::Complex64;

use super::spectral::{dealias_cutoff, fft_cube, wavenumber};
use super::CoefficientField;
use super::WaveVector;
use crate::error::{Error, Result};

/// Samples of a real field on the uniform `n x n` grid of the torus
/// `[0, 2π)²`, stored as `data[ix * n + iy]` with `x = 2π ix / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField2D {
    n: usize,
    data: Vec<f64>,
}

fn check_resolution(n: usize) -> Result<()> {
    if n >= 16 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "grid resolution {n} must be a power of two >= 16"
        )))
    }
}

impl GridField2D {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        check_resolution(n)?;
        if data.len() != n * n {
            return Err(Error::Domain(format!(
                "expected {} samples, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(n, vec![c; n * n])
    }

    /// Samples `f(x, y)` at the grid nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_resolution(n)?;
        let h = 2.0 * PI / n as f64;
        let mut data = Vec::with_capacity(n * n);
        for ix in 0..n {
            for iy in 0..n {
                data.push(f(ix as f64 * h, iy as f64 * h));
            }
        }
        Ok(Self { n, data })
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.data[ix * self.n + iy]
    }

    /// Coordinates of flat sample index `i`.
    pub fn node(&self, i: usize) -> (f64, f64) {
        let h = 2.0 * PI / self.n as f64;
        ((i / self.n) as f64 * h, (i % self.n) as f64 * h)
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::ResolutionMismatch(self.n, other.n))
        }
    }

    /// Normalized DFT coefficients `c` with `f = Σ c_k exp(i k·X)`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_cube(&mut buf, self.n, 2, false);
        let norm = 1.0 / (self.n * self.n) as f64;
        buf.iter_mut().for_each(|z| *z *= norm);
        buf
    }

    /// Real part of the synthesis of normalized coefficients.
    pub fn from_spectrum(n: usize, mut spec: Vec<Complex64>) -> Result<Self> {
        check_resolution(n)?;
        fft_cube(&mut spec, n, 2, true);
        Ok(Self {
            n,
            data: spec.iter().map(|z| z.re).collect(),
        })
    }

    fn map_spectrum(&self, f: impl Fn(i64, i64, Complex64) -> Complex64) -> Self {
        let n = self.n;
        let mut spec = self.spectrum();
        for i in 0..n {
            for j in 0..n {
                let idx = i * n + j;
                spec[idx] = f(wavenumber(i, n), wavenumber(j, n), spec[idx]);
            }
        }
        Self::from_spectrum(n, spec).expect("resolution already validated")
    }

    /// Spectral partial derivative `∂x^ax ∂y^ay`. Odd derivatives drop the
    /// Nyquist mode.
    pub fn derivative(&self, ax: u32, ay: u32) -> Self {
        let nyq = -(self.n as i64) / 2;
        self.map_spectrum(|k1, k2, z| {
            if (ax % 2 == 1 && k1 == nyq) || (ay % 2 == 1 && k2 == nyq) {
                return Complex64::new(0.0, 0.0);
            }
            let i = Complex64::i();
            z * (i * k1 as f64).powu(ax) * (i * k2 as f64).powu(ay)
        })
    }

    pub fn dx(&self) -> Self {
        self.derivative(1, 0)
    }

    pub fn dy(&self) -> Self {
        self.derivative(0, 1)
    }

    pub fn laplacian(&self) -> Self {
        self.map_spectrum(|k1, k2, z| z * (-((k1 * k1 + k2 * k2) as f64)))
    }

    /// Zeroes every mode with `|k1|` or `|k2|` above the 2/3-rule cutoff.
    pub fn dealias(&self) -> Self {
        let kc = dealias_cutoff(self.n);
        self.map_spectrum(|k1, k2, z| {
            if k1.abs() > kc || k2.abs() > kc {
                Complex64::new(0.0, 0.0)
            } else {
                z
            }
        })
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
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

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_shape(other)?;
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

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Fourier coefficients of the modes inside a box of half width
    /// `half_width`; the mean is dropped.
    pub fn to_coefficients(&self, half_width: usize) -> Result<CoefficientField> {
        let n = self.n;
        if 2 * half_width >= n {
            return Err(Error::Domain(format!(
                "box {half_width} not resolved on a {n}-point grid"
            )));
        }
        let spec = self.spectrum();
        let mut out = CoefficientField::zeros(half_width);
        let b = half_width as i64;
        let idx = |k: i64| k.rem_euclid(n as i64) as usize;
        for k1 in -b..=b {
            for k2 in -b..=b {
                let k = WaveVector::new(k1, k2);
                if k.is_positive_half() {
                    out.set(k, spec[idx(k1) * n + idx(k2)])?;
                }
            }
        }
        Ok(out)
    }

    /// Samples of `Σ ω_k exp(i k·X)` on an `n`-point grid.
    pub fn from_coefficients(n: usize, field: &CoefficientField) -> Result<Self> {
        check_resolution(n)?;
        if 2 * field.half_width() >= n {
            return Err(Error::Domain(format!(
                "box {} not resolved on a {n}-point grid",
                field.half_width()
            )));
        }
        let mut spec = vec![Complex64::new(0.0, 0.0); n * n];
        let idx = |k: i64| k.rem_euclid(n as i64) as usize;
        for (k, z) in field.iter() {
            spec[idx(k.k1) * n + idx(k.k2)] = z;
        }
        Self::from_spectrum(n, spec)
    }
}

/// Poisson bracket `{f, g} = f_x g_y − f_y g_x` by Fourier collocation with
/// 2/3-rule dealiasing of the inputs and of the product.
pub fn grid_bracket(f: &GridField2D, g: &GridField2D) -> Result<GridField2D> {
    f.same_shape(g)?;
    let f = f.dealias();
    let g = g.dealias();
    let (fx, fy) = (f.dx(), f.dy());
    let (gx, gy) = (g.dx(), g.dy());
    let data = (0..fx.data.len())
        .map(|i| fx.data[i] * gy.data[i] - fy.data[i] * gx.data[i])
        .collect();
    Ok(GridField2D { n: f.n, data }.dealias())
}

/// Fields on which `Δ⁻¹` is defined for zero-mean input.
pub trait InverseLaplacian: Sized {
    fn inverse_laplacian(&self) -> Result<Self>;
}

impl InverseLaplacian for GridField2D {
    fn inverse_laplacian(&self) -> Result<Self> {
        let mean = self.mean();
        if mean.abs() > 1e-12 * (1.0 + self.max_abs()) {
            return Err(Error::NonzeroMean(mean));
        }
        Ok(self.map_spectrum(|k1, k2, z| {
            let k2n = k1 * k1 + k2 * k2;
            if k2n == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                -z / k2n as f64
            }
        }))
    }
}

impl InverseLaplacian for CoefficientField {
    /// The origin is never stored, so every coefficient field has zero mean.
    fn inverse_laplacian(&self) -> Result<Self> {
        let mut out = self.clone();
        for k in self.modes().filter(|k| k.is_positive_half()) {
            out.set(k, -self.get(k) / k.norm2() as f64)?;
        }
        Ok(out)
    }
}

/// `Ψ = Δ⁻¹ Ω`: divides each Fourier coefficient by `−|k|²`.
pub fn invert_laplacian<F: InverseLaplacian>(f: &F) -> Result<F> {
    f.inverse_laplacian()
}
