use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::WaveVector;
use crate::error::{Error, Result};

/// Truncated Fourier coefficients `ω_k` of a real vorticity field,
/// `|k1|, |k2| <= box`, `k != 0`.
///
/// The full box is stored; writes go through [`CoefficientField::set`], which
/// keeps `ω_{-k} = conj(ω_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    half_width: i64,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct ModeRecord {
    k: [i64; 2],
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldRecord {
    #[serde(rename = "box")]
    half_width: i64,
    modes: Vec<ModeRecord>,
}

impl CoefficientField {
    pub fn zeros(half_width: usize) -> Self {
        let side = 2 * half_width + 1;
        Self {
            half_width: half_width as i64,
            data: vec![Complex64::new(0.0, 0.0); side * side],
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width as usize
    }

    fn side(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    pub fn in_box(&self, k: WaveVector) -> bool {
        k.k1.abs() <= self.half_width && k.k2.abs() <= self.half_width
    }

    fn index(&self, k: WaveVector) -> usize {
        let b = self.half_width;
        ((k.k1 + b) as usize) * self.side() + (k.k2 + b) as usize
    }

    /// Amplitude of mode `k`; zero outside the box and at the origin.
    pub fn get(&self, k: WaveVector) -> Complex64 {
        if self.in_box(k) {
            self.data[self.index(k)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Sets `ω_k = value` and `ω_{-k} = conj(value)`.
    pub fn set(&mut self, k: WaveVector, value: Complex64) -> Result<()> {
        k.require_nonzero()?;
        if !self.in_box(k) {
            return Err(Error::Domain(format!(
                "mode {k} outside truncation box {}",
                self.half_width
            )));
        }
        let i = self.index(k);
        let j = self.index(-k);
        self.data[i] = value;
        self.data[j] = value.conj();
        Ok(())
    }

    /// Every nonzero mode of the box, in lexicographic order.
    pub fn modes(&self) -> impl Iterator<Item = WaveVector> + '_ {
        let b = self.half_width;
        (-b..=b)
            .flat_map(move |k1| (-b..=b).map(move |k2| WaveVector::new(k1, k2)))
            .filter(|k| !k.is_zero())
    }

    pub fn iter(&self) -> impl Iterator<Item = (WaveVector, Complex64)> + '_ {
        self.modes().map(move |k| (k, self.get(k)))
    }

    /// Largest `|ω_{-k} - conj(ω_k)|` over the box.
    pub fn symmetry_defect(&self) -> f64 {
        self.modes()
            .map(|k| (self.get(-k) - self.get(k).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            half_width: self.half_width,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// `self + c * other` for fields on the same box.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        assert_eq!(self.half_width, other.half_width, "box mismatch");
        Self {
            half_width: self.half_width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b * c)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.modes()
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Same coefficients on a box of a different half width (modes outside
    /// the new box are dropped).
    pub fn rebox(&self, half_width: usize) -> Self {
        let mut out = Self::zeros(half_width);
        for k in out.modes().collect::<Vec<_>>() {
            if self.in_box(k) {
                let i = out.index(k);
                out.data[i] = self.get(k);
            }
        }
        out
    }

    pub(crate) fn raw(&self) -> &[Complex64] {
        &self.data
    }

    /// Serializes the positive half lattice as
    /// `{"box": B, "modes": [{"k": [k1,k2], "re": r, "im": i}, ...]}`.
    pub fn to_json(&self) -> Result<String> {
        let modes = self
            .iter()
            .filter(|(k, z)| k.is_positive_half() && (z.re != 0.0 || z.im != 0.0))
            .map(|(k, z)| ModeRecord {
                k: [k.k1, k.k2],
                re: z.re,
                im: z.im,
            })
            .collect();
        Ok(serde_json::to_string_pretty(&FieldRecord {
            half_width: self.half_width,
            modes,
        })?)
    }

    /// Inverse of [`CoefficientField::to_json`]; the conjugate half is rebuilt.
    pub fn from_json(text: &str) -> Result<Self> {
        let rec: FieldRecord = serde_json::from_str(text)?;
        if rec.half_width < 0 {
            return Err(Error::Format(format!("negative box {}", rec.half_width)));
        }
        let mut field = Self::zeros(rec.half_width as usize);
        for m in rec.modes {
            let k = WaveVector::new(m.k[0], m.k[1]);
            if !k.is_positive_half() {
                return Err(Error::Format(format!(
                    "mode {k} is not in the positive half lattice"
                )));
            }
            field.set(k, Complex64::new(m.re, m.im))?;
        }
        Ok(field)
    }
}

/// Real amplitudes of a cosine expansion `Ω = Σ ω_k cos(k·X)`, with `k` and
/// `-k` identified.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RealCosineField {
    amplitudes: BTreeMap<WaveVector, f64>,
}

impl RealCosineField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, k: WaveVector, value: f64) -> Result<()> {
        k.require_nonzero()?;
        self.amplitudes.insert(k.canonical(), value);
        Ok(())
    }

    pub fn get(&self, k: WaveVector) -> f64 {
        if k.is_zero() {
            return 0.0;
        }
        self.amplitudes.get(&k.canonical()).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Complex coefficients on a box. Since `ω_{-k} = ω_k` is real, the complex
    /// coefficient of `exp(i k·X)` equals the cosine amplitude.
    pub fn to_coefficients(&self, half_width: usize) -> Result<CoefficientField> {
        let mut field = CoefficientField::zeros(half_width);
        for (&k, &v) in &self.amplitudes {
            field.set(k, Complex64::new(v, 0.0))?;
        }
        Ok(field)
    }

    /// Fails when some coefficient has an imaginary part above `tol`.
    pub fn from_coefficients(field: &CoefficientField, tol: f64) -> Result<Self> {
        let mut out = Self::new();
        for (k, z) in field.iter().filter(|(k, _)| k.is_positive_half()) {
            if z.im.abs() > tol {
                return Err(Error::Domain(format!(
                    "mode {k} has imaginary part {}",
                    z.im
                )));
            }
            if z.re != 0.0 {
                out.set(k, z.re)?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_enforces_conjugate_symmetry() {
        let mut f = CoefficientField::zeros(3);
        f.set(WaveVector::new(1, -2), Complex64::new(0.5, 0.25))
            .unwrap();
        assert_eq!(f.get(WaveVector::new(-1, 2)), Complex64::new(0.5, -0.25));
        assert_eq!(f.symmetry_defect(), 0.0);
        assert!(f.set(WaveVector::ZERO, Complex64::new(1.0, 0.0)).is_err());
        assert!(f
            .set(WaveVector::new(4, 0), Complex64::new(1.0, 0.0))
            .is_err());
        assert_eq!(f.get(WaveVector::new(9, 9)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn json_round_trip() {
        let mut f = CoefficientField::zeros(2);
        f.set(WaveVector::new(1, 1), Complex64::new(1.0, -0.5))
            .unwrap();
        f.set(WaveVector::new(0, -2), Complex64::new(0.0, 3.0))
            .unwrap();
        let text = f.to_json().unwrap();
        assert!(text.contains("\"box\": 2"));
        let g = CoefficientField::from_json(&text).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn json_rejects_negative_half_and_unknown_keys() {
        let bad = r#"{"box": 2, "modes": [{"k": [-1, 0], "re": 1.0, "im": 0.0}]}"#;
        assert!(CoefficientField::from_json(bad).is_err());
        let bad = r#"{"box": 2, "modes": [], "extra": 1}"#;
        assert!(CoefficientField::from_json(bad).is_err());
    }

    #[test]
    fn cosine_field_identifies_pairs() {
        let mut c = RealCosineField::new();
        c.set(WaveVector::new(-1, -1), 2.0).unwrap();
        assert_eq!(c.get(WaveVector::new(1, 1)), 2.0);
        assert_eq!(c.len(), 1);
        let f = c.to_coefficients(2).unwrap();
        assert_eq!(f.get(WaveVector::new(-1, -1)), Complex64::new(2.0, 0.0));
        let back = RealCosineField::from_coefficients(&f, 0.0).unwrap();
        assert_eq!(back, c);
    }
}
