//! Linearization of the Galerkin Euler system about the single-mode fixed
//! point `ω_p = Γ`, restricted to one class `{k̂ + n p}`.
//!
//! Along a class the linearization is the three-term recurrence
//! `λ ω_n = c_n ω_{n-1} + d_n ω_{n+1}` with `c_n = A(p, k̂+(n-1)p) Γ` and
//! `d_n = A(-p, k̂+(n+1)p) Γ̄`. This module builds its Dirichlet truncation,
//! solves the dense eigenproblem, and refines individual eigenvalues with the
//! continued-fraction form of the recurrence.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{coef_a, zeta, ClassIndex, WaveVector};
use crate::linalg;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest matrix dimension accepted by [`truncated_spectrum`].
pub const MAX_DENSE_DIM: usize = 2001;

/// `c_n = A(p, k̂+(n-1)p) Γ`, zero when the neighbour is the origin.
fn sub_coefficient(cls: &ClassIndex, gamma: Complex64, n: i64) -> Complex64 {
    let q = cls.member(n - 1);
    if q.is_zero() || cls.member(n).is_zero() {
        return ZERO;
    }
    coef_a(cls.direction, q).expect("nonzero vectors") * gamma
}

/// `d_n = A(-p, k̂+(n+1)p) Γ̄`, zero when the neighbour is the origin.
fn super_coefficient(cls: &ClassIndex, gamma: Complex64, n: i64) -> Complex64 {
    let q = cls.member(n + 1);
    if q.is_zero() || cls.member(n).is_zero() {
        return ZERO;
    }
    coef_a(-cls.direction, q).expect("nonzero vectors") * gamma.conj()
}

/// Dirichlet truncation `|n| <= trunc` of the class recurrence.
#[derive(Debug, Clone, Serialize)]
pub struct ClassOperator {
    pub cls: ClassIndex,
    pub gamma: Complex64,
    pub trunc: usize,
    /// Recurrence index `n` of each matrix row; the origin slot is absent.
    pub indices: Vec<i64>,
    /// `sub_coeffs[i]` multiplies the previous row's unknown (`c_n`).
    pub sub_coeffs: Vec<Complex64>,
    /// `super_coeffs[i]` multiplies the next row's unknown (`d_n`).
    pub super_coeffs: Vec<Complex64>,
    /// Base parallel to the direction: every coupling vanishes.
    pub degenerate: bool,
}

/// Assembles the truncated class operator; `trunc >= 1`.
pub fn build_class_operator(
    cls: ClassIndex,
    gamma: Complex64,
    trunc: usize,
) -> Result<ClassOperator> {
    if trunc == 0 {
        return Err(Error::Precondition(
            "class truncation must be at least 1".into(),
        ));
    }
    let t = trunc as i64;
    let indices: Vec<i64> = (-t..=t).filter(|&n| !cls.member(n).is_zero()).collect();
    let dim = indices.len();
    let mut sub_coeffs = vec![ZERO; dim];
    let mut super_coeffs = vec![ZERO; dim];
    for (i, &n) in indices.iter().enumerate() {
        // a removed origin slot leaves a gap of two in `indices`; its
        // couplings are already zero, so adjacency in the matrix is harmless
        if i > 0 && indices[i - 1] == n - 1 {
            sub_coeffs[i] = sub_coefficient(&cls, gamma, n);
        }
        if i + 1 < dim && indices[i + 1] == n + 1 {
            super_coeffs[i] = super_coefficient(&cls, gamma, n);
        }
    }
    Ok(ClassOperator {
        cls,
        gamma,
        trunc,
        indices,
        sub_coeffs,
        super_coeffs,
        degenerate: cls.is_degenerate(),
    })
}

impl ClassOperator {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Dense tridiagonal matrix with zero diagonal.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for i in 0..dim {
            if i > 0 {
                m[(i, i - 1)] = self.sub_coeffs[i];
            }
            if i + 1 < dim {
                m[(i, i + 1)] = self.super_coeffs[i];
            }
        }
        m
    }

    /// Row index of recurrence index `n`, when present.
    pub fn row_of(&self, n: i64) -> Option<usize> {
        self.indices.iter().position(|&m| m == n)
    }

    /// `b = −½ |Γ| |p|⁻² det(p, k̂)`, half-length of the continuous spectrum
    /// segment `[-2i|b|, 2i|b|]`.
    pub fn b(&self) -> f64 {
        let p = self.cls.direction;
        -0.5 * self.gamma.norm() / p.norm2() as f64 * p.det(self.cls.base) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumCase {
    /// The class misses the closed disk `|k| <= |p|`: no point spectrum.
    ContinuousOnly,
    /// The class meets the closed disk: point spectrum may be present.
    MixedPointSpectrum,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub case: SpectrumCase,
    pub b: f64,
    pub zeta_bound: usize,
    pub trunc: usize,
}

/// Dense eigensolve of the truncation plus the disk-intersection classification.
pub fn truncated_spectrum(op: &ClassOperator) -> Result<SpectrumReport> {
    if op.dim() > MAX_DENSE_DIM {
        return Err(Error::Precondition(format!(
            "matrix dimension {} exceeds {MAX_DENSE_DIM}",
            op.dim()
        )));
    }
    let eigenvalues = linalg::eigenvalues(&op.matrix())?;
    let case = if op.cls.meets_closed_disk() {
        SpectrumCase::MixedPointSpectrum
    } else {
        SpectrumCase::ContinuousOnly
    };
    Ok(SpectrumReport {
        eigenvalues,
        case,
        b: op.b(),
        zeta_bound: 2 * zeta(op.cls.direction)?,
        trunc: op.trunc,
    })
}

/// `λ̃ = 2λ / |Γ|`.
pub fn normalize(lambda: Complex64, gamma: Complex64) -> Complex64 {
    lambda * (2.0 / gamma.norm())
}

/// Default threshold on `|Re λ|` separating point spectrum from truncation
/// noise: `0.05 |Γ|`.
pub fn default_tolerance(gamma: Complex64) -> f64 {
    0.05 * gamma.norm()
}

/// Continued-fraction characteristic function of the class recurrence and its
/// derivative in `λ`.
#[derive(Debug, Clone)]
pub struct ContinuedFraction {
    center: i64,
    /// `(c_n, d_n)` for `n = center+1 ..= center+depth`.
    upper: Vec<(Complex64, Complex64)>,
    /// `(c_n, d_n)` for `n = center-1, center-2, ..., center-depth`.
    lower: Vec<(Complex64, Complex64)>,
    center_coeffs: (Complex64, Complex64),
}

impl ContinuedFraction {
    /// Expansion about the class member closest to the origin, with `depth`
    /// levels on each side and a zero tail.
    pub fn new(cls: &ClassIndex, gamma: Complex64, depth: usize) -> Self {
        let p = cls.direction;
        let p2 = p.norm2() as f64;
        let n_star = -((cls.base.k1 * p.k1 + cls.base.k2 * p.k2) as f64) / p2;
        let candidates = (n_star.floor() as i64 - 1)..=(n_star.ceil() as i64 + 1);
        let center = candidates
            .filter(|&n| !cls.member(n).is_zero())
            .min_by_key(|&n| (cls.member(n).norm2(), n))
            .expect("at most one class member is the origin");
        let coeffs = |n: i64| {
            (
                sub_coefficient(cls, gamma, n),
                super_coefficient(cls, gamma, n),
            )
        };
        let d = depth as i64;
        Self {
            center,
            upper: (1..=d).map(|j| coeffs(center + j)).collect(),
            lower: (1..=d).map(|j| coeffs(center - j)).collect(),
            center_coeffs: coeffs(center),
        }
    }

    pub fn center(&self) -> i64 {
        self.center
    }

    /// `F(λ) = λ − c_0 S − d_0 R` where `R = ω_{+1}/ω_0` and `S = ω_{-1}/ω_0`
    /// follow from the tails of the recurrence.
    pub fn eval(&self, lambda: Complex64) -> (Complex64, Complex64) {
        // R_n = c_n / (λ − d_n R_{n+1}),  S_n = d_n / (λ − c_n S_{n-1})
        let sweep = |levels: &[(Complex64, Complex64)], upward: bool| {
            let mut r = ZERO;
            let mut dr = ZERO;
            for &(c, d) in levels.iter().rev() {
                let (num, coupling) = if upward { (c, d) } else { (d, c) };
                if num == ZERO {
                    r = ZERO;
                    dr = ZERO;
                    continue;
                }
                let den = lambda - coupling * r;
                let dden = Complex64::new(1.0, 0.0) - coupling * dr;
                let new_r = num / den;
                dr = -num * dden / (den * den);
                r = new_r;
            }
            (r, dr)
        };
        let (r, dr) = sweep(&self.upper, true);
        let (s, ds) = sweep(&self.lower, false);
        let (c0, d0) = self.center_coeffs;
        let f = lambda - c0 * s - d0 * r;
        let df = Complex64::new(1.0, 0.0) - c0 * ds - d0 * dr;
        (f, df)
    }
}

/// Continued-fraction depth used for refinement: four times the truncation.
pub fn refinement_depth(op: &ClassOperator) -> usize {
    4 * op.trunc.max(1)
}

const NEWTON_MAX_STEPS: usize = 100;
const NEWTON_RESIDUAL: f64 = 1e-13;

/// Newton refinement of an eigenvalue of the class recurrence, seeded from a
/// truncated eigensolve.
pub fn continued_fraction_eigen(op: &ClassOperator, seed: Complex64) -> Result<Complex64> {
    let cf = ContinuedFraction::new(&op.cls, op.gamma, refinement_depth(op));
    newton_on(&cf, seed)
}

pub(crate) fn newton_on(cf: &ContinuedFraction, seed: Complex64) -> Result<Complex64> {
    let mut lambda = seed;
    for _ in 0..NEWTON_MAX_STEPS {
        let (f, df) = cf.eval(lambda);
        if !(f.re.is_finite() && f.im.is_finite()) || df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        lambda -= step;
        let (f_new, _) = cf.eval(lambda);
        if f_new.norm() == 0.0
            || (f_new.norm() < NEWTON_RESIDUAL && step.norm() < 1e-10 * (1.0 + lambda.norm()))
        {
            // one more step polishes to the floating-point fixed point
            let (f2, df2) = cf.eval(lambda);
            if df2.norm() > 0.0 {
                let polished = lambda - f2 / df2;
                if cf.eval(polished).0.norm() <= f_new.norm() {
                    lambda = polished;
                }
            }
            return Ok(lambda);
        }
    }
    Err(Error::NewtonDivergence {
        iterations: NEWTON_MAX_STEPS,
        last: lambda,
    })
}

/// Number of eigenvalues with `|Re λ| > tol`.
pub fn count_nonimaginary(report: &SpectrumReport, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(report
        .eigenvalues
        .iter()
        .filter(|l| l.re.abs() > tol)
        .count())
}

/// Hausdorff distance between the spectrum of `exp(tM)` and `exp(t σ(M))`.
pub fn spectral_mapping_defect(m: &DMatrix<Complex64>, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::Precondition("spectral mapping needs t != 0".into()));
    }
    let sigma = linalg::eigenvalues(m)?;
    let mapped: Vec<Complex64> = sigma.iter().map(|l| (l * t).exp()).collect();
    let expm = (m * Complex64::new(t, 0.0)).exp();
    let sigma_exp = linalg::eigenvalues(&expm)?;
    Ok(linalg::hausdorff(&sigma_exp, &mapped))
}

/// [`spectral_mapping_defect`] for a class truncation of dimension at most 200.
pub fn spectral_mapping_check(op: &ClassOperator, t: f64) -> Result<f64> {
    if op.dim() > 200 {
        return Err(Error::Precondition(format!(
            "spectral mapping check limited to dimension 200, got {}",
            op.dim()
        )));
    }
    spectral_mapping_defect(&op.matrix(), t)
}

/// Largest distance from `−λ`, `λ̄`, `−λ̄` to the spectrum, over all `λ`.
pub fn quadruple_symmetry_defect(eigenvalues: &[Complex64]) -> f64 {
    let nearest = |z: Complex64| {
        eigenvalues
            .iter()
            .map(|e| (e - z).norm())
            .fold(f64::INFINITY, f64::min)
    };
    eigenvalues
        .iter()
        .map(|&l| nearest(-l).max(nearest(l.conj())).max(nearest(-l.conj())))
        .fold(0.0, f64::max)
}

/// Eigenvalues with `|Re λ| > tol`, sorted by real then imaginary part.
pub fn point_spectrum(report: &SpectrumReport, tol: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = report
        .eigenvalues
        .iter()
        .copied()
        .filter(|l| l.re.abs() > tol)
        .collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

/// Convenience: the class `Σ_k̂` with direction `p`.
pub fn class(base: (i64, i64), direction: (i64, i64)) -> Result<ClassIndex> {
    ClassIndex::new(
        WaveVector::new(base.0, base.1),
        WaveVector::new(direction.0, direction.1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn operator_entries_match_direct_loop() {
        let cls = class((-3, -2), (1, 1)).unwrap();
        let gamma = c(0.6, -1.1);
        let op = build_class_operator(cls, gamma, 7).unwrap();
        let m = op.matrix();
        let p = WaveVector::new(1, 1);
        let khat = WaveVector::new(-3, -2);
        // independent construction straight from the recurrence
        for (i, n) in (-7i64..=7).enumerate() {
            for (j, m_idx) in (-7i64..=7).enumerate() {
                let expect = if m_idx == n - 1 {
                    let q = khat + (n - 1) * p;
                    let a =
                        0.5 * (1.0 / q.norm2() as f64 - 0.5) * (p.k1 * q.k2 - p.k2 * q.k1) as f64;
                    gamma * a
                } else if m_idx == n + 1 {
                    let q = khat + (n + 1) * p;
                    let a =
                        0.5 * (1.0 / q.norm2() as f64 - 0.5) * (-p.k1 * q.k2 + p.k2 * q.k1) as f64;
                    gamma.conj() * a
                } else {
                    ZERO
                };
                assert!((m[(i, j)] - expect).norm() < 1e-15, "entry ({n},{m_idx})");
            }
        }
    }

    #[test]
    fn operator_examples() {
        let cls = class((-3, -2), (1, 1)).unwrap();
        let op = build_class_operator(cls, c(1.0, 0.0), 2).unwrap();
        assert_eq!(op.dim(), 5);
        // row n = 2 couples to n = 1, whose member is (-2,-1)
        let row = op.row_of(2).unwrap();
        assert!((op.sub_coeffs[row] - c(-3.0 / 20.0, 0.0)).norm() < 1e-15);

        let zero = build_class_operator(cls, ZERO, 3).unwrap();
        assert!(zero.matrix().iter().all(|z| z.norm() == 0.0));
        assert!(build_class_operator(cls, c(1.0, 0.0), 0).is_err());
    }

    #[test]
    fn origin_slot_is_removed_and_chain_split() {
        let cls = class((1, 0), (1, 0)).unwrap();
        let op = build_class_operator(cls, c(1.0, 0.0), 3).unwrap();
        assert_eq!(op.dim(), 6);
        assert!(!op.indices.contains(&-1));
        assert!(op.degenerate);
        let cls = class((2, 1), (1, 0)).unwrap();
        let op = build_class_operator(cls, c(1.0, 0.0), 3).unwrap();
        assert_eq!(op.dim(), 7);
        assert!(!op.degenerate);
        // chain through a removed slot: (0,0) not in the class here
        let cls = class((-2, -2), (1, 1)).unwrap();
        let op = build_class_operator(cls, c(1.0, 0.0), 4).unwrap();
        let a = op.row_of(1).unwrap();
        let b = op.row_of(3).unwrap();
        assert_eq!(b, a + 1);
        assert_eq!(op.super_coeffs[a], ZERO);
        assert_eq!(op.sub_coeffs[b], ZERO);
    }

    #[test]
    fn b_matches_closed_form() {
        let cls = class((-3, -2), (1, 1)).unwrap();
        for g in [c(2.0, 0.0), c(0.0, 3.0)] {
            let op = build_class_operator(cls, g, 2).unwrap();
            assert!((op.b() + g.norm() / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_operator_refines_to_zero() {
        let cls = class((-3, -2), (1, 1)).unwrap();
        let op = build_class_operator(cls, ZERO, 5).unwrap();
        let got = continued_fraction_eigen(&op, c(0.3, -0.2)).unwrap();
        assert!(got.norm() < 1e-15);
        let rep = truncated_spectrum(&op).unwrap();
        assert_eq!(count_nonimaginary(&rep, 0.01).unwrap(), 0);
        assert!(count_nonimaginary(&rep, 0.0).is_err());
    }

    #[test]
    fn symmetry_defect_edge_cases() {
        assert_eq!(quadruple_symmetry_defect(&[]), 0.0);
        let quad = [c(1.0, 2.0), c(-1.0, 2.0), c(1.0, -2.0), c(-1.0, -2.0)];
        assert_eq!(quadruple_symmetry_defect(&quad), 0.0);
        assert!(quadruple_symmetry_defect(&[c(1.0, 2.0)]) > 1.0);
    }

    #[test]
    fn spectral_mapping_for_zero_operator() {
        let cls = class((-3, -2), (1, 1)).unwrap();
        let op = build_class_operator(cls, ZERO, 4).unwrap();
        assert_eq!(spectral_mapping_check(&op, 1.0).unwrap(), 0.0);
        assert!(spectral_mapping_check(&op, 0.0).is_err());
    }
}
