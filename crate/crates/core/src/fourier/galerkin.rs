use num_complex::Complex64;

use super::{CoefficientField, WaveVector};
use crate::error::{Error, Result};
use crate::ode;

/// Interaction coefficient `A(p,q) = ½(|q|⁻² − |p|⁻²) det(p, q)`.
///
/// The integer determinant is formed first, so parallel vectors give an exact
/// zero regardless of the floating-point bracket.
pub fn coef_a(p: WaveVector, q: WaveVector) -> Result<f64> {
    p.require_nonzero()?;
    q.require_nonzero()?;
    Ok(coef_a_unchecked(p, q))
}

#[inline]
pub(crate) fn coef_a_unchecked(p: WaveVector, q: WaveVector) -> f64 {
    let det = p.det(q);
    if det == 0 {
        return 0.0;
    }
    0.5 * (1.0 / q.norm2() as f64 - 1.0 / p.norm2() as f64) * det as f64
}

/// Box-truncated Galerkin vector field `ω̇_k = Σ_{k=p+q} A(p,q) ω_p ω_q`, with
/// `p`, `q` and `k` all restricted to the truncation box.
pub fn galerkin_rhs(state: &CoefficientField) -> CoefficientField {
    let b = state.half_width() as i64;
    let mut out = CoefficientField::zeros(state.half_width());
    let support: Vec<(WaveVector, Complex64)> = state
        .iter()
        .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
        .collect();
    if support.is_empty() {
        return out;
    }
    for k in state
        .modes()
        .filter(|k| k.is_positive_half())
        .collect::<Vec<_>>()
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(p, wp) in &support {
            let q = k - p;
            if q.is_zero() || q.k1.abs() > b || q.k2.abs() > b {
                continue;
            }
            let wq = state.get(q);
            if wq.re == 0.0 && wq.im == 0.0 {
                continue;
            }
            acc += coef_a_unchecked(p, q) * wp * wq;
        }
        // k is nonzero and inside the box, so `set` cannot fail.
        out.set(k, acc).expect("mode in box");
    }
    out
}

/// `Σ |ω_k|² |k|⁻²` over every stored nonzero mode (each ±k pair counted twice).
pub fn energy(state: &CoefficientField) -> f64 {
    state
        .iter()
        .map(|(k, z)| z.norm_sqr() / k.norm2() as f64)
        .sum()
}

/// `Σ |ω_k|²` over every stored nonzero mode.
pub fn enstrophy(state: &CoefficientField) -> f64 {
    state.iter().map(|(_, z)| z.norm_sqr()).sum()
}

/// Time derivative of [`energy`] along `rate = galerkin_rhs(state)`.
pub fn energy_rate(state: &CoefficientField, rate: &CoefficientField) -> f64 {
    state
        .iter()
        .map(|(k, z)| 2.0 * (z.conj() * rate.get(k)).re / k.norm2() as f64)
        .sum()
}

/// Time derivative of [`enstrophy`] along `rate`.
pub fn enstrophy_rate(state: &CoefficientField, rate: &CoefficientField) -> f64 {
    state
        .iter()
        .map(|(k, z)| 2.0 * (z.conj() * rate.get(k)).re)
        .sum()
}

/// Output of [`integrate_galerkin`]: conserved-quantity history and the end state.
#[derive(Debug, Clone)]
pub struct GalerkinRun {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub enstrophy: Vec<f64>,
    pub final_state: CoefficientField,
}

impl GalerkinRun {
    pub fn max_relative_energy_drift(&self) -> f64 {
        relative_drift(&self.energy)
    }

    pub fn max_relative_enstrophy_drift(&self) -> f64 {
        relative_drift(&self.enstrophy)
    }
}

fn relative_drift(series: &[f64]) -> f64 {
    let Some(&first) = series.first() else {
        return 0.0;
    };
    if first == 0.0 {
        return series.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    series
        .iter()
        .map(|v| ((v - first) / first).abs())
        .fold(0.0, f64::max)
}

/// Classical RK4 on the Galerkin system, recording invariants every
/// `record_every` steps.
pub fn integrate_galerkin(
    state0: &CoefficientField,
    dt: f64,
    steps: usize,
    record_every: usize,
) -> Result<GalerkinRun> {
    if !(dt > 0.0) {
        return Err(Error::Precondition(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let record_every = record_every.max(1);
    let mut state = state0.clone();
    let mut run = GalerkinRun {
        times: vec![0.0],
        energy: vec![energy(&state)],
        enstrophy: vec![enstrophy(&state)],
        final_state: state0.clone(),
    };
    for step in 1..=steps {
        state = ode::rk4_step(&|s: &CoefficientField| galerkin_rhs(s), &state, dt);
        if !state
            .raw()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(Error::NonFinite { step });
        }
        if step % record_every == 0 || step == steps {
            run.times.push(step as f64 * dt);
            run.energy.push(energy(&state));
            run.enstrophy.push(enstrophy(&state));
        }
    }
    run.final_state = state;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wv(a: i64, b: i64) -> WaveVector {
        WaveVector::new(a, b)
    }

    #[test]
    fn coef_a_examples() {
        assert!((coef_a(wv(1, 1), wv(-2, -1)).unwrap() + 3.0 / 20.0).abs() < 1e-15);
        assert!((coef_a(wv(1, 1), wv(-1, 0)).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(coef_a(wv(2, 3), wv(4, 6)).unwrap(), 0.0);
        assert_eq!(coef_a(wv(1, 2), wv(2, 1)).unwrap(), 0.0);
        assert!(coef_a(WaveVector::ZERO, wv(1, 0)).is_err());
        assert!(coef_a(wv(1, 0), WaveVector::ZERO).is_err());
    }

    #[test]
    fn coef_a_exhaustive_symmetries() {
        let r = 10;
        let pts: Vec<_> = (-r..=r)
            .flat_map(|a| (-r..=r).map(move |b| wv(a, b)))
            .filter(|k| !k.is_zero() && k.norm2() <= r * r)
            .collect();
        for &p in &pts {
            for &q in &pts {
                let a = coef_a(p, q).unwrap();
                // swapping the arguments flips both the bracket and the determinant
                assert_eq!(a, coef_a(q, p).unwrap());
                // reversing only the determinant order flips the sign
                let flipped =
                    0.5 * (1.0 / q.norm2() as f64 - 1.0 / p.norm2() as f64) * q.det(p) as f64;
                assert_eq!(a, -flipped);
                if p.norm2() == q.norm2() || p.is_parallel(q) {
                    assert_eq!(a, 0.0);
                }
            }
        }
    }

    #[test]
    fn single_mode_is_fixed_point() {
        let mut f = CoefficientField::zeros(4);
        f.set(wv(1, 1), Complex64::new(0.7, -0.3)).unwrap();
        let r = galerkin_rhs(&f);
        assert!(r.iter().all(|(_, z)| z.norm() == 0.0));
        let r0 = galerkin_rhs(&CoefficientField::zeros(3));
        assert!(r0.iter().all(|(_, z)| z.norm() == 0.0));
    }

    #[test]
    fn invariants_of_single_pair() {
        let mut f = CoefficientField::zeros(2);
        f.set(wv(1, 1), Complex64::new(1.0, 0.0)).unwrap();
        assert!((energy(&f) - 1.0).abs() < 1e-15);
        assert!((enstrophy(&f) - 2.0).abs() < 1e-15);
        let g = f.scale(3.0);
        assert!((energy(&g) - 9.0).abs() < 1e-13);
        assert!((enstrophy(&g) - 18.0).abs() < 1e-13);
        let z = CoefficientField::zeros(2);
        assert_eq!((energy(&z), enstrophy(&z)), (0.0, 0.0));
    }
}
