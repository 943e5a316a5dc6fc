//! Fixed-step classical Runge–Kutta integration over simple vector states.

use num_complex::Complex64;

use crate::fourier::CoefficientField;

/// Minimal linear structure needed by [`rk4_step`].
pub trait OdeState: Clone {
    /// `self + c * other`.
    fn axpy(&self, c: f64, other: &Self) -> Self;
    fn all_finite(&self) -> bool;
}

impl OdeState for Vec<f64> {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + c * b).collect()
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl OdeState for Vec<Complex64> {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + b * c).collect()
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl OdeState for CoefficientField {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        CoefficientField::axpy(self, c, other)
    }
    fn all_finite(&self) -> bool {
        self.raw()
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// One classical fourth-order Runge–Kutta step of `y' = f(y)`.
pub fn rk4_step<S: OdeState, F: Fn(&S) -> S>(f: &F, y: &S, dt: f64) -> S {
    let k1 = f(y);
    let k2 = f(&y.axpy(0.5 * dt, &k1));
    let k3 = f(&y.axpy(0.5 * dt, &k2));
    let k4 = f(&y.axpy(dt, &k3));
    y.axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4)
}

/// `steps` RK4 steps; returns the end state or the index of the first step
/// producing a non-finite value.
pub fn rk4_advance<S: OdeState, F: Fn(&S) -> S>(
    f: &F,
    y0: &S,
    dt: f64,
    steps: usize,
) -> Result<S, usize> {
    let mut y = y0.clone();
    for step in 1..=steps {
        y = rk4_step(f, &y, dt);
        if !y.all_finite() {
            return Err(step);
        }
    }
    Ok(y)
}
