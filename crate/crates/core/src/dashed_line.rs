//! The dashed-line model: the class `k̂ = (-3,-2)`, `p = (1,1)` of the Euler
//! interaction coupled back to the mode `ω_p`, with every fifth coupling
//! weakened by `ε`.
//!
//! At `ε = 0` the block `ω_1..ω_4` decouples and carries explicit heteroclinic
//! orbits between `±ω*`; [`analytic_heteroclinic`] evaluates them and
//! [`orbit_residual`] checks them against [`model_rhs`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{coef_a, WaveVector};
use crate::ode::{self, OdeState};

pub const DIRECTION: WaveVector = WaveVector::new(1, 1);
pub const BASE: WaveVector = WaveVector::new(-3, -2);

fn member(n: i64) -> WaveVector {
    BASE + n * DIRECTION
}

/// Model parameters with the interaction coefficients precomputed from
/// [`coef_a`].
#[derive(Debug, Clone, Serialize)]
pub struct DashedLineParams {
    pub gamma: f64,
    pub epsilon: f64,
    pub trunc: usize,
    /// `A_n = A(p, k̂+np)` for `n = -trunc-1 ..= trunc+1`.
    a_single: Vec<f64>,
    /// `A_{n-1,n}` for `n = -trunc ..= trunc+1`.
    a_pair: Vec<f64>,
}

impl DashedLineParams {
    pub fn new(gamma: f64, epsilon: f64, trunc: usize) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::Precondition(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::Precondition("gamma must be finite".into()));
        }
        let t = trunc as i64;
        let a_single = (-t - 1..=t + 1)
            .map(|n| coef_a(DIRECTION, member(n)))
            .collect::<Result<Vec<_>>>()?;
        let a_pair = (-t..=t + 1)
            .map(|n| coef_a(member(n - 1), member(n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            gamma,
            epsilon,
            trunc,
            a_single,
            a_pair,
        })
    }

    /// `A_n` for `|n| <= trunc + 1`.
    pub fn a(&self, n: i64) -> f64 {
        self.a_single[(n + self.trunc as i64 + 1) as usize]
    }

    /// `A_{n-1,n}` for `-trunc <= n <= trunc + 1`.
    pub fn a_pair(&self, n: i64) -> f64 {
        self.a_pair[(n + self.trunc as i64) as usize]
    }

    /// `ε_n`: `ε` on multiples of five, one elsewhere.
    pub fn eps_n(&self, n: i64) -> f64 {
        if n.rem_euclid(5) == 0 {
            self.epsilon
        } else {
            1.0
        }
    }

    pub fn a1(&self) -> f64 {
        self.a(1)
    }

    pub fn a2(&self) -> f64 {
        self.a(2)
    }

    /// `κ = ±√(−A₁A₂) √(1 + A₂/(4A₁))`.
    pub fn kappa(&self, sign: KappaSign) -> f64 {
        let (a1, a2) = (self.a1(), self.a2());
        sign.value() * (-a1 * a2).sqrt() * (1.0 + a2 / (4.0 * a1)).sqrt()
    }

    /// Number of lattice modes `ω_{-T..T}`; never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        2 * self.trunc + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DashedLineState {
    pub omega_p: f64,
    /// `ω_n` for `n = -trunc ..= trunc`.
    pub omega_n: Vec<f64>,
}

impl DashedLineState {
    pub fn zeros(params: &DashedLineParams) -> Self {
        Self {
            omega_p: 0.0,
            omega_n: vec![0.0; params.len()],
        }
    }

    /// The fixed point `ω_p = Γ`, `ω_n = 0`.
    pub fn fixed_point(params: &DashedLineParams) -> Self {
        Self {
            omega_p: params.gamma,
            ..Self::zeros(params)
        }
    }

    pub fn trunc(&self) -> i64 {
        (self.omega_n.len() / 2) as i64
    }

    /// `ω_n`, zero outside the truncation.
    pub fn get(&self, n: i64) -> f64 {
        let t = self.trunc();
        if n.abs() > t {
            0.0
        } else {
            self.omega_n[(n + t) as usize]
        }
    }

    pub fn set(&mut self, n: i64, value: f64) {
        let t = self.trunc();
        assert!(n.abs() <= t, "mode {n} outside truncation {t}");
        self.omega_n[(n + t) as usize] = value;
    }

    /// `ω_p² + Σ ω_n²`.
    pub fn quadratic_sum(&self) -> f64 {
        self.omega_p * self.omega_p + self.omega_n.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.omega_n
            .iter()
            .zip(&other.omega_n)
            .map(|(a, b)| (a - b).abs())
            .fold((self.omega_p - other.omega_p).abs(), f64::max)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.omega_n.len() + 1);
        v.push(self.omega_p);
        v.extend_from_slice(&self.omega_n);
        v
    }

    pub fn from_vec(v: &[f64]) -> Self {
        Self {
            omega_p: v[0],
            omega_n: v[1..].to_vec(),
        }
    }
}

impl OdeState for DashedLineState {
    fn axpy(&self, c: f64, other: &Self) -> Self {
        Self {
            omega_p: self.omega_p + c * other.omega_p,
            omega_n: self
                .omega_n
                .iter()
                .zip(&other.omega_n)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    fn all_finite(&self) -> bool {
        self.omega_p.is_finite() && self.omega_n.iter().all(|v| v.is_finite())
    }
}

/// Vector field of the dashed-line model; modes beyond the truncation are zero.
pub fn model_rhs(state: &DashedLineState, params: &DashedLineParams) -> DashedLineState {
    let t = params.trunc as i64;
    let wp = state.omega_p;
    let mut out = DashedLineState::zeros(params);
    for n in -t..=t {
        let lower = params.eps_n(n - 1) * params.a(n - 1) * wp * state.get(n - 1);
        let upper = params.eps_n(n + 1) * params.a(n + 1) * wp * state.get(n + 1);
        out.set(n, lower - upper);
    }
    out.omega_p = -(-t + 1..=t)
        .map(|n| {
            params.eps_n(n)
                * params.eps_n(n - 1)
                * params.a_pair(n)
                * state.get(n - 1)
                * state.get(n)
        })
        .sum::<f64>();
    out
}

/// Jacobian of [`model_rhs`] in the ordering `(ω_p, ω_{-T}, ..., ω_T)`.
pub fn model_jacobian(
    state: &DashedLineState,
    params: &DashedLineParams,
) -> nalgebra::DMatrix<f64> {
    let t = params.trunc as i64;
    let dim = params.len() + 1;
    let col = |n: i64| (n + t) as usize + 1;
    let mut j = nalgebra::DMatrix::zeros(dim, dim);
    let wp = state.omega_p;
    for n in -t..=t {
        let row = col(n);
        let lo = params.eps_n(n - 1) * params.a(n - 1);
        let hi = params.eps_n(n + 1) * params.a(n + 1);
        j[(row, 0)] = lo * state.get(n - 1) - hi * state.get(n + 1);
        if n > -t {
            j[(row, col(n - 1))] = lo * wp;
        }
        if n < t {
            j[(row, col(n + 1))] = -hi * wp;
        }
    }
    for n in -t + 1..=t {
        let w = params.eps_n(n) * params.eps_n(n - 1) * params.a_pair(n);
        j[(0, col(n - 1))] -= w * state.get(n);
        j[(0, col(n))] -= w * state.get(n - 1);
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KappaSign {
    Positive,
    Negative,
}

impl KappaSign {
    pub fn value(self) -> f64 {
        match self {
            KappaSign::Positive => 1.0,
            KappaSign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeteroclinicParams {
    pub tau0: f64,
    pub theta0: f64,
    pub kappa_sign: KappaSign,
}

/// Point on an explicit heteroclinic orbit, with its polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeteroclinicPoint {
    pub tau: f64,
    pub omega_p: f64,
    /// `ω_0 ..= ω_5`; `ω_0` and `ω_5` are the driven auxiliary modes.
    pub omega: [f64; 6],
    pub r: f64,
    pub rho: f64,
    pub theta: f64,
    pub vartheta: f64,
}

impl HeteroclinicPoint {
    /// Embeds the point in a full model state (other modes zero).
    pub fn to_state(&self, params: &DashedLineParams) -> Result<DashedLineState> {
        if params.trunc < 5 {
            return Err(Error::Precondition(format!(
                "truncation {} does not hold modes 0..5",
                params.trunc
            )));
        }
        let mut s = DashedLineState::zeros(params);
        s.omega_p = self.omega_p;
        for (n, &v) in self.omega.iter().enumerate() {
            s.set(n as i64, v);
        }
        Ok(s)
    }
}

/// Closed-form heteroclinic orbit of the `ε = 0` model at time `t`.
///
/// `τ = κΓt + τ₀`; `ω_p = Γ tanh τ`, `r = √(A₂/(A₂−A₁)) Γ sech τ`,
/// `ρ = √(−A₁/A₂) r`, `θ = −(A₂/2κ) ln cosh τ + θ₀`, and `θ + ϑ` is the
/// branch constant selected by the sign of `κ`.
pub fn analytic_heteroclinic(
    t: f64,
    het: &HeteroclinicParams,
    gamma: f64,
    params: &DashedLineParams,
) -> HeteroclinicPoint {
    let (a1, a2) = (params.a1(), params.a2());
    let kappa = params.kappa(het.kappa_sign);
    let tau = kappa * gamma * t + het.tau0;
    let sech = 1.0 / tau.cosh();
    let ln_cosh = ln_cosh(tau);
    let r = (a2 / (a2 - a1)).sqrt() * gamma * sech;
    let rho = (-a1 / a2).sqrt() * r;
    let theta = -(a2 / (2.0 * kappa)) * ln_cosh + het.theta0;
    let branch = (0.5 * (a2 / -a1).sqrt()).asin();
    let sum = match het.kappa_sign {
        KappaSign::Positive => -branch,
        KappaSign::Negative => std::f64::consts::PI + branch,
    };
    let vartheta = sum - theta;

    let alpha = -a1 * gamma / kappa * (a2 / (a2 - a1)).sqrt();
    let beta = -a2 / (2.0 * kappa);
    let phase = beta * ln_cosh + het.theta0;
    let amp = alpha * beta / (1.0 + beta * beta) * sech;
    let omega0 = amp * (phase.sin() - phase.cos() / beta);
    let omega5 = amp * (phase.cos() + phase.sin() / beta);

    HeteroclinicPoint {
        tau,
        omega_p: gamma * tau.tanh(),
        omega: [
            omega0,
            r * theta.cos(),
            rho * vartheta.cos(),
            rho * vartheta.sin(),
            r * theta.sin(),
            omega5,
        ],
        r,
        rho,
        theta,
        vartheta,
    }
}

/// `ln cosh τ` without overflow for large `|τ|`.
fn ln_cosh(tau: f64) -> f64 {
    let a = tau.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Central finite-difference stencils for the oracle derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    ThreePoint,
    FivePoint,
}

/// Default oracle step in `t`.
pub const ORACLE_STEP: f64 = 1e-4;

/// Max over samples of `|model_rhs(orbit(t)) − d/dt orbit(t)|` on the
/// components `ω_p, ω_0..ω_5`, with the derivative from a five-point stencil.
pub fn orbit_residual(het: &HeteroclinicParams, gamma: f64, t_samples: &[f64]) -> Result<f64> {
    orbit_residual_with(het, gamma, t_samples, Stencil::FivePoint, ORACLE_STEP)
}

pub fn orbit_residual_with(
    het: &HeteroclinicParams,
    gamma: f64,
    t_samples: &[f64],
    stencil: Stencil,
    step: f64,
) -> Result<f64> {
    // smallest truncation holding the block and both auxiliaries
    let params = DashedLineParams::new(gamma, 0.0, 6)?;
    let eval = |t: f64| {
        let p = analytic_heteroclinic(t, het, gamma, &params);
        let mut v = vec![p.omega_p];
        v.extend_from_slice(&p.omega);
        v
    };
    let mut worst: f64 = 0.0;
    for &t in t_samples {
        let point = analytic_heteroclinic(t, het, gamma, &params);
        let rhs = model_rhs(&point.to_state(&params)?, &params);
        let fd: Vec<f64> = match stencil {
            Stencil::ThreePoint => {
                let (a, b) = (eval(t + step), eval(t - step));
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y) / (2.0 * step))
                    .collect()
            }
            Stencil::FivePoint => {
                let (a2, a1, b1, b2) = (
                    eval(t + 2.0 * step),
                    eval(t + step),
                    eval(t - step),
                    eval(t - 2.0 * step),
                );
                (0..a1.len())
                    .map(|i| (-a2[i] + 8.0 * a1[i] - 8.0 * b1[i] + b2[i]) / (12.0 * step))
                    .collect()
            }
        };
        worst = worst.max((rhs.omega_p - fd[0]).abs());
        for n in 0..6 {
            worst = worst.max((rhs.get(n as i64) - fd[n + 1]).abs());
        }
        // the heteroclinic lives in modes 0..5: the model must not drive others
        for n in -(params.trunc as i64)..=(params.trunc as i64) {
            if !(0..=5).contains(&n) {
                worst = worst.max(rhs.get(n).abs());
            }
        }
    }
    Ok(worst)
}

/// Samples `t` so that `τ` runs uniformly over `[tau_lo, tau_hi]`.
pub fn tau_samples(
    het: &HeteroclinicParams,
    gamma: f64,
    tau_lo: f64,
    tau_hi: f64,
    count: usize,
) -> Result<Vec<f64>> {
    let params = DashedLineParams::new(gamma, 0.0, 6)?;
    let rate = params.kappa(het.kappa_sign) * gamma;
    if rate == 0.0 {
        return Ok(vec![0.0; count]);
    }
    Ok((0..count)
        .map(|i| {
            let tau = if count == 1 {
                tau_lo
            } else {
                tau_lo + (tau_hi - tau_lo) * i as f64 / (count - 1) as f64
            };
            (tau - het.tau0) / rate
        })
        .collect())
}

/// Fixed-step RK4 trajectory, recorded every `record_every` steps.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DashedLineState>,
}

pub fn integrate(
    state0: &DashedLineState,
    params: &DashedLineParams,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    integrate_sampled(state0, params, dt, steps, 1)
}

pub fn integrate_sampled(
    state0: &DashedLineState,
    params: &DashedLineParams,
    dt: f64,
    steps: usize,
    record_every: usize,
) -> Result<Trajectory> {
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::Precondition(format!(
            "dt must be finite and nonzero, got {dt}"
        )));
    }
    if state0.omega_n.len() != params.len() {
        return Err(Error::Precondition(
            "state does not match the truncation".into(),
        ));
    }
    let every = record_every.max(1);
    let f = |s: &DashedLineState| model_rhs(s, params);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![state0.clone()],
    };
    let mut s = state0.clone();
    for step in 1..=steps {
        s = ode::rk4_step(&f, &s, dt);
        if !s.all_finite() {
            return Err(Error::NonFinite { step });
        }
        if step % every == 0 || step == steps {
            traj.times.push(step as f64 * dt);
            traj.states.push(s.clone());
        }
    }
    Ok(traj)
}

/// Time-`period` flow map of the model (RK4 with `substeps` steps).
pub fn flow_map(
    state: &DashedLineState,
    params: &DashedLineParams,
    period: f64,
    substeps: usize,
) -> Result<DashedLineState> {
    let f = |s: &DashedLineState| model_rhs(s, params);
    ode::rk4_advance(&f, state, period / substeps as f64, substeps)
        .map_err(|step| Error::NonFinite { step })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn het(sign: KappaSign) -> HeteroclinicParams {
        HeteroclinicParams {
            tau0: 0.0,
            theta0: 0.4,
            kappa_sign: sign,
        }
    }

    #[test]
    fn coefficients_come_from_coef_a() {
        let p = DashedLineParams::new(1.0, 0.0, 10).unwrap();
        assert!((p.a1() + 3.0 / 20.0).abs() < 1e-15);
        assert!((p.a2() - 0.25).abs() < 1e-15);
        let k2 = p.kappa(KappaSign::Positive).powi(2);
        assert!(k2 > 0.0);
        assert!((k2 - (-p.a1() * p.a2()) * (1.0 + p.a2() / (4.0 * p.a1()))).abs() < 1e-16);
        assert_eq!(p.eps_n(-5), 0.0);
        assert_eq!(p.eps_n(3), 1.0);
    }

    #[test]
    fn fixed_line_is_stationary() {
        for &(g, e) in &[(1.0, 0.0), (-2.5, 0.3), (0.7, 1.0)] {
            let p = DashedLineParams::new(g, e, 8).unwrap();
            let d = model_rhs(&DashedLineState::fixed_point(&p), &p);
            assert_eq!(d.omega_p, 0.0);
            assert!(d.omega_n.iter().all(|&v| v == 0.0));
        }
        let p = DashedLineParams::new(1.0, 0.2, 4).unwrap();
        let d = model_rhs(&DashedLineState::zeros(&p), &p);
        assert_eq!(d.quadratic_sum(), 0.0);
    }

    #[test]
    fn rhs_matches_independent_double_loop() {
        let p = DashedLineParams::new(1.3, 1.0, 6).unwrap();
        let mut s = DashedLineState::zeros(&p);
        s.omega_p = 0.37;
        for n in -6..=6 {
            s.set(n, ((n * 7 + 3) as f64).sin());
        }
        let got = model_rhs(&s, &p);
        // independent evaluation straight from lattice vectors
        let a = |x: WaveVector, y: WaveVector| {
            0.5 * (1.0 / y.norm2() as f64 - 1.0 / x.norm2() as f64)
                * (x.k1 * y.k2 - x.k2 * y.k1) as f64
        };
        let w = |n: i64| {
            if n.abs() <= 6 {
                s.omega_n[(n + 6) as usize]
            } else {
                0.0
            }
        };
        for n in -6i64..=6 {
            let mut v = 0.0;
            for (m, sign) in [(n - 1, 1.0), (n + 1, -1.0)] {
                v += sign * a(DIRECTION, BASE + m * DIRECTION) * s.omega_p * w(m);
            }
            assert!((v - got.get(n)).abs() < 1e-14);
        }
        let mut vp = 0.0;
        for m in -6i64..=6 {
            for n in -6i64..=6 {
                if n == m + 1 {
                    vp -= a(BASE + m * DIRECTION, BASE + n * DIRECTION) * w(m) * w(n);
                }
            }
        }
        assert!((vp - got.omega_p).abs() < 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = DashedLineParams::new(0.8, 0.3, 5).unwrap();
        let mut s = DashedLineState::zeros(&p);
        s.omega_p = -0.6;
        for n in -5..=5 {
            s.set(n, 0.1 * (n as f64).cos());
        }
        let j = model_jacobian(&s, &p);
        let base = s.to_vec();
        let h = 1e-6;
        for c in 0..base.len() {
            let mut up = base.clone();
            let mut dn = base.clone();
            up[c] += h;
            dn[c] -= h;
            let fu = model_rhs(&DashedLineState::from_vec(&up), &p).to_vec();
            let fd = model_rhs(&DashedLineState::from_vec(&dn), &p).to_vec();
            for r in 0..base.len() {
                assert!((j[(r, c)] - (fu[r] - fd[r]) / (2.0 * h)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn analytic_orbit_limits_and_polar_relations() {
        let p = DashedLineParams::new(1.0, 0.0, 10).unwrap();
        let h = het(KappaSign::Positive);
        let far = analytic_heteroclinic(1e4, &h, 1.0, &p);
        assert!((far.omega_p - 1.0).abs() < 1e-12);
        assert!(far.omega.iter().all(|v| v.abs() < 1e-12));

        let at0 = analytic_heteroclinic(0.0, &h, 1.0, &p);
        assert_eq!(at0.tau, 0.0);
        assert!((at0.r - (5.0f64 / 8.0).sqrt()).abs() < 1e-15);
        assert!((at0.rho / at0.r - (3.0f64 / 5.0).sqrt()).abs() < 1e-15);

        for t in [-30.0, -2.0, 0.3, 7.0] {
            for sign in [KappaSign::Positive, KappaSign::Negative] {
                let q = analytic_heteroclinic(t, &het(sign), 1.7, &p);
                let w = q.omega;
                assert!((w[1] * w[1] + w[4] * w[4] - q.r * q.r).abs() < 1e-14);
                assert!((w[2] * w[2] + w[3] * w[3] - q.rho * q.rho).abs() < 1e-14);
                assert!((q.rho * q.rho - (-p.a1() / p.a2()) * q.r * q.r).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reflection_flips_omega_p() {
        let p = DashedLineParams::new(1.0, 0.0, 10).unwrap();
        let a = HeteroclinicParams {
            tau0: 0.8,
            ..het(KappaSign::Positive)
        };
        let b = HeteroclinicParams { tau0: -0.8, ..a };
        for t in [-3.0, 0.5, 4.0] {
            let x = analytic_heteroclinic(t, &a, 1.0, &p);
            let y = analytic_heteroclinic(-t, &b, 1.0, &p);
            assert!((x.omega_p + y.omega_p).abs() < 1e-15);
        }
    }

    #[test]
    fn residual_examples() {
        let h = het(KappaSign::Positive);
        let ts = tau_samples(&h, 1.0, -5.0, 5.0, 100).unwrap();
        let r5 = orbit_residual(&h, 1.0, &ts).unwrap();
        assert!(r5 < 1e-7, "{r5}");
        let r0 = orbit_residual(&h, 0.0, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(r0, 0.0);
        let r3 = orbit_residual_with(&h, 1.0, &ts, Stencil::ThreePoint, 1e-3).unwrap();
        let r5c = orbit_residual_with(&h, 1.0, &ts, Stencil::FivePoint, 1e-3).unwrap();
        assert!(r5c < 0.5 * r3, "{r5c} vs {r3}");
    }
}
