//! Perturbed discrete cubic NLS on an even periodic lattice: saddle and
//! eigenvalue formulas of the continuum limit, the uniform lattice saddle
//! with its Jacobian, fixed-step simulation and center/wing symbolics.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::ode::{self, OdeState};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NLSParams {
    pub n: usize,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl NLSParams {
    pub fn new(n: usize, omega: f64, alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Precondition(format!(
                "lattice size must be >= 3, got {n}"
            )));
        }
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::Precondition(
                "alpha and beta must be positive".into(),
            ));
        }
        if !(epsilon >= 0.0) || !omega.is_finite() {
            return Err(Error::Precondition(
                "epsilon must be >= 0 and omega finite".into(),
            ));
        }
        Ok(Self {
            n,
            omega,
            alpha,
            beta,
            epsilon,
        })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// `(N tan(π/N), N tan(2π/N))`; unbounded above for `N = 3`.
    pub fn window(&self) -> (f64, f64) {
        let nf = self.n as f64;
        let lo = nf * (std::f64::consts::PI / nf).tan();
        let hi = if self.n > 3 {
            nf * (2.0 * std::f64::consts::PI / nf).tan()
        } else {
            f64::INFINITY
        };
        (lo, hi)
    }

    pub fn in_window(&self) -> bool {
        let (lo, hi) = self.window();
        self.omega > lo && self.omega < hi
    }

    /// Largest step allowed by the explicit stability bound `0.1 h²`.
    pub fn max_dt(&self) -> f64 {
        0.1 * self.h() * self.h()
    }
}

/// Lattice state `q_0..q_{N-1}`, even under `n → N−n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NLSLatticeState {
    q: Vec<Complex64>,
}

impl NLSLatticeState {
    /// Accepts a nearly even vector and makes it exactly even.
    pub fn new(q: Vec<Complex64>) -> Result<Self> {
        let n = q.len();
        if n < 3 {
            return Err(Error::Precondition(format!(
                "lattice size must be >= 3, got {n}"
            )));
        }
        let scale = 1.0 + q.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut s = Self { q };
        let defect = s.evenness_defect();
        if !(defect <= 1e-12 * scale) {
            return Err(Error::Precondition(format!(
                "state is not even (defect {defect:e})"
            )));
        }
        for k in 1..n {
            let m = n - k;
            if m < k {
                s.q[k] = s.q[m];
            }
        }
        Ok(s)
    }

    /// Builds the even state from `q_0..q_{⌊N/2⌋}`.
    pub fn from_half(n: usize, half: &[Complex64]) -> Result<Self> {
        if half.len() != n / 2 + 1 {
            return Err(Error::Precondition(format!(
                "expected {} independent values for N = {n}, got {}",
                n / 2 + 1,
                half.len()
            )));
        }
        Self::new((0..n).map(|k| half[k.min(n - k)]).collect())
    }

    pub fn uniform(n: usize, value: Complex64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.q
    }

    pub fn evenness_defect(&self) -> f64 {
        evenness_defect(&self.q)
    }

    /// Translation by half a spatial period, `n → n + N/2`.
    pub fn half_period_translate(&self) -> Result<Self> {
        let n = self.q.len();
        if !n.is_multiple_of(2) {
            return Err(Error::Precondition(format!(
                "half-period translation needs even N, got {n}"
            )));
        }
        Ok(Self {
            q: (0..n).map(|k| self.q[(k + n / 2) % n]).collect(),
        })
    }

    /// `h Σ |q_n|²`.
    pub fn mass(&self) -> f64 {
        self.q.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.q.len() as f64
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub fn evenness_defect(q: &[Complex64]) -> f64 {
    let n = q.len();
    (1..n).map(|k| (q[k] - q[n - k]).norm()).fold(0.0, f64::max)
}

/// `q̇` for the perturbed lattice, in the form `iq̇ = X + iεY`.
pub fn pdnls_rhs(state: &NLSLatticeState, p: &NLSParams) -> Result<NLSLatticeState> {
    if state.len() != p.n {
        return Err(Error::Precondition(format!(
            "state has {} sites, params expect {}",
            state.len(),
            p.n
        )));
    }
    Ok(NLSLatticeState {
        q: rhs_raw(&state.q, p),
    })
}

fn rhs_raw(q: &[Complex64], p: &NLSParams) -> Vec<Complex64> {
    let n = q.len();
    let inv_h2 = (n * n) as f64;
    let w2 = p.omega * p.omega;
    (0..n)
        .map(|k| {
            let qp = q[(k + 1) % n];
            let qm = q[(k + n - 1) % n];
            let qk = q[k];
            let nb = qp + qm;
            let lap = (nb - 2.0 * qk) * inv_h2;
            let x = lap + qk.norm_sqr() * nb - 2.0 * w2 * qk;
            let y = -p.alpha * qk + lap + p.beta;
            -I * x + p.epsilon * y
        })
        .collect()
}

/// Continuum saddle amplitude `I` and phase `θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleInfo {
    #[serde(rename = "I")]
    pub i: f64,
    pub theta: f64,
    pub eigenvalues: Vec<ModeEigenvalue>,
}

/// Leading-order saddle: `I = ω² − (ε/2ω)√(β² − α²ω²)`, `cos θ = α√I/β`.
pub fn continuum_saddle(p: &NLSParams) -> Result<SaddleInfo> {
    let aw = p.alpha * p.omega;
    if !(aw < p.beta) {
        return Err(Error::Domain(format!(
            "saddle needs alpha*omega < beta, got {aw} >= {}",
            p.beta
        )));
    }
    let i = p.omega * p.omega - p.epsilon / (2.0 * p.omega) * (p.beta * p.beta - aw * aw).sqrt();
    if !(i > 0.0) {
        return Err(Error::Domain(format!(
            "saddle amplitude is not positive: I = {i}"
        )));
    }
    let c = p.alpha * i.sqrt() / p.beta;
    Ok(SaddleInfo {
        i,
        theta: c.acos(),
        eigenvalues: Vec::new(),
    })
}

/// Mollifier `ξ_n` in the dissipation `ε ξ_n n²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XiVariant {
    /// `ξ_n = 1` up to `n_cut`, `8/n²` beyond.
    Regular { n_cut: usize },
    /// `ξ_n = 1` for every `n`.
    Singular,
}

impl Default for XiVariant {
    fn default() -> Self {
        XiVariant::Regular { n_cut: 10 }
    }
}

impl XiVariant {
    pub fn xi(&self, n: usize) -> f64 {
        match *self {
            XiVariant::Regular { n_cut } if n > n_cut => 8.0 / (n * n) as f64,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeEigenvalue {
    pub mode: usize,
    pub value: Complex64,
}

/// `λ_n^± = −ε[α + ξ_n n²] ± 2√((n²/2 + ω² − I)(3I − ω² − n²/2))`.
pub fn continuum_eigenvalues(
    n: usize,
    p: &NLSParams,
    i: f64,
    variant: XiVariant,
) -> (Complex64, Complex64) {
    let nf = n as f64;
    let half_n2 = 0.5 * nf * nf;
    let w2 = p.omega * p.omega;
    let disc = (half_n2 + w2 - i) * (3.0 * i - w2 - half_n2);
    let root = if disc >= 0.0 {
        Complex64::new(2.0 * disc.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, 2.0 * (-disc).sqrt())
    };
    let damp = Complex64::new(-p.epsilon * (p.alpha + variant.xi(n) * nf * nf), 0.0);
    (damp + root, damp - root)
}

/// Both eigenvalues of every mode `0..=n_max`, tagged by mode.
pub fn continuum_spectrum(
    p: &NLSParams,
    i: f64,
    variant: XiVariant,
    n_max: usize,
) -> Vec<ModeEigenvalue> {
    (0..=n_max)
        .flat_map(|n| {
            let (a, b) = continuum_eigenvalues(n, p, i, variant);
            [
                ModeEigenvalue { mode: n, value: a },
                ModeEigenvalue { mode: n, value: b },
            ]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SilnikovReport {
    pub two_unstable: bool,
    pub lambda2_minimal: bool,
    pub lambda2_below_lambda0: bool,
}

impl SilnikovReport {
    pub fn all(&self) -> bool {
        self.two_unstable && self.lambda2_minimal && self.lambda2_below_lambda0
    }
}

/// Silnikov orderings on a mode-tagged spectrum.
pub fn silnikov_check(eigs: &[ModeEigenvalue]) -> SilnikovReport {
    let two_unstable = eigs.iter().filter(|e| e.value.re > 0.0).count() == 2;
    let top = |mode: usize| {
        eigs.iter()
            .filter(|e| e.mode == mode)
            .map(|e| e.value.re)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let re2 = top(2);
    let re0 = top(0);
    let lambda2_minimal = re2 < 0.0
        && eigs
            .iter()
            .filter(|e| e.value.re < 0.0)
            .all(|e| re2.abs() <= e.value.re.abs());
    let lambda2_below_lambda0 = re2.is_finite() && re0.is_finite() && re2.abs() < re0;
    SilnikovReport {
        two_unstable,
        lambda2_minimal,
        lambda2_below_lambda0,
    }
}

/// Right-hand side `αω Δγ / (2 sin(Δγ/2))` of the second-measurement zero.
pub fn second_measurement(alpha: f64, omega: f64, delta_gamma: f64) -> Result<f64> {
    if delta_gamma == 0.0 {
        return Ok(alpha * omega);
    }
    let s = (0.5 * delta_gamma).sin();
    let turns = delta_gamma / (2.0 * std::f64::consts::PI);
    if s == 0.0 || (turns - turns.round()).abs() < 1e-14 {
        return Err(Error::Domain(format!(
            "pole at delta_gamma = {delta_gamma}"
        )));
    }
    Ok(alpha * omega * delta_gamma / (2.0 * s))
}

/// Uniform saddle of the lattice with Jacobian spectra.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteSaddle {
    pub state: NLSLatticeState,
    pub amplitude: Complex64,
    /// Jacobian on the even subspace `q_0..q_{⌊N/2⌋}`.
    pub even_eigenvalues: Vec<Complex64>,
    /// Jacobian on all `2N` real coordinates.
    pub full_eigenvalues: Vec<Complex64>,
    pub newton_iterations: usize,
}

impl DiscreteSaddle {
    pub fn unstable_count(&self, tol: f64) -> usize {
        self.even_eigenvalues.iter().filter(|l| l.re > tol).count()
    }
}

/// Newton solve for the uniform fixed point `Q`, seeded from the continuum
/// saddle; at `ε = 0` the circle of fixed points is pinned at `θ = arccos(αω/β)`.
pub fn discrete_saddle(p: &NLSParams) -> Result<DiscreteSaddle> {
    if !p.in_window() {
        let (lo, hi) = p.window();
        return Err(Error::Precondition(format!(
            "omega = {} outside the window ({lo}, {hi}) for N = {}",
            p.omega, p.n
        )));
    }
    let seed = continuum_saddle(p)?;
    let mut q = Complex64::from_polar(seed.i.sqrt(), seed.theta);
    let mut iterations = 0;
    if p.epsilon > 0.0 {
        let g = |q: Complex64| {
            let v = rhs_raw(&[q, q, q], p)[0];
            (v.re, v.im)
        };
        let mut converged = false;
        for it in 0..50 {
            iterations = it + 1;
            let (fr, fi) = g(q);
            if fr.hypot(fi) < 1e-14 * (1.0 + q.norm()) {
                converged = true;
                break;
            }
            let (a, b) = uniform_derivative(q, p);
            // real 2x2 Jacobian of q ↦ a q + b q̄
            let j = [[a.re + b.re, -a.im + b.im], [a.im + b.im, a.re - b.re]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dx = (j[1][1] * fr - j[0][1] * fi) / det;
            let dy = (-j[1][0] * fr + j[0][0] * fi) / det;
            q -= Complex64::new(dx, dy);
        }
        if !converged {
            let (fr, fi) = g(q);
            return Err(Error::NewtonDivergence {
                iterations,
                last: Complex64::new(fr, fi),
            });
        }
    }
    let state = NLSLatticeState::uniform(p.n, q)?;
    let full = jacobian(&state, p)?;
    let even = even_jacobian(&state, p)?;
    Ok(DiscreteSaddle {
        even_eigenvalues: linalg::real_eigenvalues(&even)?,
        full_eigenvalues: linalg::real_eigenvalues(&full)?,
        state,
        amplitude: q,
        newton_iterations: iterations,
    })
}

/// Linear and antilinear parts of the uniform-state derivative with respect
/// to a uniform perturbation.
fn uniform_derivative(q: Complex64, p: &NLSParams) -> (Complex64, Complex64) {
    let w2 = p.omega * p.omega;
    let a = -I * (4.0 * q.norm_sqr() - 2.0 * w2) - p.epsilon * p.alpha;
    let b = -I * (2.0 * q * q);
    (a, b)
}

/// Adds `d q̇_row = a δq_col + b δq̄_col` to a real Jacobian with ordering
/// `(Re q_0, Im q_0, Re q_1, ...)`.
fn add_block(j: &mut DMatrix<f64>, row: usize, col: usize, a: Complex64, b: Complex64) {
    let (r, c) = (2 * row, 2 * col);
    j[(r, c)] += a.re + b.re;
    j[(r, c + 1)] += -a.im + b.im;
    j[(r + 1, c)] += a.im + b.im;
    j[(r + 1, c + 1)] += a.re - b.re;
}

/// Analytic `2N × 2N` real Jacobian of [`pdnls_rhs`].
pub fn jacobian(state: &NLSLatticeState, p: &NLSParams) -> Result<DMatrix<f64>> {
    let n = state.len();
    if n != p.n {
        return Err(Error::Precondition("state does not match params".into()));
    }
    let q = &state.q;
    let inv_h2 = (n * n) as f64;
    let w2 = p.omega * p.omega;
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    let zero = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let kp = (k + 1) % n;
        let km = (k + n - 1) % n;
        let nb = q[kp] + q[km];
        // iq̇ = X + iεY with X, Y differentiated site by site
        let dx_self = Complex64::new(-2.0 * inv_h2 - 2.0 * w2, 0.0) + q[k].conj() * nb;
        let dx_self_bar = q[k] * nb;
        let dx_nb = Complex64::new(inv_h2 + q[k].norm_sqr(), 0.0);
        let dy_self = -p.alpha - 2.0 * inv_h2;
        let dy_nb = inv_h2;
        add_block(
            &mut j,
            k,
            k,
            -I * dx_self + p.epsilon * dy_self,
            -I * dx_self_bar,
        );
        for m in [kp, km] {
            add_block(&mut j, k, m, -I * dx_nb + p.epsilon * dy_nb, zero);
        }
    }
    Ok(j)
}

/// Jacobian restricted to the invariant even subspace, in the coordinates
/// `(Re q_0, Im q_0, ..., Re q_M, Im q_M)`, `M = ⌊N/2⌋`.
pub fn even_jacobian(state: &NLSLatticeState, p: &NLSParams) -> Result<DMatrix<f64>> {
    let full = jacobian(state, p)?;
    let n = state.len();
    let m = n / 2 + 1;
    let mut out = DMatrix::zeros(2 * m, 2 * m);
    for r in 0..m {
        for k in 0..n {
            let c = k.min(n - k);
            for a in 0..2 {
                for b in 0..2 {
                    out[(2 * r + a, 2 * c + b)] += full[(2 * r + a, 2 * k + b)];
                }
            }
        }
    }
    Ok(out)
}

/// Central finite-difference Jacobian of [`pdnls_rhs`] in the real ordering.
pub fn finite_difference_jacobian(
    state: &NLSLatticeState,
    p: &NLSParams,
    step: f64,
) -> DMatrix<f64> {
    let n = state.len();
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for c in 0..2 * n {
        let dir = if c % 2 == 0 {
            Complex64::new(step, 0.0)
        } else {
            Complex64::new(0.0, step)
        };
        let mut up = state.q.clone();
        let mut dn = state.q.clone();
        up[c / 2] += dir;
        dn[c / 2] -= dir;
        let fu = rhs_raw(&up, p);
        let fd = rhs_raw(&dn, p);
        for r in 0..n {
            let d = (fu[r] - fd[r]) / (2.0 * step);
            j[(2 * r, c)] = d.re;
            j[(2 * r + 1, c)] = d.im;
        }
    }
    j
}

/// Sampled trajectory with per-sample diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct NLSTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<NLSLatticeState>,
    pub mass: Vec<f64>,
    pub max_amplitude: Vec<f64>,
}

impl NLSTrajectory {
    pub fn half_period_translate(&self) -> Result<Self> {
        Ok(Self {
            states: self
                .states
                .iter()
                .map(|s| s.half_period_translate())
                .collect::<Result<_>>()?,
            ..self.clone()
        })
    }
}

pub fn simulate(
    state0: &NLSLatticeState,
    p: &NLSParams,
    dt: f64,
    steps: usize,
) -> Result<NLSTrajectory> {
    simulate_sampled(state0, p, dt, steps, 1)
}

/// RK4 with `dt ≤ 0.1 h²`, keeping every `sample_every`-th state.
pub fn simulate_sampled(
    state0: &NLSLatticeState,
    p: &NLSParams,
    dt: f64,
    steps: usize,
    sample_every: usize,
) -> Result<NLSTrajectory> {
    if state0.len() != p.n {
        return Err(Error::Precondition("state does not match params".into()));
    }
    if !(dt > 0.0 && dt <= p.max_dt() * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!(
            "dt = {dt} violates 0 < dt <= 0.1 h^2 = {}",
            p.max_dt()
        )));
    }
    let every = sample_every.max(1);
    let f = |q: &Vec<Complex64>| rhs_raw(q, p);
    let mut traj = NLSTrajectory {
        times: Vec::new(),
        states: Vec::new(),
        mass: Vec::new(),
        max_amplitude: Vec::new(),
    };
    let mut record = |t: f64, q: &Vec<Complex64>| {
        let s = NLSLatticeState { q: q.clone() };
        traj.mass.push(s.mass());
        traj.max_amplitude
            .push(q.iter().map(|v| v.norm()).fold(0.0, f64::max));
        traj.times.push(t);
        traj.states.push(s);
    };
    let mut q = state0.q.clone();
    record(0.0, &q);
    for step in 1..=steps {
        q = ode::rk4_step(&f, &q, dt);
        if !q.all_finite() || q.iter().any(|v| v.norm() > 1e8) {
            return Err(Error::NonFinite { step });
        }
        if step % every == 0 {
            record(step as f64 * dt, &q);
        }
    }
    Ok(traj)
}

/// Hump location symbol: `C` centered at `N/2`, `W` at the boundary `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HumpSymbol {
    Center,
    Wing,
    Ambiguous,
}

impl HumpSymbol {
    pub fn as_char(self) -> char {
        match self {
            HumpSymbol::Center => 'C',
            HumpSymbol::Wing => 'W',
            HumpSymbol::Ambiguous => '?',
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            HumpSymbol::Center => HumpSymbol::Wing,
            HumpSymbol::Wing => HumpSymbol::Center,
            HumpSymbol::Ambiguous => HumpSymbol::Ambiguous,
        }
    }
}

/// Relative height below which a profile counts as flat.
pub const FLAT_TOLERANCE: f64 = 1e-9;
/// Samples a new basin must persist before it is emitted.
pub const HYSTERESIS: usize = 5;

fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

/// Classifies one profile by the location of its maximizers.
pub fn classify(state: &NLSLatticeState) -> HumpSymbol {
    let n = state.len();
    let amp: Vec<f64> = state.q.iter().map(|v| v.norm_sqr()).collect();
    let max = amp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = amp.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max - min > FLAT_TOLERANCE * max) {
        return HumpSymbol::Ambiguous;
    }
    let quarter = n as f64 / 4.0;
    let mut center = false;
    let mut wing = false;
    for (k, _) in amp.iter().enumerate().filter(|(_, &a)| a == max) {
        let to_center = circular_distance(k, n / 2, n) as f64;
        let to_wing = circular_distance(k, 0, n) as f64;
        if n.is_multiple_of(2) && to_center < quarter {
            center = true;
        } else if to_wing < quarter {
            wing = true;
        } else {
            return HumpSymbol::Ambiguous;
        }
    }
    match (center, wing) {
        (true, false) => HumpSymbol::Center,
        (false, true) => HumpSymbol::Wing,
        _ => HumpSymbol::Ambiguous,
    }
}

/// Per-sample symbols and the hysteresis-compressed excursion word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CenterWingEncoding {
    pub raw: String,
    pub word: String,
}

impl CenterWingEncoding {
    /// Number of adjacent symbol changes in the compressed word.
    pub fn alternations(&self) -> usize {
        let b = self.word.as_bytes();
        b.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn swapped(&self) -> Self {
        let swap = |s: &str| {
            s.chars()
                .map(|c| match c {
                    'C' => 'W',
                    'W' => 'C',
                    o => o,
                })
                .collect()
        };
        Self {
            raw: swap(&self.raw),
            word: swap(&self.word),
        }
    }
}

/// Encodes a sampled trajectory; `?` samples appear in `raw` but never in
/// `word`, and they break persistence runs.
pub fn center_wing_encode(states: &[NLSLatticeState]) -> CenterWingEncoding {
    let symbols: Vec<HumpSymbol> = states.iter().map(classify).collect();
    let raw: String = symbols.iter().map(|s| s.as_char()).collect();
    let mut word = String::new();
    let mut last: Option<HumpSymbol> = None;
    let mut run_symbol = HumpSymbol::Ambiguous;
    let mut run = 0usize;
    for &s in &symbols {
        if s == run_symbol {
            run += 1;
        } else {
            run_symbol = s;
            run = 1;
        }
        if run == HYSTERESIS && s != HumpSymbol::Ambiguous && last != Some(s) {
            word.push(s.as_char());
            last = Some(s);
        }
    }
    CenterWingEncoding { raw, word }
}

/// Initial condition for exploratory runs: the saddle times
/// `1 + amplitude·cos(2πn/N)`.
pub fn perturbed_saddle(p: &NLSParams, amplitude: f64) -> Result<NLSLatticeState> {
    let saddle = discrete_saddle(p)?;
    let n = p.n;
    let q = (0..n)
        .map(|k| {
            let phase = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            saddle.amplitude * (1.0 + amplitude * phase.cos())
        })
        .collect();
    NLSLatticeState::new(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn uniform_rhs_examples() {
        let p = NLSParams::new(8, 0.8, 1.0, 2.0, 0.0).unwrap();
        let z = c(0.3, -0.4);
        let d = pdnls_rhs(&NLSLatticeState::uniform(8, z).unwrap(), &p).unwrap();
        let expect = -I * (2.0 * z.norm_sqr() * z - 2.0 * 0.64 * z);
        for v in d.values() {
            assert!((v - expect).norm() < 1e-15);
        }
        let d = pdnls_rhs(&NLSLatticeState::uniform(8, c(0.8, 0.0)).unwrap(), &p).unwrap();
        assert!(d.values().iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn saddle_examples() {
        let p = NLSParams::new(8, 0.8, 1.0, 2.0, 0.01).unwrap();
        let s = continuum_saddle(&p).unwrap();
        assert!((s.i - (0.64 - 0.01 / 1.6 * 3.36f64.sqrt())).abs() < 1e-15);
        let p0 = NLSParams { epsilon: 0.0, ..p };
        let s0 = continuum_saddle(&p0).unwrap();
        assert_eq!(s0.i, 0.8 * 0.8);
        assert!((s0.theta - 0.4f64.acos()).abs() < 1e-15);
        let big = NLSParams { beta: 1e12, ..p0 };
        let t = continuum_saddle(&big).unwrap().theta;
        assert!(t < std::f64::consts::FRAC_PI_2 && std::f64::consts::FRAC_PI_2 - t < 1e-11);
        assert!(continuum_saddle(&NLSParams { beta: 0.8, ..p }).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let p = NLSParams::new(8, 0.8, 1.0, 2.0, 0.0).unwrap();
        let (a, b) = continuum_eigenvalues(0, &p, 0.8 * 0.8, XiVariant::default());
        assert_eq!((a.norm(), b.norm()), (0.0, 0.0));
        let (a, b) = continuum_eigenvalues(1, &p, 0.64, XiVariant::default());
        assert!((a.re - 1.2489995996796797).abs() < 1e-12);
        assert!((b.re + 1.2489995996796797).abs() < 1e-12);
    }

    #[test]
    fn silnikov_examples() {
        let p = NLSParams::new(8, 0.8, 1.0, 2.0, 0.01).unwrap();
        let s = continuum_saddle(&p).unwrap();
        let eigs = continuum_spectrum(&p, s.i, XiVariant::default(), 20);
        assert!(silnikov_check(&eigs).all());

        let imag: Vec<_> = (0..4)
            .map(|m| ModeEigenvalue {
                mode: m,
                value: c(0.0, 1.0 + m as f64),
            })
            .collect();
        let r = silnikov_check(&imag);
        assert!(!r.two_unstable && !r.lambda2_minimal && !r.lambda2_below_lambda0);

        let hand: Vec<_> = [1.0, 0.5, -0.1, -2.0]
            .iter()
            .enumerate()
            .map(|(m, &v)| ModeEigenvalue {
                mode: m,
                value: c(v, 0.0),
            })
            .collect();
        assert!(silnikov_check(&hand).all());
    }

    #[test]
    fn second_measurement_examples() {
        assert!((second_measurement(1.0, 0.8, 1e-9).unwrap() - 0.8).abs() < 1e-15);
        let v = second_measurement(1.0, 0.8, std::f64::consts::PI).unwrap();
        assert!((v - 0.4 * std::f64::consts::PI).abs() < 1e-15);
        assert!(second_measurement(1.0, 0.8, 2.0 * std::f64::consts::PI).is_err());
        assert!(second_measurement(1.0, 0.8, -4.0 * std::f64::consts::PI).is_err());
        assert_eq!(
            second_measurement(0.3, 2.0, 1.7).unwrap(),
            second_measurement(0.3, 2.0, -1.7).unwrap()
        );
    }

    #[test]
    fn discrete_saddle_window_and_instability() {
        let p = NLSParams::new(7, 5.0, 0.1, 1.0, 0.01).unwrap();
        let s = discrete_saddle(&p).unwrap();
        let f = pdnls_rhs(&s.state, &p).unwrap();
        assert!(f.values().iter().all(|v| v.norm() < 1e-12));
        assert_eq!(s.unstable_count(1e-8), 2);
        assert!(discrete_saddle(&NLSParams { omega: 3.0, ..p }).is_err());

        let p0 = NLSParams { epsilon: 0.0, ..p };
        let s0 = discrete_saddle(&p0).unwrap();
        assert!((s0.amplitude.norm() - 5.0).abs() < 1e-14);
        assert!((s0.amplitude.arg() - 0.5f64.acos()).abs() < 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = NLSParams::new(7, 5.0, 0.1, 1.0, 0.01).unwrap();
        let st =
            NLSLatticeState::from_half(7, &[c(0.3, 0.1), c(-0.2, 0.5), c(1.1, 0.0), c(0.4, -0.7)])
                .unwrap();
        let a = jacobian(&st, &p).unwrap();
        let fd = finite_difference_jacobian(&st, &p, 1e-6);
        let scale = a.amax();
        assert!((a - fd).amax() < 1e-6 * scale);
    }

    #[test]
    fn simulate_rejects_stiff_steps() {
        let p = NLSParams::new(8, 4.0, 0.5, 4.0, 0.05).unwrap();
        let s = NLSLatticeState::uniform(8, c(1.0, 0.0)).unwrap();
        assert!(simulate(&s, &p, 0.01, 10).is_err());
        assert!(simulate(&s, &p, p.max_dt(), 10).is_ok());
    }

    #[test]
    fn classify_examples() {
        let n = 8;
        let peak = |at: usize| {
            NLSLatticeState::new(
                (0..n)
                    .map(|k| {
                        let d = circular_distance(k, at, n) as f64;
                        c((-d * d).exp(), 0.0)
                    })
                    .collect(),
            )
            .unwrap()
        };
        assert_eq!(classify(&peak(4)), HumpSymbol::Center);
        assert_eq!(classify(&peak(0)), HumpSymbol::Wing);
        assert_eq!(
            classify(&NLSLatticeState::uniform(n, c(1.0, 1.0)).unwrap()),
            HumpSymbol::Ambiguous
        );
    }

    #[test]
    fn hysteresis_suppresses_chatter() {
        let n = 8;
        let center = NLSLatticeState::from_half(
            n,
            &[
                c(0.1, 0.0),
                c(0.2, 0.0),
                c(0.3, 0.0),
                c(0.5, 0.0),
                c(1.0, 0.0),
            ],
        )
        .unwrap();
        let wing = center.half_period_translate().unwrap();
        let mut seq = vec![center.clone(); 6];
        seq.extend(vec![wing.clone(); 3]);
        seq.extend(vec![center.clone(); 6]);
        seq.extend(vec![wing; 5]);
        let e = center_wing_encode(&seq);
        assert_eq!(e.word, "CW");
        assert_eq!(e.raw.len(), seq.len());
    }
}
