//! Pseudo-orbits, shadowing and symbolic dynamics for maps supplied as
//! closures. Distances use the max-norm.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dashed_line::{self, DashedLineParams, DashedLineState};
use crate::error::{Error, Result};
use crate::nls::{self, NLSLatticeState, NLSParams};
use crate::ode;

pub type State = DVector<f64>;
type MapFn = dyn Fn(&State) -> State + Send + Sync;
type JacFn = dyn Fn(&State) -> DMatrix<f64> + Send + Sync;

/// A map `f: R^d → R^d` with an optional analytic Jacobian.
#[derive(Clone)]
pub struct MapSystem {
    pub dimension: usize,
    map: Arc<MapFn>,
    jacobian: Option<Arc<JacFn>>,
}

impl std::fmt::Debug for MapSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MapSystem")
            .field("dimension", &self.dimension)
            .field("jacobian", &self.jacobian.is_some())
            .finish()
    }
}

fn dist(a: &State, b: &State) -> f64 {
    (a - b).amax()
}

impl MapSystem {
    pub fn new(dimension: usize, map: impl Fn(&State) -> State + Send + Sync + 'static) -> Self {
        Self {
            dimension,
            map: Arc::new(map),
            jacobian: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&State) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn apply(&self, x: &State) -> State {
        (self.map)(x)
    }

    pub fn jacobian(&self, x: &State) -> Result<DMatrix<f64>> {
        self.jacobian
            .as_ref()
            .map(|j| j(x))
            .ok_or_else(|| Error::Precondition("map has no Jacobian".into()))
    }

    pub fn finite_difference_jacobian(&self, x: &State, step: f64) -> DMatrix<f64> {
        let d = self.dimension;
        let mut j = DMatrix::zeros(d, d);
        for c in 0..d {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[c] += step;
            dn[c] -= step;
            let col = (self.apply(&up) - self.apply(&dn)) / (2.0 * step);
            j.set_column(c, &col);
        }
        j
    }

    /// Largest relative mismatch between the analytic and a central-difference
    /// Jacobian over the probe points.
    pub fn check_jacobian(&self, probes: &[State]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in probes {
            let a = self.jacobian(x)?;
            let fd = self.finite_difference_jacobian(x, 1e-6);
            worst = worst.max((&a - &fd).amax() / a.amax().max(1e-300));
        }
        Ok(worst)
    }

    /// `x, f(x), ..., f^{len-1}(x)`.
    pub fn orbit(&self, x: &State, len: usize) -> Vec<State> {
        let mut out = Vec::with_capacity(len);
        let mut cur = x.clone();
        for _ in 0..len {
            let next = self.apply(&cur);
            out.push(cur);
            cur = next;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PseudoOrbitCheck {
    pub max_defect: f64,
    pub within: bool,
}

/// `max_j |y_{j+1} − f(y_j)|` compared with `delta`.
pub fn is_pseudo_orbit(points: &[State], map: &MapSystem, delta: f64) -> Result<PseudoOrbitCheck> {
    if points.len() < 2 {
        return Err(Error::Precondition(
            "a pseudo-orbit needs at least two points".into(),
        ));
    }
    let max_defect = points
        .windows(2)
        .map(|w| dist(&w[1], &map.apply(&w[0])))
        .fold(0.0, f64::max);
    Ok(PseudoOrbitCheck {
        max_defect,
        within: max_defect <= delta,
    })
}

/// Finite window of a `δ` pseudo-orbit.
#[derive(Debug, Clone)]
pub struct PseudoOrbit {
    pub points: Vec<State>,
    pub delta: f64,
}

impl PseudoOrbit {
    /// Verifies the defect bound on construction.
    pub fn new(points: Vec<State>, map: &MapSystem, delta: f64) -> Result<Self> {
        let check = is_pseudo_orbit(&points, map, delta)?;
        if !check.within {
            return Err(Error::Precondition(format!(
                "defect {:e} exceeds delta {delta:e}",
                check.max_defect
            )));
        }
        Ok(Self { points, delta })
    }

    /// Uses the measured defect as `δ`.
    pub fn measured(points: Vec<State>, map: &MapSystem) -> Result<Self> {
        let delta = is_pseudo_orbit(&points, map, f64::INFINITY)?.max_defect;
        Ok(Self { points, delta })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `sup_j |f^j(x) − y_j|` over the window.
pub fn shadow_distance(start: &State, pseudo: &PseudoOrbit, map: &MapSystem) -> f64 {
    map.orbit(start, pseudo.len())
        .iter()
        .zip(&pseudo.points)
        .map(|(a, b)| dist(a, b))
        .fold(0.0, f64::max)
}

/// How a finite window extends to a doubly infinite sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extension {
    /// Repeats the first symbol to the left and the last to the right.
    ConstantEnds,
    Periodic,
}

/// Window `a_{-origin} .. a_{len-1-origin}` of a doubly infinite word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymbolSequence {
    window: Vec<u8>,
    origin: usize,
    alphabet: u8,
    extension: Extension,
}

impl SymbolSequence {
    pub fn new(window: Vec<u8>, origin: usize, alphabet: u8, extension: Extension) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::Precondition("alphabet must be nonempty".into()));
        }
        if window.is_empty() {
            return Err(Error::Precondition("symbol window must be nonempty".into()));
        }
        if origin >= window.len() {
            return Err(Error::Precondition("origin outside the window".into()));
        }
        if let Some(&s) = window.iter().find(|&&s| s >= alphabet) {
            return Err(Error::Precondition(format!(
                "symbol {s} outside alphabet of size {alphabet}"
            )));
        }
        Ok(Self {
            window,
            origin,
            alphabet,
            extension,
        })
    }

    /// Parses a binary word such as `"010"`, origin at its first symbol.
    pub fn binary(word: &str, extension: Extension) -> Result<Self> {
        let window = word
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Precondition(format!(
                    "'{other}' is not a binary symbol"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(window, 0, 2, extension)
    }

    pub fn window(&self) -> &[u8] {
        &self.window
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    /// Symbol `a_k` for any integer `k`.
    pub fn get(&self, k: i64) -> u8 {
        let len = self.window.len() as i64;
        let idx = k + self.origin as i64;
        match self.extension {
            Extension::Periodic => self.window[idx.rem_euclid(len) as usize],
            Extension::ConstantEnds => self.window[idx.clamp(0, len - 1) as usize],
        }
    }

    /// Radius beyond which both sequences are determined by their extension.
    fn horizon(&self) -> i64 {
        (self.window.len() + self.origin) as i64 + 1
    }
}

/// `(χa)_k = a_{k+1}`.
pub fn shift_map(seq: &SymbolSequence) -> SymbolSequence {
    let mut out = seq.clone();
    match seq.extension {
        Extension::Periodic => out.origin = (seq.origin + 1) % seq.window.len(),
        Extension::ConstantEnds => {
            if seq.origin + 1 < seq.window.len() {
                out.origin += 1;
            } else {
                out.window.push(*seq.window.last().expect("nonempty"));
                out.origin += 1;
            }
        }
    }
    out
}

/// `2^{-j*}` with `j*` the largest `j` such that `a_k = b_k` for `|k| < j`;
/// zero for equal sequences.
pub fn cylinder_distance(a: &SymbolSequence, b: &SymbolSequence) -> f64 {
    let period = |s: &SymbolSequence| match s.extension {
        Extension::Periodic => s.window.len() as i64,
        Extension::ConstantEnds => 1,
    };
    let reach = a.horizon().max(b.horizon()) + period(a) * period(b);
    for j in 0..=reach {
        if a.get(j) != b.get(j) || a.get(-j) != b.get(-j) {
            return 2f64.powi(-(j as i32));
        }
    }
    0.0
}

/// Concatenates the blocks `A_0 = (x₀, …, x₀)` and `A_1 = (f^{-m}(y₀), …,
/// f^m(y₀))` as dictated by the word window; `δ` is the measured defect.
pub fn palmer_assembly(
    x0: &State,
    segment: &[State],
    word: &SymbolSequence,
    map: &MapSystem,
) -> Result<PseudoOrbit> {
    if segment.len().is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "segment length {} is not odd",
            segment.len()
        )));
    }
    if word.alphabet() != 2 {
        return Err(Error::Precondition(
            "Palmer assembly needs a binary word".into(),
        ));
    }
    let mut points = Vec::with_capacity(segment.len() * word.window().len());
    for &s in word.window() {
        if s == 0 {
            points.extend(std::iter::repeat_n(x0.clone(), segment.len()));
        } else {
            points.extend(segment.iter().cloned());
        }
    }
    if points.len() < 2 {
        return Err(Error::Precondition("assembled window is too short".into()));
    }
    PseudoOrbit::measured(points, map)
}

/// Result of [`find_shadow`].
#[derive(Debug, Clone)]
pub struct Shadow {
    pub start: State,
    pub orbit: Vec<State>,
    /// Achieved `sup_j |x_j − y_j|`.
    pub epsilon: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

const SHADOW_MAX_ITERATIONS: usize = 50;

/// Gauss–Newton with minimum-norm steps on `x_{j+1} − f(x_j) = 0`, started at
/// the pseudo-orbit. Each step solves `(JJᵀ)μ = −G`, `Δ = Jᵀμ`, where `JJᵀ`
/// is block tridiagonal with blocks `D_jD_jᵀ + I` and `−D_{j+1}ᵀ`.
pub fn find_shadow(pseudo: &PseudoOrbit, map: &MapSystem) -> Result<Shadow> {
    let len = pseudo.len();
    if len < 2 {
        return Err(Error::Precondition(
            "a pseudo-orbit needs at least two points".into(),
        ));
    }
    if !map.has_jacobian() {
        return Err(Error::Precondition(
            "find_shadow needs an analytic Jacobian".into(),
        ));
    }
    let d = map.dimension;
    let eqs = (len - 1) * d;
    let scale = 1.0 + pseudo.points.iter().map(|p| p.amax()).fold(0.0, f64::max);
    let mut x = pseudo.points.clone();
    let mut history = Vec::new();
    let residual = |x: &[State]| -> (DVector<f64>, f64) {
        let mut g = DVector::zeros(eqs);
        for j in 0..len - 1 {
            let r = map.apply(&x[j]) - &x[j + 1];
            g.rows_mut(j * d, d).copy_from(&r);
        }
        let norm = g.amax();
        (g, norm)
    };
    let (mut g, mut gnorm) = residual(&x);
    history.push(gnorm);
    let mut iterations = 0;
    while gnorm > 1e-13 * scale {
        if iterations == SHADOW_MAX_ITERATIONS {
            return Err(Error::NewtonStagnation { history });
        }
        iterations += 1;
        let jacs: Vec<DMatrix<f64>> = (0..len - 1)
            .map(|j| map.jacobian(&x[j]))
            .collect::<Result<_>>()?;
        let mut jjt = DMatrix::zeros(eqs, eqs);
        for j in 0..len - 1 {
            let dj = &jacs[j];
            let block = dj * dj.transpose() + DMatrix::identity(d, d);
            jjt.view_mut((j * d, j * d), (d, d)).copy_from(&block);
            if j + 1 < len - 1 {
                let off = -jacs[j + 1].transpose();
                jjt.view_mut((j * d, (j + 1) * d), (d, d)).copy_from(&off);
                jjt.view_mut(((j + 1) * d, j * d), (d, d))
                    .copy_from(&off.transpose());
            }
        }
        let chol = nalgebra::Cholesky::new(jjt).ok_or_else(|| {
            Error::Numerical("normal matrix of the orbit equations is singular".into())
        })?;
        let mu = chol.solve(&(-&g));
        // Δx_j = D_jᵀ μ_j − μ_{j−1}
        for j in 0..len {
            let mut step = DVector::zeros(d);
            if j < len - 1 {
                step += jacs[j].transpose() * mu.rows(j * d, d);
            }
            if j > 0 {
                step -= mu.rows((j - 1) * d, d);
            }
            x[j] += step;
        }
        let (g_new, n_new) = residual(&x);
        g = g_new;
        gnorm = n_new;
        history.push(gnorm);
        if !gnorm.is_finite() {
            return Err(Error::NewtonStagnation { history });
        }
        let k = history.len();
        if k > 6 && history[k - 1] >= 0.5 * history[k - 6] && gnorm > 1e-10 * scale {
            return Err(Error::NewtonStagnation { history });
        }
    }
    let epsilon = x
        .iter()
        .zip(&pseudo.points)
        .map(|(a, b)| dist(a, b))
        .fold(0.0, f64::max);
    Ok(Shadow {
        start: x[0].clone(),
        orbit: x,
        epsilon,
        iterations,
        residual_history: history,
    })
}

/// Finite-time dichotomy surrogates along an orbit.
#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    /// Exponential rates per iterate, in decreasing order.
    pub rates: Vec<f64>,
    /// Smallest `|rate|`.
    pub alpha: f64,
    /// Largest deviation factor of the finite-time growth from `exp(rate·n)`.
    pub k: f64,
    /// Smallest principal angle between the unstable and stable subspaces at
    /// the middle of the orbit, in radians.
    pub angle: f64,
    pub unstable_dimension: usize,
    pub hyperbolic: bool,
}

/// Options for [`hyperbolicity_estimate_with`].
#[derive(Debug, Clone, Copy)]
pub struct DichotomyOptions {
    /// Iterates skipped before accumulating rates.
    pub burn_in: usize,
    /// Rates with `|rate|` below this count as neutral.
    pub neutral_tolerance: f64,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        Self {
            burn_in: 0,
            neutral_tolerance: 1e-3,
        }
    }
}

pub fn hyperbolicity_estimate(orbit: &[State], map: &MapSystem) -> Result<DichotomyReport> {
    hyperbolicity_estimate_with(orbit, map, DichotomyOptions::default())
}

fn qr_sweep(
    jacs: &[DMatrix<f64>],
    start: DMatrix<f64>,
    burn_in: usize,
) -> (Vec<f64>, DMatrix<f64>, Vec<Vec<f64>>) {
    let d = start.nrows();
    let mut q = start;
    let mut sums = vec![0.0; d];
    let mut partial = Vec::new();
    for (j, m) in jacs.iter().enumerate() {
        let qr = (m * &q).qr();
        let (qn, r) = qr.unpack();
        // fix signs so the diagonal of R is positive
        let mut qn = qn;
        for i in 0..d {
            if r[(i, i)] < 0.0 {
                qn.column_mut(i).neg_mut();
            }
        }
        q = qn;
        if j >= burn_in {
            for i in 0..d {
                sums[i] += r[(i, i)].abs().ln();
            }
            partial.push(sums.clone());
        }
    }
    (sums, q, partial)
}

/// Rates from repeated QR of Jacobian products; the stable subspace comes
/// from the same sweep on inverse Jacobians run backwards.
pub fn hyperbolicity_estimate_with(
    orbit: &[State],
    map: &MapSystem,
    opts: DichotomyOptions,
) -> Result<DichotomyReport> {
    if orbit.len() < 2 {
        return Err(Error::Precondition(
            "orbit needs at least two points".into(),
        ));
    }
    if opts.burn_in + 1 >= orbit.len() {
        return Err(Error::Precondition(
            "burn-in consumes the whole orbit".into(),
        ));
    }
    let d = map.dimension;
    let jacs: Vec<DMatrix<f64>> = orbit[..orbit.len() - 1]
        .iter()
        .map(|x| map.jacobian(x))
        .collect::<Result<_>>()?;
    let counted = (jacs.len() - opts.burn_in) as f64;
    let (sums, _, partial) = qr_sweep(&jacs, DMatrix::identity(d, d), opts.burn_in);
    let mut rates: Vec<f64> = sums.iter().map(|s| s / counted).collect();
    let mut k: f64 = 1.0;
    for (n, p) in partial.iter().enumerate() {
        for i in 0..d {
            let dev = (p[i] - (n + 1) as f64 * sums[i] / counted).abs();
            k = k.max(dev.exp());
        }
    }
    rates.sort_by(|a, b| b.partial_cmp(a).expect("finite rates"));
    let unstable = rates
        .iter()
        .filter(|&&r| r > opts.neutral_tolerance)
        .count();
    let stable = rates
        .iter()
        .filter(|&&r| r < -opts.neutral_tolerance)
        .count();
    let hyperbolic = unstable + stable == d;
    let alpha = rates.iter().map(|r| r.abs()).fold(f64::INFINITY, f64::min);

    let mid = jacs.len() / 2;
    let angle = if hyperbolic && unstable > 0 && stable > 0 && mid > 0 {
        // a frame in general position so that no direction is missed
        let generic = DMatrix::from_fn(d, d, |i, j| {
            1.0 / (i + j + 1) as f64 + if i == j { 1.0 } else { 0.0 }
        })
        .qr()
        .q();
        let (_, qf, _) = qr_sweep(&jacs[..mid], generic.clone(), 0);
        let inv: Option<Vec<DMatrix<f64>>> = jacs[mid..]
            .iter()
            .rev()
            .map(|m| m.clone().try_inverse())
            .collect();
        match inv {
            Some(inv) => {
                let (_, qb, _) = qr_sweep(&inv, generic, 0);
                let u = qf.columns(0, unstable).into_owned();
                let s = qb.columns(0, stable).into_owned();
                let sv = (u.transpose() * s).singular_values();
                sv.max().clamp(-1.0, 1.0).acos()
            }
            None => 0.0,
        }
    } else {
        0.0
    };
    Ok(DichotomyReport {
        rates,
        alpha,
        k,
        angle,
        unstable_dimension: unstable,
        hyperbolic,
    })
}

/// `f(v) = diag(2, 1/2) v`.
pub fn linear_test_map() -> MapSystem {
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
    let b = a.clone();
    MapSystem::new(2, move |x| &a * x).with_jacobian(move |_| b.clone())
}

/// Least-squares orbit of a diagonal linear map closest to `points`:
/// `x_0 = Σ λ^j y_j / Σ λ^{2j}` per component.
pub fn linear_closed_form_shadow(diag: &[f64], points: &[State]) -> State {
    DVector::from_iterator(
        diag.len(),
        diag.iter().enumerate().map(|(i, &lam)| {
            let mut num = 0.0;
            let mut den = 0.0;
            let mut pw = 1.0;
            for y in points {
                num += pw * y[i];
                den += pw * pw;
                pw *= lam;
            }
            num / den
        }),
    )
}

/// Flow map of `ẋ = F(x)` over `period` by RK4 with variational equations.
fn variational_flow_map(
    dim: usize,
    period: f64,
    substeps: usize,
    field: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone + 'static,
    jac: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + Clone + 'static,
) -> MapSystem {
    let h = period / substeps as f64;
    let f1 = field.clone();
    let map = move |x: &State| {
        let rhs = |y: &Vec<f64>| f1(y);
        let y = ode::rk4_advance(&rhs, &x.as_slice().to_vec(), h, substeps)
            .unwrap_or_else(|_| vec![f64::NAN; dim]);
        DVector::from_vec(y)
    };
    let jac_map = move |x: &State| {
        let aug = |y: &Vec<f64>| {
            let (s, phi) = y.split_at(dim);
            let mut out = field(s);
            let j = jac(s);
            let phi = DMatrix::from_column_slice(dim, dim, phi);
            out.extend_from_slice((j * phi).as_slice());
            out
        };
        let mut y0 = x.as_slice().to_vec();
        y0.extend_from_slice(DMatrix::<f64>::identity(dim, dim).as_slice());
        let y = ode::rk4_advance(&aug, &y0, h, substeps)
            .unwrap_or_else(|_| vec![f64::NAN; dim + dim * dim]);
        DMatrix::from_column_slice(dim, dim, &y[dim..])
    };
    MapSystem::new(dim, map).with_jacobian(jac_map)
}

/// Time-`period` map of the Duffing oscillator `ẋ = y, ẏ = x − x³`.
pub fn duffing_map(period: f64, substeps: usize) -> MapSystem {
    variational_flow_map(
        2,
        period,
        substeps,
        |s| vec![s[1], s[0] - s[0] * s[0] * s[0]],
        |s| DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0 - 3.0 * s[0] * s[0], 0.0]),
    )
}

/// Point at time `t` on the Duffing homoclinic loop through `(√2, 0)`.
pub fn duffing_homoclinic(t: f64) -> State {
    let s = 1.0 / t.cosh();
    let r2 = std::f64::consts::SQRT_2;
    DVector::from_vec(vec![r2 * s, -r2 * s * t.tanh()])
}

/// Time-`period` map of the dashed-line model in the ordering
/// `(ω_p, ω_{-T}, ..., ω_T)`.
pub fn dashed_line_map(params: &DashedLineParams, period: f64, substeps: usize) -> MapSystem {
    let dim = params.len() + 1;
    let p1 = params.clone();
    let p2 = params.clone();
    variational_flow_map(
        dim,
        period,
        substeps,
        move |s| dashed_line::model_rhs(&DashedLineState::from_vec(s), &p1).to_vec(),
        move |s| dashed_line::model_jacobian(&DashedLineState::from_vec(s), &p2),
    )
}

/// Time-`period` map of the lattice NLS on the even subspace, in the real
/// coordinates `(Re q_0, Im q_0, ..., Re q_M, Im q_M)`.
pub fn nls_period_map(params: &NLSParams, period: f64, substeps: usize) -> MapSystem {
    let n = params.n;
    let m = n / 2 + 1;
    let to_state = move |s: &[f64]| {
        let half: Vec<_> = (0..m)
            .map(|i| num_complex::Complex64::new(s[2 * i], s[2 * i + 1]))
            .collect();
        NLSLatticeState::from_half(n, &half).expect("even state")
    };
    let (p1, p2) = (*params, *params);
    variational_flow_map(
        2 * m,
        period,
        substeps,
        move |s| {
            let d = nls::pdnls_rhs(&to_state(s), &p1).expect("matching size");
            d.values()[..m].iter().flat_map(|z| [z.re, z.im]).collect()
        },
        move |s| nls::even_jacobian(&to_state(s), &p2).expect("matching size"),
    )
}
