//! Lax pairs of the 2D/3D Euler and Rossby equations on periodic grids, their
//! compatibility and isospectrality checks, and the Darboux transformation at
//! `λ = 0`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{
    dealias_cutoff, galerkin_rhs, grid_bracket, integrate_galerkin, invert_laplacian,
    CoefficientField, GridField2D, ScalarField3D, VectorField3D, WaveVector,
};
use crate::linalg;

/// Named residual sup-norms plus optional spectra.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LaxReport {
    pub norms: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub spectra: BTreeMap<String, Vec<Complex64>>,
}

impl LaxReport {
    pub fn insert(&mut self, name: &str, value: f64) {
        self.norms.insert(name.to_string(), value.abs());
    }

    pub fn norm(&self, name: &str) -> Option<f64> {
        self.norms.get(name).copied()
    }
}

/// `Lφ = {Ω, φ}`.
pub fn lax_l_2d(omega: &GridField2D, phi: &GridField2D) -> Result<GridField2D> {
    grid_bracket(omega, phi)
}

/// `Aφ = {Ψ, φ}`.
pub fn lax_a_2d(psi: &GridField2D, phi: &GridField2D) -> Result<GridField2D> {
    grid_bracket(psi, phi)
}

/// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` in sup norm.
pub fn jacobi_defect(f: &GridField2D, g: &GridField2D, h: &GridField2D) -> Result<f64> {
    let a = grid_bracket(f, &grid_bracket(g, h)?)?;
    let b = grid_bracket(g, &grid_bracket(h, f)?)?;
    let c = grid_bracket(h, &grid_bracket(f, g)?)?;
    Ok(a.add(&b)?.add(&c)?.max_abs())
}

/// `∂_tΩ` of the Galerkin Euler system, evaluated on the grid.
pub fn euler_tendency(omega: &GridField2D) -> Result<GridField2D> {
    let n = omega.resolution();
    let coeffs = omega.to_coefficients(dealias_cutoff(n) as usize)?;
    GridField2D::from_coefficients(n, &galerkin_rhs(&coeffs))
}

/// Compatibility of the 2D Euler Lax pair with Euler evolution.
pub fn compatibility_residual_2d(omega: &GridField2D, phis: &[GridField2D]) -> Result<LaxReport> {
    compatibility_residual_2d_with(omega, phis, euler_tendency)
}

/// As [`compatibility_residual_2d`], with `∂_tΩ` supplied by `tendency`.
///
/// Reports `jacobi`, the largest `{Ω,{Ψ,φ}} − {Ψ,{Ω,φ}} − {{Ω,Ψ},φ}`, and
/// `transport`, the largest `{∂_tΩ + {Ψ,Ω}, φ}`.
pub fn compatibility_residual_2d_with(
    omega: &GridField2D,
    phis: &[GridField2D],
    tendency: impl Fn(&GridField2D) -> Result<GridField2D>,
) -> Result<LaxReport> {
    let psi = invert_laplacian(omega)?;
    let omega_psi = grid_bracket(omega, &psi)?;
    let euler = tendency(omega)?.add(&grid_bracket(&psi, omega)?)?;
    let mut jacobi: f64 = 0.0;
    let mut transport: f64 = 0.0;
    for phi in phis {
        let lhs = grid_bracket(omega, &grid_bracket(&psi, phi)?)?;
        let r1 = grid_bracket(&psi, &grid_bracket(omega, phi)?)?;
        let r2 = grid_bracket(&omega_psi, phi)?;
        jacobi = jacobi.max(lhs.sub(&r1)?.sub(&r2)?.max_abs());
        transport = transport.max(grid_bracket(&euler, phi)?.max_abs());
    }
    let mut report = LaxReport::default();
    report.insert("jacobi", jacobi);
    report.insert("transport", transport);
    report.insert("euler_residual", euler.max_abs());
    Ok(report)
}

/// Matrix of `φ ↦ {Ω, φ}` on the modes of the box of half width `b`
/// without the origin: `M[k,q] = −det(k,q) ω_{k−q}`.
pub fn bracket_matrix(omega: &CoefficientField, b: usize) -> DMatrix<Complex64> {
    let bi = b as i64;
    let modes: Vec<WaveVector> = (-bi..=bi)
        .flat_map(|k1| (-bi..=bi).map(move |k2| WaveVector::new(k1, k2)))
        .filter(|k| *k != WaveVector::new(0, 0))
        .collect();
    let dim = modes.len();
    DMatrix::from_fn(dim, dim, |r, c| {
        let (k, q) = (modes[r], modes[c]);
        let d = k - q;
        if d == WaveVector::new(0, 0) || !omega.in_box(d) {
            return Complex64::new(0.0, 0.0);
        }
        -(k.det(q) as f64) * omega.get(d)
    })
}

/// Hausdorff distance between the spectra of the truncated bracket operator
/// at `t = 0` and at `t = T` under Galerkin Euler evolution.
pub fn isospectrality_check(
    omega0: &CoefficientField,
    t: f64,
    dt: f64,
    b: usize,
) -> Result<LaxReport> {
    if b > 6 {
        return Err(Error::Precondition(format!("box half width {b} exceeds 6")));
    }
    if !(dt > 0.0) || !(t >= 0.0) {
        return Err(Error::Precondition("need dt > 0 and T >= 0".into()));
    }
    let steps = (t / dt).round() as usize;
    let run = integrate_galerkin(omega0, dt, steps, steps.max(1))?;
    let s0 = linalg::eigenvalues(&bracket_matrix(omega0, b))?;
    let s1 = linalg::eigenvalues(&bracket_matrix(&run.final_state, b))?;
    let mut report = LaxReport::default();
    report.insert("hausdorff", linalg::hausdorff(&s0, &s1));
    report.spectra.insert("t0".into(), s0);
    report.spectra.insert("tT".into(), s1);
    Ok(report)
}

/// `Lφ = {Ω, φ} − β ∂_xφ`.
pub fn rossby_l(omega: &GridField2D, beta: f64, phi: &GridField2D) -> Result<GridField2D> {
    grid_bracket(omega, phi)?.sub(&phi.dx().scale(beta))
}

/// Checks that `u` is divergence free and `Ω = ∇×u`.
pub fn check_velocity_vorticity(omega: &VectorField3D, u: &VectorField3D) -> Result<()> {
    if omega.resolution() != u.resolution() {
        return Err(Error::ResolutionMismatch(
            omega.resolution(),
            u.resolution(),
        ));
    }
    let div = u.divergence().max_abs();
    if !(div < 1e-10) {
        return Err(Error::Precondition(format!(
            "velocity divergence {div:e} exceeds 1e-10"
        )));
    }
    let curl = u.curl().max_abs_diff(omega);
    if !(curl < 1e-8) {
        return Err(Error::Precondition(format!(
            "vorticity differs from curl u by {curl:e}"
        )));
    }
    Ok(())
}

/// `(Lφ, Aφ) = ((Ω·∇)φ, (u·∇)φ)`.
pub fn lax_3d_scalar(
    omega: &VectorField3D,
    u: &VectorField3D,
    phi: &ScalarField3D,
) -> Result<(ScalarField3D, ScalarField3D)> {
    check_velocity_vorticity(omega, u)?;
    Ok((omega.directional(phi)?, u.directional(phi)?))
}

/// `(Lφ, Aφ) = ((Ω·∇)φ − (φ·∇)Ω, (u·∇)φ − (φ·∇)u)`.
pub fn lax_3d_vector(
    omega: &VectorField3D,
    u: &VectorField3D,
    phi: &VectorField3D,
) -> Result<(VectorField3D, VectorField3D)> {
    check_velocity_vorticity(omega, u)?;
    let l = omega
        .directional_vector(phi)?
        .sub(&phi.directional_vector(omega)?)?;
    let a = u
        .directional_vector(phi)?
        .sub(&phi.directional_vector(u)?)?;
    Ok((l, a))
}

/// Relative threshold on `|Ω_x|` (and `|Ω_y|` for the y-form) below which
/// grid points are masked.
pub const GAUGE_MASK_RELATIVE: f64 = 1e-6;

/// Gauge-transformed eigenfunction with its gradient, defined on a mask.
#[derive(Debug, Clone, Serialize)]
pub struct GaugeField {
    pub n: usize,
    /// `(1/Ω_x)[p_x − (∂_x ln f) p]`.
    pub values: Vec<f64>,
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    /// True where the x-form is valid.
    pub mask: Vec<bool>,
    /// `(1/Ω_y)[p_y − (∂_y ln f) p]`.
    pub y_form: Vec<f64>,
    pub mask_y: Vec<bool>,
}

impl GaugeField {
    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|&&v| !v).count() as f64 / self.mask.len() as f64
    }

    /// Sup norm of `values` off the mask.
    pub fn max_abs(&self) -> f64 {
        self.off_mask(self.values.iter().map(|v| v.abs()))
    }

    /// Sup norm of `values − g` off the mask.
    pub fn max_abs_diff(&self, g: &GridField2D) -> f64 {
        self.off_mask(self.values.iter().zip(g.data()).map(|(a, b)| (a - b).abs()))
    }

    /// Largest disagreement of the x- and y-forms where both are valid.
    pub fn form_agreement(&self) -> f64 {
        (0..self.values.len())
            .filter(|&i| self.mask[i] && self.mask_y[i])
            .map(|i| (self.values[i] - self.y_form[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Sup norm off the mask of `{g, p̃} = g_x p̃_y − g_y p̃_x`.
    pub fn bracket_with(&self, g: &GridField2D) -> Result<f64> {
        if g.resolution() != self.n {
            return Err(Error::ResolutionMismatch(g.resolution(), self.n));
        }
        let (gx, gy) = (g.dx(), g.dy());
        Ok(self.off_mask(
            (0..self.values.len())
                .map(|i| (gx.data()[i] * self.grad_y[i] - gy.data()[i] * self.grad_x[i]).abs()),
        ))
    }

    fn off_mask(&self, values: impl Iterator<Item = f64>) -> f64 {
        values
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(v, _)| v)
            .fold(0.0, f64::max)
    }
}

/// Darboux gauge `p̃ = (1/Ω_x)[p_x − (∂_x ln f) p]`, evaluated pointwise from
/// spectral derivatives, with its gradient by the quotient rule.
pub fn darboux_gauge(p: &GridField2D, f: &GridField2D, omega: &GridField2D) -> Result<GaugeField> {
    p.same_shape(f)?;
    p.same_shape(omega)?;
    let n = p.resolution();
    let (px, py) = (p.dx(), p.dy());
    let (pxx, pxy) = (p.derivative(2, 0), p.derivative(1, 1));
    let (fx, fy) = (f.dx(), f.dy());
    let (fxx, fxy) = (f.derivative(2, 0), f.derivative(1, 1));
    let (ox, oy) = (omega.dx(), omega.dy());
    let (oxx, oxy) = (omega.derivative(2, 0), omega.derivative(1, 1));
    let fmax = f.max_abs();
    let ox_cut = GAUGE_MASK_RELATIVE * ox.max_abs();
    let oy_cut = GAUGE_MASK_RELATIVE * oy.max_abs();
    let len = n * n;
    let mut out = GaugeField {
        n,
        values: vec![0.0; len],
        grad_x: vec![0.0; len],
        grad_y: vec![0.0; len],
        mask: vec![false; len],
        y_form: vec![0.0; len],
        mask_y: vec![false; len],
    };
    for i in 0..len {
        let fv = f.data()[i];
        if !(fv.abs() > 1e-12 * fmax) {
            continue;
        }
        let pv = p.data()[i];
        // r = p/f so that f = p gives r = 1 and p̃ = 0 exactly
        let r = pv / fv;
        let rx = (px.data()[i] * fv - pv * fx.data()[i]) / (fv * fv);
        let ry = (py.data()[i] * fv - pv * fy.data()[i]) / (fv * fv);
        let d = ox.data()[i];
        if d.abs() > ox_cut {
            let num = px.data()[i] - fx.data()[i] * r;
            let num_x = pxx.data()[i] - fxx.data()[i] * r - fx.data()[i] * rx;
            let num_y = pxy.data()[i] - fxy.data()[i] * r - fx.data()[i] * ry;
            out.values[i] = num / d;
            out.grad_x[i] = (num_x * d - num * oxx.data()[i]) / (d * d);
            out.grad_y[i] = (num_y * d - num * oxy.data()[i]) / (d * d);
            out.mask[i] = true;
        }
        let dy = oy.data()[i];
        if dy.abs() > oy_cut {
            out.y_form[i] = (py.data()[i] - fy.data()[i] * r) / dy;
            out.mask_y[i] = true;
        }
    }
    let frac = out.masked_fraction();
    if frac > 0.5 {
        return Err(Error::Precondition(format!(
            "gauge mask covers {:.1}% of the grid",
            100.0 * frac
        )));
    }
    Ok(out)
}

/// Transformed potentials `Ψ̃ = Ψ + F`, `Ω̃ = Ω + ΔF` and the constraint norms.
#[derive(Debug, Clone)]
pub struct DarbouxPotentials {
    pub omega: GridField2D,
    pub psi: GridField2D,
    /// `sup |{Ω, ΔF}|`.
    pub constraint_omega: f64,
    /// `sup |{ΔF, F}|`.
    pub constraint_f: f64,
}

impl DarbouxPotentials {
    pub fn valid(&self) -> bool {
        self.constraint_omega < 1e-9 && self.constraint_f < 1e-9
    }
}

pub fn darboux_potentials(
    omega: &GridField2D,
    psi: &GridField2D,
    f_pot: &GridField2D,
) -> Result<DarbouxPotentials> {
    omega.same_shape(psi)?;
    omega.same_shape(f_pot)?;
    let lap = f_pot.laplacian();
    Ok(DarbouxPotentials {
        omega: omega.add(&lap)?,
        psi: psi.add(f_pot)?,
        constraint_omega: grid_bracket(omega, &lap)?.max_abs(),
        constraint_f: grid_bracket(&lap, f_pot)?.max_abs(),
    })
}

/// Full Darboux check for a steady configuration at `λ = 0`.
///
/// Norms: `omega_p`, `omega_f` (input residuals), `constraint_omega`,
/// `constraint_f`, `transformed` = `{Ω̃, p̃}` off-mask, `transformed_psi` =
/// `{Ψ̃, p̃}` off-mask, `form_agreement`, `masked_fraction`.
pub fn verify_darboux(
    omega: &GridField2D,
    psi: &GridField2D,
    f_pot: &GridField2D,
    p: &GridField2D,
    f: &GridField2D,
) -> Result<LaxReport> {
    let res_p = grid_bracket(omega, p)?.max_abs();
    let res_f = grid_bracket(omega, f)?.max_abs();
    let pots = darboux_potentials(omega, psi, f_pot)?;
    let mut failed = Vec::new();
    if !(res_p < 1e-9) {
        failed.push(format!("{{Omega, p}} = {res_p:e}"));
    }
    if !(res_f < 1e-9) {
        failed.push(format!("{{Omega, f}} = {res_f:e}"));
    }
    if !(pots.constraint_omega < 1e-9) {
        failed.push(format!("{{Omega, Lap F}} = {:e}", pots.constraint_omega));
    }
    if !(pots.constraint_f < 1e-9) {
        failed.push(format!("{{Lap F, F}} = {:e}", pots.constraint_f));
    }
    if !failed.is_empty() {
        return Err(Error::Precondition(format!(
            "Darboux inputs rejected: {}",
            failed.join(", ")
        )));
    }
    let gauge = darboux_gauge(p, f, omega)?;
    let mut report = LaxReport::default();
    report.insert("omega_p", res_p);
    report.insert("omega_f", res_f);
    report.insert("constraint_omega", pots.constraint_omega);
    report.insert("constraint_f", pots.constraint_f);
    report.insert("transformed", gauge.bracket_with(&pots.omega)?);
    report.insert("transformed_psi", gauge.bracket_with(&pots.psi)?);
    report.insert("form_agreement", gauge.form_agreement());
    report.insert("masked_fraction", gauge.masked_fraction());
    report.insert("p_tilde_max", gauge.max_abs());
    Ok(report)
}

/// Inputs of the shear-power construction: `Ω = 2 + cos(x+y)`, `p = Ω²`,
/// `f = Ω`, `F = c cos(x+y)`; `Ψ` inverts the zero-mean part of `Ω`.
pub struct ShearPower {
    pub omega: GridField2D,
    pub psi: GridField2D,
    pub f_pot: GridField2D,
    pub p: GridField2D,
    pub f: GridField2D,
}

pub fn shear_power(n: usize, c: f64) -> Result<ShearPower> {
    let omega = GridField2D::from_fn(n, |x, y| 2.0 + (x + y).cos())?;
    let psi = GridField2D::from_fn(n, |x, y| -0.5 * (x + y).cos())?;
    let f_pot = GridField2D::from_fn(n, |x, y| c * (x + y).cos())?;
    let p = omega.mul(&omega)?;
    Ok(ShearPower {
        f: omega.clone(),
        omega,
        psi,
        f_pot,
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_examples() {
        let n = 32;
        let om = GridField2D::from_fn(n, |x, y| (x + y).cos()).unwrap();
        let phi = GridField2D::from_fn(n, |x, y| (x - y).cos()).unwrap();
        let got = lax_l_2d(&om, &phi).unwrap();
        let want = GridField2D::from_fn(n, |x, y| -2.0 * (x + y).sin() * (x - y).sin()).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-13);
        assert!(lax_l_2d(&om, &om).unwrap().max_abs() < 1e-14);
        let c = GridField2D::constant(n, 3.0).unwrap();
        assert!(lax_a_2d(&om, &c).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn galerkin_tendency_matches_bracket() {
        let n = 32;
        let om = GridField2D::from_fn(n, |x, y| (x + 2.0 * y).cos() + 0.5 * (2.0 * x - y).sin())
            .unwrap();
        let psi = invert_laplacian(&om).unwrap();
        let t = euler_tendency(&om).unwrap();
        let b = grid_bracket(&psi, &om).unwrap();
        assert!(
            t.add(&b).unwrap().max_abs() < 1e-12,
            "{}",
            t.add(&b).unwrap().max_abs()
        );
    }

    #[test]
    fn rossby_examples() {
        let n = 16;
        let om = GridField2D::zeros(n).unwrap();
        let phi = GridField2D::from_fn(n, |x, _| x.cos()).unwrap();
        let got = rossby_l(&om, 0.7, &phi).unwrap();
        let want = GridField2D::from_fn(n, |x, _| 0.7 * x.sin()).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-14);
        let om = GridField2D::from_fn(n, |x, y| (x - y).sin()).unwrap();
        assert_eq!(
            rossby_l(&om, 0.0, &phi).unwrap(),
            lax_l_2d(&om, &phi).unwrap()
        );
        let c = GridField2D::constant(n, -1.0).unwrap();
        assert!(rossby_l(&om, 2.0, &c).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn isospectral_steady_and_zero() {
        let mut om = CoefficientField::zeros(2);
        om.set(WaveVector::new(1, 1), Complex64::new(0.5, 0.0))
            .unwrap();
        let r = isospectrality_check(&om, 1.0, 0.01, 3).unwrap();
        assert!(r.norm("hausdorff").unwrap() < 1e-10);
        let z = CoefficientField::zeros(2);
        let r = isospectrality_check(&z, 0.5, 0.1, 2).unwrap();
        assert!(r.spectra["t0"].iter().all(|l| l.norm() == 0.0));
        assert_eq!(r.norm("hausdorff"), Some(0.0));
    }

    fn abc(n: usize) -> VectorField3D {
        VectorField3D::from_fn(n, |x, y, z| {
            [z.sin() + y.cos(), x.sin() + z.cos(), y.sin() + x.cos()]
        })
        .unwrap()
    }

    #[test]
    fn beltrami_operators_coincide() {
        let u = abc(16);
        let phi = ScalarField3D::from_fn(16, |x, y, z| (x + 2.0 * y).sin() * z.cos()).unwrap();
        let (l, a) = lax_3d_scalar(&u, &u, &phi).unwrap();
        assert!(l.max_abs_diff(&a) < 1e-12);
        let (l, a) = lax_3d_vector(&u, &u, &u).unwrap();
        assert!(l.max_abs() < 1e-12 && a.max_abs() < 1e-12);
        let c = ScalarField3D::constant(16, 2.0).unwrap();
        let (l, a) = lax_3d_scalar(&u, &u, &c).unwrap();
        assert!(l.max_abs() < 1e-13 && a.max_abs() < 1e-13);
    }

    #[test]
    fn uniform_flow_and_curl_mismatch() {
        let n = 8;
        let u = VectorField3D::from_fn(n, |_, _, _| [1.0, 0.0, 0.0]).unwrap();
        let zero = VectorField3D::from_fn(n, |_, _, _| [0.0; 3]).unwrap();
        let phi = ScalarField3D::from_fn(n, |x, y, _| x.sin() * y.cos()).unwrap();
        let (l, a) = lax_3d_scalar(&zero, &u, &phi).unwrap();
        assert!(l.max_abs() < 1e-14);
        assert!(a.max_abs_diff(&phi.partial(0)) < 1e-14);
        assert!(lax_3d_scalar(&u, &u, &phi).is_err());
        let om = abc(n);
        let e1 = VectorField3D::from_fn(n, |_, _, _| [1.0, 0.0, 0.0]).unwrap();
        let (l, _) = lax_3d_vector(&om, &om, &e1).unwrap();
        let want = VectorField3D::new(
            om.components[0].partial(0).scale(-1.0),
            om.components[1].partial(0).scale(-1.0),
            om.components[2].partial(0).scale(-1.0),
        )
        .unwrap();
        assert!(l.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn shear_power_darboux() {
        let s = shear_power(64, 0.3).unwrap();
        let g = darboux_gauge(&s.p, &s.f, &s.omega).unwrap();
        assert!(g.max_abs_diff(&s.omega) < 1e-9);
        assert!(g.form_agreement() < 1e-8);
        let r = verify_darboux(&s.omega, &s.psi, &s.f_pot, &s.p, &s.f).unwrap();
        assert!(r.norm("transformed").unwrap() < 1e-8, "{r:?}");
        let z = darboux_gauge(&s.p, &s.p, &s.omega).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert!(z.grad_x.iter().chain(&z.grad_y).all(|&v| v == 0.0));
    }

    #[test]
    fn potentials_examples() {
        let n = 32;
        let om = GridField2D::from_fn(n, |x, y| 1.5 * (x + y).cos()).unwrap();
        let psi = invert_laplacian(&om).unwrap();
        let f = GridField2D::from_fn(n, |x, y| 0.4 * (x + y).cos()).unwrap();
        let d = darboux_potentials(&om, &psi, &f).unwrap();
        assert!(d.valid());
        let zero = GridField2D::zeros(n).unwrap();
        let d = darboux_potentials(&om, &psi, &zero).unwrap();
        assert_eq!(d.omega, om);
        assert_eq!(d.psi, psi);
        let bad = GridField2D::from_fn(n, |x, _| x.cos()).unwrap();
        let d = darboux_potentials(&om, &psi, &bad).unwrap();
        assert!(!d.valid());
        assert!(verify_darboux(&om, &psi, &bad, &om, &om).is_err());
    }

    #[test]
    fn gauge_rejects_mostly_masked_input() {
        let n = 16;
        let om = GridField2D::from_fn(n, |_, y| y.cos()).unwrap();
        let p = GridField2D::from_fn(n, |_, y| 2.0 + y.sin()).unwrap();
        assert!(darboux_gauge(&p, &p, &om).is_err());
    }
}
