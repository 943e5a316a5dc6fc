//! Subcommand runners. Each writes its own report files into the output
//! directory; the manifest is written by the caller.

use eulerlab::dashed_line::{
    self, DashedLineParams, DashedLineState, HeteroclinicParams, KappaSign,
};
use eulerlab::fourier::{
    dealias_cutoff, energy, enstrophy, integrate_galerkin, CoefficientField, GridField2D,
    ScalarField3D, VectorField3D, WaveVector,
};
use eulerlab::nls::{self, NLSParams, XiVariant};
use eulerlab::shadowing::{self, Extension, MapSystem, PseudoOrbit, SymbolSequence};
use eulerlab::spectra;
use eulerlab::{lax, Complex64, Error};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{Cell, OutputDir, Table};

pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;
pub const EXIT_IO: i32 = 1;

#[derive(Debug)]
pub struct RunError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            EXIT_NUMERIC
        } else {
            EXIT_PRECONDITION
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("i/o: {e}"),
        }
    }
}

type Run = Result<(), RunError>;

fn precondition(message: impl Into<String>) -> RunError {
    RunError {
        code: EXIT_PRECONDITION,
        message: message.into(),
    }
}

fn numeric(message: impl Into<String>) -> RunError {
    RunError {
        code: EXIT_NUMERIC,
        message: message.into(),
    }
}

fn cz(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn dispatch(cmd: &Command, seed: u64, out: &mut OutputDir) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match cmd {
        Command::Spectrum(a) => spectrum(a, out),
        Command::EulerSim(a) => euler_sim(a, &mut rng, out),
        Command::DashedLine(a) => dashed_line_run(a, &mut rng, out),
        Command::NlsSim(a) => nls_sim(a, out),
        Command::NlsSaddle(a) => nls_saddle(a, out),
        Command::LaxCheck(a) => lax_check(a, &mut rng, out),
        Command::Darboux(a) => darboux(a, out),
        Command::Shadow(a) => shadow(a, &mut rng, out),
    }
}

fn spectrum(a: &SpectrumArgs, out: &mut OutputDir) -> Run {
    let gamma = Complex64::new(a.gamma.0, a.gamma.1);
    if gamma.norm() == 0.0 {
        return Err(precondition("gamma must be nonzero"));
    }
    if !(a.threshold >= 0.0) {
        return Err(precondition("threshold must be nonnegative"));
    }
    let cls = spectra::class((a.khat.0, a.khat.1), (a.p.0, a.p.1))?;
    let op = spectra::build_class_operator(cls, gamma, a.trunc)?;
    let rep = spectra::truncated_spectrum(&op)?;
    let count = spectra::count_nonimaginary(&rep, 0.5 * a.threshold * gamma.norm())?;

    let mut table = Table::new(["index", "re", "im", "re_normalized", "im_normalized"]);
    for (i, &l) in rep.eigenvalues.iter().enumerate() {
        let lt = spectra::normalize(l, gamma);
        table.push([
            Cell::from(i),
            l.re.into(),
            l.im.into(),
            lt.re.into(),
            lt.im.into(),
        ]);
    }
    let refined: Vec<Value> = if a.refine {
        rep.eigenvalues
            .iter()
            .filter(|l| spectra::normalize(**l, gamma).re.abs() > a.threshold)
            .map(|&seed| match spectra::continued_fraction_eigen(&op, seed) {
                Ok(l) => json!({
                    "seed": cz(seed),
                    "lambda": cz(l),
                    "lambda_normalized": cz(spectra::normalize(l, gamma)),
                }),
                Err(e) => json!({ "seed": cz(seed), "error": e.to_string() }),
            })
            .collect()
    } else {
        Vec::new()
    };
    let report = json!({
        "khat": [a.khat.0, a.khat.1],
        "p": [a.p.0, a.p.1],
        "gamma": cz(gamma),
        "trunc": rep.trunc,
        "case": rep.case,
        "b": rep.b,
        "zeta_bound": rep.zeta_bound,
        "count_nonimaginary": count,
        "quadruple_symmetry_defect": spectra::quadruple_symmetry_defect(
            &rep.eigenvalues
                .iter()
                .copied()
                .filter(|l| spectra::normalize(*l, gamma).re.abs() > a.threshold)
                .collect::<Vec<_>>()
        ),
        "refined": refined,
        "eigenvalues": rep.eigenvalues.iter().map(|&l| cz(l)).collect::<Vec<_>>(),
    });
    out.write_csv("spectrum.csv", &table)?;
    out.write_json("spectrum.json", &report)?;
    Ok(())
}

fn euler_sim(a: &EulerSimArgs, rng: &mut ChaCha8Rng, out: &mut OutputDir) -> Run {
    if a.sample_every == 0 {
        return Err(precondition("sample-every must be at least 1"));
    }
    let state0 = match a.init {
        EulerInit::Random => {
            if a.b == 0 || !(a.enstrophy > 0.0) {
                return Err(precondition("random init needs b >= 1 and enstrophy > 0"));
            }
            let mut f = CoefficientField::zeros(a.b);
            let b = a.b as i64;
            for k1 in -b..=b {
                for k2 in -b..=b {
                    let k = WaveVector::new(k1, k2);
                    if k.is_positive_half() {
                        let amp = (-(k.norm2() as f64) / 8.0).exp() * rng.gen_range(0.5..1.5);
                        f.set(
                            k,
                            Complex64::from_polar(amp, rng.gen_range(0.0..std::f64::consts::TAU)),
                        )?;
                    }
                }
            }
            f.scale((a.enstrophy / enstrophy(&f)).sqrt())
        }
        EulerInit::File => {
            let path = a
                .input
                .as_ref()
                .ok_or_else(|| precondition("--init file needs --input"))?;
            let text = std::fs::read_to_string(path)?;
            CoefficientField::from_json(&text)?
        }
    };
    let run = integrate_galerkin(&state0, a.dt, a.steps, a.sample_every)?;
    let mut table = Table::new(["t", "energy", "enstrophy"]);
    for i in 0..run.times.len() {
        table.push([
            Cell::from(run.times[i]),
            run.energy[i].into(),
            run.enstrophy[i].into(),
        ]);
    }
    out.write_csv("euler_invariants.csv", &table)?;
    out.write("euler_initial_state.json", state0.to_json()?.as_bytes())?;
    out.write(
        "euler_final_state.json",
        run.final_state.to_json()?.as_bytes(),
    )?;
    out.write_json(
        "euler_report.json",
        &json!({
            "half_width": state0.half_width(),
            "dt": a.dt,
            "steps": a.steps,
            "energy_initial": energy(&state0),
            "enstrophy_initial": enstrophy(&state0),
            "max_relative_energy_drift": run.max_relative_energy_drift(),
            "max_relative_enstrophy_drift": run.max_relative_enstrophy_drift(),
        }),
    )?;
    Ok(())
}

fn kappa_sign(s: Sign) -> KappaSign {
    match s {
        Sign::Positive => KappaSign::Positive,
        Sign::Negative => KappaSign::Negative,
    }
}

fn dashed_line_run(a: &DashedLineArgs, rng: &mut ChaCha8Rng, out: &mut OutputDir) -> Run {
    let params = DashedLineParams::new(a.gamma, a.epsilon, a.trunc)?;
    let het = HeteroclinicParams {
        tau0: a.tau0,
        theta0: a.theta0,
        kappa_sign: kappa_sign(a.kappa_sign),
    };
    let mut s0 = match a.init {
        DashedInit::Heteroclinic => {
            dashed_line::analytic_heteroclinic(a.t_start, &het, a.gamma, &params)
                .to_state(&params)?
        }
        DashedInit::FixedPoint => DashedLineState::fixed_point(&params),
    };
    if a.perturbation > 0.0 {
        let mut v = s0.to_vec();
        for x in v.iter_mut() {
            *x += rng.gen_range(-a.perturbation..=a.perturbation);
        }
        s0 = DashedLineState::from_vec(&v);
    }
    let traj = dashed_line::integrate_sampled(&s0, &params, a.dt, a.steps, a.sample_every)?;
    let t = params.trunc as i64;
    let mut header = vec!["t".to_string(), "omega_p".to_string()];
    header.extend((-t..=t).map(|n| format!("omega_{n}")));
    let analytic = matches!(a.init, DashedInit::Heteroclinic);
    if analytic {
        header.push("analytic_deviation".into());
    }
    let mut table = Table::new(header);
    let mut worst: f64 = 0.0;
    for (time, s) in traj.times.iter().zip(&traj.states) {
        let mut row: Vec<Cell> = s.to_vec().into_iter().map(Cell::from).collect();
        row.insert(0, Cell::from(*time));
        if analytic {
            let exact =
                dashed_line::analytic_heteroclinic(a.t_start + time, &het, a.gamma, &params)
                    .to_state(&params)?;
            let d = s.max_abs_diff(&exact);
            worst = worst.max(d);
            row.push(Cell::from(d));
        }
        table.push(row);
    }
    let taus = dashed_line::tau_samples(&het, a.gamma, -5.0, 5.0, 100)?;
    let residual = dashed_line::orbit_residual(&het, a.gamma, &taus)?;
    out.write_csv("dashed_trajectory.csv", &table)?;
    out.write_json(
        "dashed_report.json",
        &json!({
            "a1": params.a1(),
            "a2": params.a2(),
            "kappa": params.kappa(het.kappa_sign),
            "closed_form_residual": residual,
            "max_analytic_deviation": if analytic { json!(worst) } else { Value::Null },
            "samples": traj.times.len(),
        }),
    )?;
    Ok(())
}

fn nls_params(
    n: usize,
    omega: f64,
    alpha: f64,
    beta: f64,
    epsilon: f64,
) -> Result<NLSParams, RunError> {
    Ok(NLSParams::new(n, omega, alpha, beta, epsilon)?)
}

fn nls_sim(a: &NlsSimArgs, out: &mut OutputDir) -> Run {
    let p = nls_params(a.n, a.omega, a.alpha, a.beta, a.epsilon)?;
    let dt = a.dt.unwrap_or_else(|| p.max_dt());
    let s0 = nls::perturbed_saddle(&p, a.perturbation)?;
    let traj = nls::simulate_sampled(&s0, &p, dt, a.steps, a.sample_every)?;
    let enc = nls::center_wing_encode(&traj.states);
    let equivariant = if a.n.is_multiple_of(2) {
        let shifted = nls::center_wing_encode(&traj.half_period_translate()?.states);
        Some(shifted == enc.swapped())
    } else {
        None
    };
    let m = a.n / 2;
    let mut header = vec!["t", "mass", "max_amplitude", "symbol"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    for k in 0..=m {
        header.push(format!("re_q{k}"));
        header.push(format!("im_q{k}"));
    }
    let mut table = Table::new(header);
    for (i, s) in traj.states.iter().enumerate() {
        let mut row = vec![
            Cell::from(traj.times[i]),
            traj.mass[i].into(),
            traj.max_amplitude[i].into(),
            Cell::Text(enc.raw[i..i + 1].to_string()),
        ];
        for z in &s.values()[..=m] {
            row.push(z.re.into());
            row.push(z.im.into());
        }
        table.push(row);
    }
    out.write_csv("nls_trajectory.csv", &table)?;
    out.write_json(
        "nls_symbols.json",
        &json!({
            "dt": dt,
            "steps": a.steps,
            "raw": enc.raw,
            "word": enc.word,
            "alternations": enc.alternations(),
            "has_center_and_wing": enc.word.contains('C') && enc.word.contains('W'),
            "translation_equivariant": equivariant,
        }),
    )?;
    Ok(())
}

fn nls_saddle(a: &NlsSaddleArgs, out: &mut OutputDir) -> Run {
    let p = nls_params(a.n, a.omega, a.alpha, a.beta, a.epsilon)?;
    let variant = match a.variant {
        Variant::Regular => XiVariant::Regular { n_cut: a.n_cut },
        Variant::Singular => XiVariant::Singular,
    };
    let continuum = nls::continuum_saddle(&p).map(|s| {
        let spectrum = nls::continuum_spectrum(&p, s.i, variant, a.n_max);
        let flags = nls::silnikov_check(&spectrum);
        json!({
            "I": s.i,
            "theta": s.theta,
            "eigenvalues": spectrum,
            "silnikov": flags,
            "silnikov_all": flags.all(),
        })
    });
    let discrete = if p.in_window() {
        let d = nls::discrete_saddle(&p)?;
        Some(json!({
            "amplitude": cz(d.amplitude),
            "unstable_even_directions": d.unstable_count(1e-8),
            "even_eigenvalues": d.even_eigenvalues.iter().map(|&z| cz(z)).collect::<Vec<_>>(),
            "full_eigenvalues": d.full_eigenvalues.iter().map(|&z| cz(z)).collect::<Vec<_>>(),
            "newton_iterations": d.newton_iterations,
        }))
    } else {
        None
    };
    let continuum = match (continuum, &discrete) {
        (Ok(v), _) => v,
        (Err(e), Some(_)) => json!({ "error": e.to_string() }),
        (Err(e), None) => return Err(e.into()),
    };
    let second = match a.delta_gamma {
        Some(d) => json!(nls::second_measurement(a.alpha, a.omega, d)?),
        None => Value::Null,
    };
    let (lo, hi) = p.window();
    out.write_json(
        "nls_saddle.json",
        &json!({
            "continuum": continuum,
            "discrete": discrete,
            "window": [lo, hi],
            "second_measurement": second,
        }),
    )?;
    Ok(())
}

fn band_limited(n: usize, kmax: i64, rng: &mut ChaCha8Rng) -> Result<GridField2D, RunError> {
    let mut modes = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            if (k1, k2) != (0, 0) {
                modes.push((
                    k1 as f64,
                    k2 as f64,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ));
            }
        }
    }
    let f = GridField2D::from_fn(n, |x, y| {
        modes
            .iter()
            .map(|&(a, b, amp, ph)| amp * (a * x + b * y + ph).cos())
            .sum()
    })?;
    Ok(f.scale(1.0 / f.max_abs()))
}

const JACOBI_TOL: f64 = 1e-10;
const CONTROL_MIN: f64 = 1e-3;
const ISOSPECTRAL_TOL: f64 = 1e-10;
const BELTRAMI_TOL: f64 = 1e-10;

fn lax_check(a: &LaxCheckArgs, rng: &mut ChaCha8Rng, out: &mut OutputDir) -> Run {
    let n = a.resolution;
    let needs_fields = matches!(
        a.case,
        LaxCase::Jacobi | LaxCase::Compatibility | LaxCase::Control
    );
    if needs_fields {
        if a.bandlimit < 1 || !n.is_power_of_two() || n < 16 || 3 * a.bandlimit > dealias_cutoff(n)
        {
            return Err(precondition(format!(
                "need 1 <= 3*bandlimit <= {} at resolution {n}",
                if n >= 1 { dealias_cutoff(n.max(1)) } else { 0 }
            )));
        }
        if a.trials == 0 {
            return Err(precondition("trials must be at least 1"));
        }
    }
    let (measure, tolerance, pass, extra) = match a.case {
        LaxCase::Jacobi => {
            let mut worst: f64 = 0.0;
            for _ in 0..a.trials {
                let f = band_limited(n, a.bandlimit, rng)?;
                let g = band_limited(n, a.bandlimit, rng)?;
                let h = band_limited(n, a.bandlimit, rng)?;
                worst = worst.max(lax::jacobi_defect(&f, &g, &h)?);
            }
            (worst, JACOBI_TOL, worst < JACOBI_TOL, Value::Null)
        }
        LaxCase::Compatibility | LaxCase::Control => {
            let mut norms = std::collections::BTreeMap::<String, f64>::new();
            for _ in 0..a.trials {
                let omega = band_limited(n, a.bandlimit, rng)?;
                let phis = (0..5)
                    .map(|_| band_limited(n, a.bandlimit, rng))
                    .collect::<Result<Vec<_>, _>>()?;
                let rep = if matches!(a.case, LaxCase::Control) {
                    lax::compatibility_residual_2d_with(&omega, &phis, |w| Ok(w.clone()))?
                } else {
                    lax::compatibility_residual_2d(&omega, &phis)?
                };
                for (k, v) in rep.norms {
                    let e = norms.entry(k).or_insert(0.0);
                    *e = e.max(v);
                }
            }
            if matches!(a.case, LaxCase::Control) {
                let t = norms.get("transport").copied().unwrap_or(0.0);
                (t, CONTROL_MIN, t > CONTROL_MIN, json!(norms))
            } else {
                let j = norms.get("jacobi").copied().unwrap_or(f64::INFINITY);
                (j, JACOBI_TOL, j < JACOBI_TOL, json!(norms))
            }
        }
        LaxCase::Isospectral => {
            let mut steady = CoefficientField::zeros(a.b.max(1));
            steady.set(WaveVector::new(1, 1), Complex64::new(0.5, 0.0))?;
            let rep = lax::isospectrality_check(&steady, a.time, a.dt, a.b)?;
            let d = rep.norm("hausdorff").unwrap_or(f64::INFINITY);
            (d, ISOSPECTRAL_TOL, d < ISOSPECTRAL_TOL, Value::Null)
        }
        LaxCase::Beltrami => {
            let u = VectorField3D::from_fn(n, |x, y, z| {
                [z.sin() + y.cos(), x.sin() + z.cos(), y.sin() + x.cos()]
            })?;
            let phi = ScalarField3D::from_fn(n, |x, y, z| (x - 2.0 * z).cos() * (3.0 * y).sin())?;
            let (l, am) = lax::lax_3d_scalar(&u, &u, &phi)?;
            let d = l.max_abs_diff(&am);
            (d, BELTRAMI_TOL, d < BELTRAMI_TOL, Value::Null)
        }
    };
    out.write_json(
        "lax_report.json",
        &json!({
            "case": a.case,
            "resolution": n,
            "measure": measure,
            "tolerance": tolerance,
            "pass": pass,
            "norms": extra,
        }),
    )?;
    if pass {
        Ok(())
    } else {
        Err(numeric(format!(
            "lax-check {:?}: measure {measure:e} against {tolerance:e}",
            a.case
        )))
    }
}

fn darboux(a: &DarbouxArgs, out: &mut OutputDir) -> Run {
    let s = lax::shear_power(a.resolution, a.c)?;
    let rep = lax::verify_darboux(&s.omega, &s.psi, &s.f_pot, &s.p, &s.f)?;
    let gauge = lax::darboux_gauge(&s.p, &s.f, &s.omega)?;
    let mut table = Table::new(["x", "y", "p_tilde", "valid"]);
    let n = a.resolution;
    for i in 0..n * n {
        let (x, y) = s.omega.node(i);
        table.push([
            Cell::from(x),
            y.into(),
            gauge.values[i].into(),
            Cell::from(usize::from(gauge.mask[i])),
        ]);
    }
    out.write_csv("darboux_gauge.csv", &table)?;
    out.write_json(
        "darboux_report.json",
        &json!({ "c": a.c, "resolution": n, "norms": rep.norms }),
    )?;
    Ok(())
}

fn kicked(
    center: &DVector<f64>,
    delta: f64,
    len: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<DVector<f64>> {
    (0..len)
        .map(|_| center + DVector::from_fn(center.len(), |_, _| rng.gen_range(-delta..=delta)))
        .collect()
}

fn shadow(a: &ShadowArgs, rng: &mut ChaCha8Rng, out: &mut OutputDir) -> Run {
    if !(a.delta > 0.0) || a.length < 2 {
        return Err(precondition("need delta > 0 and length >= 2"));
    }
    let (map, points, closed_form): (MapSystem, Vec<DVector<f64>>, Option<DVector<f64>>) =
        match a.map {
            ShadowMap::LinearTest => {
                let f = shadowing::linear_test_map();
                let mut pts = vec![DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0))];
                while pts.len() < a.length {
                    let kick = DVector::from_fn(2, |_, _| rng.gen_range(-a.delta..=a.delta));
                    let next = f.apply(pts.last().unwrap()) + kick;
                    pts.push(next);
                }
                let exact = shadowing::linear_closed_form_shadow(&[2.0, 0.5], &pts);
                (f, pts, Some(exact))
            }
            ShadowMap::Duffing => {
                let f = shadowing::duffing_map(a.period.unwrap_or(1.0), a.substeps);
                let m = a.segment as i64;
                let seg: Vec<_> = (-m..=m)
                    .map(|j| shadowing::duffing_homoclinic(j as f64))
                    .collect();
                let word = SymbolSequence::binary(&a.word, Extension::ConstantEnds)?;
                let po = shadowing::palmer_assembly(&DVector::zeros(2), &seg, &word, &f)?;
                (f, po.points, None)
            }
            ShadowMap::DashedLine => {
                let params = DashedLineParams::new(a.gamma, a.epsilon, a.trunc)?;
                let f = shadowing::dashed_line_map(&params, a.period.unwrap_or(1.0), a.substeps);
                let center = DVector::from_vec(DashedLineState::fixed_point(&params).to_vec());
                let pts = kicked(&center, a.delta, a.length, rng);
                (f, pts, None)
            }
            ShadowMap::NlsPoincare => {
                let p = nls_params(a.n, a.omega, a.alpha, a.beta, a.epsilon)?;
                let saddle = nls::discrete_saddle(&p)?;
                let f = shadowing::nls_period_map(&p, a.period.unwrap_or(0.05), a.substeps);
                let center = DVector::from_vec(
                    saddle.state.values()[..=a.n / 2]
                        .iter()
                        .flat_map(|z| [z.re, z.im])
                        .collect(),
                );
                let pts = kicked(&center, a.delta, a.length, rng);
                (f, pts, None)
            }
        };
    let po = PseudoOrbit::measured(points, &map)?;
    let sh = shadowing::find_shadow(&po, &map)?;
    let true_defect = shadowing::is_pseudo_orbit(&sh.orbit, &map, 0.0)?.max_defect;
    let hyperbolicity = match shadowing::hyperbolicity_estimate(&sh.orbit, &map) {
        Ok(r) => json!(r),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let closed_form_mismatch = closed_form.map(|x0| {
        sh.orbit
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let ex = DVector::from_vec(vec![
                    2f64.powi(j as i32) * x0[0],
                    0.5f64.powi(j as i32) * x0[1],
                ]);
                (x - ex).amax()
            })
            .fold(0.0, f64::max)
    });
    let d = map.dimension;
    let mut header = vec!["j".to_string()];
    header.extend((0..d).map(|i| format!("pseudo_{i}")));
    header.extend((0..d).map(|i| format!("shadow_{i}")));
    let mut table = Table::new(header);
    for (j, (y, x)) in po.points.iter().zip(&sh.orbit).enumerate() {
        let mut row = vec![Cell::from(j)];
        row.extend(y.iter().map(|&v| Cell::from(v)));
        row.extend(x.iter().map(|&v| Cell::from(v)));
        table.push(row);
    }
    out.write_csv("shadow_orbit.csv", &table)?;
    out.write_json(
        "shadow_report.json",
        &json!({
            "map": a.map,
            "dimension": d,
            "length": po.len(),
            "delta": po.delta,
            "epsilon": sh.epsilon,
            "iterations": sh.iterations,
            "residual_history": sh.residual_history,
            "shadow_defect": true_defect,
            "closed_form_mismatch": closed_form_mismatch,
            "hyperbolicity": hyperbolicity,
        }),
    )?;
    Ok(())
}
