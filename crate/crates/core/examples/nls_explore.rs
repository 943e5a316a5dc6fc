//! Scans a parameter grid for runs with frequent center/wing jumps.
//!
//! Usage: nls_explore N AMP "omegas" "epsilons" "alphas" "betas"

use eulerlab::nls::{center_wing_encode, perturbed_saddle, simulate_sampled, NLSParams};

fn list(arg: &str) -> Vec<f64> {
    arg.split(',')
        .map(|v| v.trim().parse().expect("number"))
        .collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args[1].parse().expect("N");
    let amp: f64 = args[2].parse().expect("amplitude");
    let steps = 1_000_000;
    for &omega in &list(&args[3]) {
        for &eps in &list(&args[4]) {
            for &alpha in &list(&args[5]) {
                for &beta in &list(&args[6]) {
                    let tag = format!("N={n} omega={omega} eps={eps} alpha={alpha} beta={beta}");
                    let Ok(p) = NLSParams::new(n, omega, alpha, beta, eps) else {
                        continue;
                    };
                    let s0 = match perturbed_saddle(&p, amp) {
                        Ok(s) => s,
                        Err(e) => {
                            println!("{tag}: {e}");
                            continue;
                        }
                    };
                    match simulate_sampled(&s0, &p, p.max_dt(), steps, 100) {
                        Ok(tr) => {
                            let e = center_wing_encode(&tr.states);
                            let q = e.raw.chars().filter(|&c| c == '?').count();
                            let tail = &tr.max_amplitude[tr.max_amplitude.len() - 1];
                            println!(
                                "{tag}: alternations {} ambiguous {q} final max|q| {tail:.3}",
                                e.alternations()
                            );
                        }
                        Err(err) => println!("{tag}: {err}"),
                    }
                }
            }
        }
    }
}
