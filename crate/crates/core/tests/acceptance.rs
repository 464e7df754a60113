//! Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use korn_core::grid::{GammaSpec, Grid, Preset};
use korn_core::identities::{run_suites, Sampler, SuiteOptions};
use korn_core::korn::{
    baby_korn_check, curl_ratio_samples, estimate_constant, kernel_dimension, norm_equivalence_constant, Bc,
    KernelStatus, Variant,
};
use korn_core::poly_fields::{
    anti_field, curl_mat, hessian, holomorphic_power, jac, planar_cauchy_riemann,
    reconstruct_d2_tr_with_sym_coefficient, PolyMat3,
};
use korn_core::grid::Face;
use korn_core::poly::Poly;
use korn_core::scalar::{rat, Rational};
use num_traits::Zero;

const SEED: u64 = 2021;
const IDENTITY_SECONDS: f64 = 120.0;
const KERNEL_SECONDS: f64 = 600.0;
const GAP_MIN: f64 = 1e3;
const PROJECTION_MAX: f64 = 1e-6;
const LAMBDA_FLOOR: f64 = 1e-3;
const REFINEMENT_CHANGE_MAX: f64 = 0.5;
const BABY_KORN_BOUND: f64 = 2.05;
const NORM_EQUIVALENCE_SAMPLES: usize = 100;
const C_STABILITY: f64 = 0.2;
const ORDER_RANGE: (f64, f64) = (1.8, 2.2);

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn cube(h: Rational, gamma: &GammaSpec) -> Grid {
    Grid::preset(Preset::Cube, &h, gamma).expect("cube grid")
}

fn identities() -> Outcome {
    let start = Instant::now();
    let outcomes = run_suites(&SuiteOptions { seed: SEED, ..SuiteOptions::default() });
    let secs = start.elapsed().as_secs_f64();
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed()).map(|o| format!("[{}] {}", o.group, o.name)).collect();
    let min_cases = |group: &str| outcomes.iter().filter(|o| o.group == group).map(|o| o.cases).min().unwrap_or(0);
    let algebra = min_cases("algebra").min(min_cases("cross"));
    let fields = ["nye", "curl-grad", "inc", "decomposition", "kroener", "saint-venant"].iter().map(|g| min_cases(g)).min().unwrap_or(0);
    Outcome {
        name: "exact identity suite",
        pass: failed.is_empty() && algebra >= 1000 && fields >= 200 && secs < IDENTITY_SECONDS,
        detail: format!(
            "{} identities, failures {:?}, min algebra cases {algebra}, min field cases {fields}, {secs:.1}s",
            outcomes.len(),
            failed
        ),
    }
}

fn reconstructions() -> Outcome {
    let opts = SuiteOptions { seed: SEED, only: Some(vec!["reconstruction".into()]), ..SuiteOptions::default() };
    let outcomes = run_suites(&opts);
    let all_pass = outcomes.len() == 4 && outcomes.iter().all(|o| o.passed() && o.cases >= 100);
    // which coefficient in front of sym Z reproduces D² tr(D axl A)
    let mut s = Sampler::new(SEED ^ 0x33);
    let (mut three_ok, mut one_ok) = (0, 0);
    let pairs = 100;
    for _ in 0..pairs {
        let a = s.poly_vec(4);
        let zeta = s.poly(4);
        let oracle = hessian(&jac(&a).trace());
        let field = anti_field(&a);
        if reconstruct_d2_tr_with_sym_coefficient(&field, &zeta, &rat(3, 1)).unwrap() == oracle {
            three_ok += 1;
        }
        if reconstruct_d2_tr_with_sym_coefficient(&field, &zeta, &rat(1, 1)).unwrap() == oracle {
            one_ok += 1;
        }
    }
    Outcome {
        name: "Hessian reconstructions",
        pass: all_pass && three_ok == pairs && one_ok < pairs,
        detail: format!(
            "{} reconstructions exact on >= 100 pairs: {all_pass}; sym coefficient 3 exact on {three_ok}/{pairs}, coefficient 1 on {one_ok}/{pairs}",
            outcomes.len()
        ),
    }
}

fn kernels() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for preset in [Preset::Cube, Preset::LShape] {
        let grid = Grid::preset(preset, &rat(1, 8), &GammaSpec::None).expect("grid");
        for v in Variant::PAIRS {
            let expected = v.kernel_family().expect("pair variant").dimension();
            match kernel_dimension(v, &grid, SEED) {
                Ok(r) => {
                    let proj = r.projection_residual.unwrap_or(f64::INFINITY);
                    pass &= r.kernel_count == expected
                        && r.status == KernelStatus::Determinate
                        && r.gap_ratio >= GAP_MIN
                        && proj <= PROJECTION_MAX;
                    parts.push(format!("{} {v}: {} (gap {:.1e}, proj {proj:.1e})", preset.name(), r.kernel_count, r.gap_ratio));
                }
                Err(e) => {
                    pass = false;
                    parts.push(format!("{} {v}: {e}", preset.name()));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome { name: "kernel dimensions", pass: pass && secs < KERNEL_SECONDS, detail: format!("{}; {secs:.0}s", parts.join(", ")) }
}

fn coercivity() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for bc in [Bc::Full, Bc::Partial(vec![Face { axis: 2, outward_positive: false }])] {
        let mut prev: Option<f64> = None;
        let mut line = format!("bc {bc}:");
        for h in [rat(1, 4), rat(1, 8), rat(1, 16)] {
            match estimate_constant(Variant::DsDc, &cube(h.clone(), &bc.gamma()), &bc, SEED) {
                Ok(r) => {
                    pass &= r.kernel_count == 0 && r.lambda_min >= LAMBDA_FLOOR;
                    if let Some(p) = prev {
                        let change = (r.lambda_min - p).abs() / p;
                        pass &= change < REFINEMENT_CHANGE_MAX;
                        line.push_str(&format!(" h={h} λ={:.4e} (Δ {:.1}%)", r.lambda_min, 100.0 * change));
                    } else {
                        line.push_str(&format!(" h={h} λ={:.4e}", r.lambda_min));
                    }
                    prev = Some(r.lambda_min);
                }
                Err(e) => {
                    pass = false;
                    line.push_str(&format!(" h={h} {e}"));
                }
            }
        }
        parts.push(line);
    }
    Outcome { name: "coercivity under the tangential condition", pass, detail: parts.join("; ") }
}

fn baby_korn() -> Outcome {
    let grid = cube(rat(1, 16), &GammaSpec::None);
    let report = baby_korn_check(&grid, 50, SEED);
    let max = report.max_ratio();
    Outcome {
        name: "baby trace-free Korn factor 2",
        pass: report.ratios.len() == 50 && max <= BABY_KORN_BOUND,
        detail: format!("max ratio {max:.4} over {} fields at h=1/16 (bound {BABY_KORN_BOUND})", report.ratios.len()),
    }
}

fn norm_equivalence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for bc in [Bc::Full, Bc::Partial(vec![Face { axis: 2, outward_positive: false }])] {
        let mut cs = Vec::new();
        for h in [rat(1, 4), rat(1, 8)] {
            let grid = cube(h.clone(), &bc.gamma());
            match norm_equivalence_constant(&grid, &bc, SEED) {
                Ok(r) => {
                    let ratios = curl_ratio_samples(&grid, NORM_EQUIVALENCE_SAMPLES, SEED);
                    let held = ratios.iter().filter(|&&q| q <= r.c_estimate * (1.0 + 1e-9)).count();
                    pass &= held == NORM_EQUIVALENCE_SAMPLES;
                    parts.push(format!("bc {bc} h={h}: c={:.4} holds {held}/{NORM_EQUIVALENCE_SAMPLES}", r.c_estimate));
                    cs.push(r.c_estimate);
                }
                Err(e) => {
                    pass = false;
                    parts.push(format!("bc {bc} h={h}: {e}"));
                }
            }
        }
        if let [c0, c1] = cs[..] {
            let change = (c1 - c0).abs() / c0;
            pass &= change <= C_STABILITY;
            parts.push(format!("change {:.1}%", 100.0 * change));
        }
    }
    Outcome { name: "norm equivalence of Curl and dev Curl", pass, detail: parts.join(", ") }
}

fn planar() -> Outcome {
    let conformal = (1..=6).all(|k| {
        let d = planar_cauchy_riemann(&holomorphic_power(k));
        d.0.iter().flatten().all(|p| p.is_zero())
    });
    let perturbed = (1..=6).all(|k| {
        let mut u = holomorphic_power(k);
        u[0] = u[0].clone() + Poly::var(0) * Poly::var(1);
        let d = planar_cauchy_riemann(&u);
        !d.0.iter().flatten().all(|p| p.is_zero())
    });
    Outcome {
        name: "planar Cauchy-Riemann",
        pass: conformal && perturbed,
        detail: format!("holomorphic powers k=1..6 conformal: {conformal}; perturbed pairs detected: {perturbed}"),
    }
}

fn curl_error(h: Rational, p: &PolyMat3, exact: &PolyMat3) -> f64 {
    let grid = cube(h, &GammaSpec::None);
    let discrete = grid.curl_op().matvec(&grid.sample(p).values);
    let reference = grid.sample(exact).values;
    discrete.iter().zip(&reference).map(|(d, r)| (d - r).abs()).fold(0.0, f64::max)
}

fn power(x: Poly, k: u32) -> Poly {
    (1..k).fold(x.clone(), |acc, _| acc * x.clone())
}

fn curl_order() -> Outcome {
    let mut s = Sampler::new(SEED ^ 0x4);
    let mut p = s.poly_mat(4);
    // make sure every entry actually has degree 4
    for (i, row) in p.0.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = e.clone() + power(Poly::var((i + j) % 3), 4) + power(Poly::var((i + 2 * j + 1) % 3), 3);
        }
    }
    let exact = curl_mat(&p);
    let errors: Vec<f64> = [rat(1, 4), rat(1, 8), rat(1, 16)].into_iter().map(|h| curl_error(h, &p, &exact)).collect();
    let orders: Vec<f64> = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let pass = orders.iter().all(|o| (ORDER_RANGE.0..=ORDER_RANGE.1).contains(o));
    Outcome {
        name: "discrete Curl convergence order",
        pass,
        detail: format!("max-norm errors {:?} at h=1/4,1/8,1/16, observed orders {:?}", fmt(&errors), fmt(&orders)),
    }
}

fn fmt(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3e}")).collect()
}

fn main() -> ExitCode {
    let checks: [fn() -> Outcome; 8] =
        [identities, reconstructions, kernels, coercivity, baby_korn, norm_equivalence, planar, curl_order];
    let mut failed = 0;
    for check in checks {
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} {}: {} [{:.1}s]", o.name, o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
