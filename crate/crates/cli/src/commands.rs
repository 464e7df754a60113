use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use korn_core::grid::{GammaSpec, Grid};
use korn_core::identities::{run_suites, SuiteOptions, GROUPS};
use korn_core::korn::{
    baby_korn_check, estimate_constant, kernel_dimension, Bc, KernelStatus, SpectrumReport, Variant,
};
use korn_core::scalar::{Field, Rational};

use crate::config::{ConfigError, RunConfig};
use crate::svg::{loglog, Series};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub type CmdResult = Result<u8, ConfigError>;

/// Largest relative distance of a computed kernel vector from the analytic kernel.
const PROJECTION_TOL: f64 = 1e-6;

fn io_err(e: io::Error) -> ConfigError {
    ConfigError(format!("cannot write output: {e}"))
}

/// Writes `body` to `<out>/<name>` or, without an output directory, CSV to stdout.
fn emit(cfg: &RunConfig, name: &str, body: &str, stdout_fallback: bool) -> Result<(), ConfigError> {
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err)?;
            let path = PathBuf::from(dir).join(name);
            fs::write(&path, body).map_err(io_err)?;
            eprintln!("wrote {}", path.display());
        }
        None if stdout_fallback => {
            io::stdout().write_all(body.as_bytes()).map_err(io_err)?;
        }
        None => eprintln!("no --out directory given; {name} not written"),
    }
    Ok(())
}

fn spectrum_csv(rows: &[SpectrumReport]) -> String {
    let mut s = String::from(SpectrumReport::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

const FAILURE_MESSAGE_CHARS: usize = 400;

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{} …", &s[..i]),
        None => s.to_string(),
    }
}

pub fn identities(cfg: &RunConfig, inject_fault: bool) -> CmdResult {
    if let Some(only) = &cfg.only {
        if let Some(bad) = only.iter().find(|g| !GROUPS.contains(&g.as_str())) {
            return Err(ConfigError(format!("unknown identity group '{bad}' (known: {})", GROUPS.join(", "))));
        }
    }
    let opts = SuiteOptions { seed: cfg.seed, only: cfg.only.clone(), inject_fault, ..SuiteOptions::default() };
    let outcomes = run_suites(&opts);
    let mut table = String::from("group,identity,cases,failures,status\n");
    let mut failed = 0;
    for o in &outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        println!("{status} [{}] {} ({} cases, {} failures)", o.group, o.name, o.cases, o.failures);
        if let Some(msg) = &o.first_failure {
            println!("     first failure: {}", truncate(msg, FAILURE_MESSAGE_CHARS));
        }
        if !o.passed() {
            failed += 1;
        }
        table.push_str(&format!("{},\"{}\",{},{},{status}\n", o.group, o.name.replace('"', "'"), o.cases, o.failures));
    }
    println!("{} identities, {} passed, {} failed", outcomes.len(), outcomes.len() - failed, failed);
    if let Some(path) = &cfg.report {
        fs::write(path, table).map_err(io_err)?;
    }
    Ok(if failed == 0 && !outcomes.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn kernels(cfg: &RunConfig) -> CmdResult {
    if cfg.bc != Bc::None {
        return Err(ConfigError("kernels runs without boundary conditions; use --bc none".into()));
    }
    if let Some(v) = cfg.variants.iter().find(|v| v.kernel_family().is_none()) {
        return Err(ConfigError(format!("{v} has no kernel family")));
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for h in &cfg.h {
        let grid = cfg.grid(h)?;
        for &v in &cfg.variants {
            let expected = v.kernel_family().map(|f| f.dimension()).unwrap_or(0);
            match kernel_dimension(v, &grid, cfg.seed) {
                Ok(r) => {
                    let proj = r.projection_residual.unwrap_or(f64::INFINITY);
                    let good = r.status == KernelStatus::Determinate && r.kernel_count == expected && proj <= PROJECTION_TOL;
                    let state = match (r.status, good) {
                        (KernelStatus::Indeterminate, _) => "INDETERMINATE",
                        (_, true) => "PASS",
                        (_, false) => "FAIL",
                    };
                    eprintln!(
                        "{state} {v} {} h={}: kernel {} (expected {expected}), gap {:.3e}, projection residual {proj:.2e}",
                        r.domain, r.h, r.kernel_count, r.gap_ratio
                    );
                    ok &= good;
                    rows.push(r);
                }
                Err(e) => {
                    eprintln!("FAIL {v} h={h}: {e}");
                    ok = false;
                }
            }
        }
    }
    if cfg.format.csv() {
        emit(cfg, "kernels.csv", &spectrum_csv(&rows), true)?;
    }
    if cfg.format.svg() {
        let series = variant_series(&rows, |r| r.gap_ratio);
        emit(cfg, "kernels.svg", &loglog("spectral gap above the kernel", "h", "gap ratio", &series), false)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn variant_series(rows: &[SpectrumReport], value: impl Fn(&SpectrumReport) -> f64) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows {
        let label = r.variant.to_string();
        let point = (r.h_f64(), value(r));
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push(point),
            None => out.push(Series { label, points: vec![point] }),
        }
    }
    out
}

pub fn constant(cfg: &RunConfig) -> CmdResult {
    if cfg.bc == Bc::None {
        return Err(ConfigError("constant needs --bc full or --gamma <faces>".into()));
    }
    let mut rows: Vec<SpectrumReport> = Vec::new();
    let mut ok = true;
    for h in &cfg.h {
        let grid = cfg.grid(h)?;
        if !grid.has_gamma() {
            return Err(ConfigError(format!("Γ selects no boundary face of the domain at h={h}")));
        }
        for &v in &cfg.variants {
            match estimate_constant(v, &grid, &cfg.bc, cfg.seed) {
                Ok(r) => {
                    let good = r.kernel_count == 0 && r.lambda_min > 0.0;
                    let prev = rows.iter().rev().find(|p| p.variant == v).map(|p| p.lambda_min);
                    let change = prev.map_or(String::new(), |p| format!(", change {:+.2}%", 100.0 * (r.lambda_min - p) / p));
                    eprintln!(
                        "{} {v} {} h={} bc={}: lambda_min {:.6e}, c {:.6e}, kernel {}{change}{}",
                        if good { "OK" } else { "FAIL" },
                        r.domain,
                        r.h,
                        r.bc,
                        r.lambda_min,
                        r.c_estimate,
                        r.kernel_count,
                        r.deflation_dim.map_or(String::new(), |d| format!(", deflated {d}"))
                    );
                    ok &= good;
                    rows.push(r);
                }
                Err(e) => {
                    eprintln!("FAIL {v} h={h}: {e}");
                    ok = false;
                }
            }
        }
    }
    if cfg.format.csv() {
        emit(cfg, "constant.csv", &spectrum_csv(&rows), true)?;
    }
    if cfg.format.svg() {
        let mut series = variant_series(&rows, |r| r.lambda_min);
        series.iter_mut().for_each(|s| s.label = format!("λ_min {}", s.label));
        let mut cs = variant_series(&rows, |r| r.c_estimate);
        cs.iter_mut().for_each(|s| s.label = format!("c {}", s.label));
        series.extend(cs);
        emit(cfg, "constant.svg", &loglog("Korn constant estimates", "h", "value", &series), false)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn babykorn(cfg: &RunConfig) -> CmdResult {
    let mut csv = String::from("domain,h,field,ratio\n");
    let mut ok = true;
    let mut series = Series { label: "max ratio".into(), points: Vec::new() };
    for h in &cfg.h {
        let grid = grid_without_bc(cfg, h)?;
        let report = baby_korn_check(&grid, cfg.fields, cfg.seed);
        for (i, r) in report.ratios.iter().enumerate() {
            csv.push_str(&format!("{},{h},{i},{r:.10e}\n", grid.describe()));
        }
        let max = report.max_ratio();
        let good = !report.ratios.is_empty() && max <= cfg.bound;
        ok &= good;
        eprintln!(
            "{} {} h={h}: max ratio {max:.6} over {} fields (bound {}, {} skipped)",
            if good { "PASS" } else { "FAIL" },
            grid.describe(),
            report.ratios.len(),
            cfg.bound,
            report.skipped
        );
        series.points.push((Field::to_f64(h), max));
    }
    if cfg.format.csv() {
        emit(cfg, "babykorn.csv", &csv, true)?;
    }
    if cfg.format.svg() {
        emit(cfg, "babykorn.svg", &loglog("‖Du‖² / ‖dev sym Du‖²", "h", "ratio", &[series]), false)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// The baby Korn fields vanish at every boundary node, so no mask is needed.
fn grid_without_bc(cfg: &RunConfig, h: &Rational) -> Result<Grid, ConfigError> {
    Grid::build(&cfg.domain.boxes(), h, &GammaSpec::None).map_err(|e| ConfigError(e.to_string()))
}

pub fn default_variants_for(command: &str) -> &'static str {
    match command {
        "kernels" => "dS_C,S_dC,dS_dC,S_C",
        _ => Variant::DsDc.tag(),
    }
}
