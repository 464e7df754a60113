use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn korn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_korn")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("korn-cli-test-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn identity_group_passes_and_reports() {
    let dir = scratch("identities");
    let report = dir.join("report.csv");
    let o = korn(&["identities", "--only", "nye,planar", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 4);
    let csv = fs::read_to_string(report).unwrap();
    assert!(csv.starts_with("group,identity,cases,failures,status\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",PASS")));
}

#[test]
fn injected_fault_is_reported_with_exit_one() {
    let o = korn(&["identities", "--only", "nye", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL [nye]"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(korn(&["kernels", "--bogus"]).status.code(), Some(2));
    assert_eq!(korn(&["constant", "--h", "-1/4"]).status.code(), Some(2));
    assert_eq!(korn(&["constant", "--domain", "torus"]).status.code(), Some(2));
    assert_eq!(korn(&["identities", "--only", "nonsense"]).status.code(), Some(2));
    assert_eq!(korn(&["kernels", "--bc", "full"]).status.code(), Some(2));
    assert_eq!(korn(&["constant", "--bc", "none"]).status.code(), Some(2));
    let o = korn(&["constant", "--config", "/nonexistent/korn.conf"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = scratch("config");
    let conf = dir.join("run.conf");
    fs::write(&conf, "# coarse run\n[grid]\ndomain = cube\nh = 1/2\nbc = full\n\n[run]\nvariant = dS_dC\nseed = 5\n").unwrap();
    let o = korn(&["constant", "--config", conf.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("variant,domain,h,bc,lambda_min,c_estimate,kernel_count,gap_ratio,iters,seed\n"));
    assert!(text.contains("dS_dC,cube,1/2,full,"));
    assert!(text.trim_end().ends_with(",5"));
    let o = korn(&["constant", "--config", conf.to_str().unwrap(), "--seed", "9", "--format", "csv"]);
    assert!(stdout(&o).trim_end().ends_with(",9"));

    fs::write(&conf, "[grid]\nshape = cube\n").unwrap();
    assert_eq!(korn(&["constant", "--config", conf.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn kernel_scan_writes_deterministic_csv_and_svg() {
    let (a, b) = (scratch("kernels-a"), scratch("kernels-b"));
    for dir in [&a, &b] {
        let o = korn(&["kernels", "--h", "1/2", "--seed", "3", "--out", dir.to_str().unwrap(), "--format", "both"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = fs::read(a.join("kernels.csv")).unwrap();
    assert_eq!(csv, fs::read(b.join("kernels.csv")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    let counts: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(counts, ["7", "4", "8", "3"]);
    let svg = fs::read_to_string(a.join("kernels.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches('<').count(), svg.matches('>').count());
}

#[test]
fn one_face_constant_over_two_levels() {
    let o = korn(&["constant", "--h", "1/2,1/4", "--gamma", "z-", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",1/2,gamma:z-,") && rows[1].contains(",1/4,gamma:z-,"));
    for r in rows {
        let lambda: f64 = r.split(',').nth(4).unwrap().parse().unwrap();
        assert!(lambda > 0.0);
        assert_eq!(r.split(',').nth(6), Some("0"));
    }
}

#[test]
fn baby_korn_bound_controls_exit_code() {
    let o = korn(&["babykorn", "--h", "1/8", "--fields", "5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("domain,h,field,ratio\n"));
    assert_eq!(korn(&["babykorn", "--h", "1/8", "--fields", "5", "--bound", "1.0"]).status.code(), Some(1));
}
