use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pdarray(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdarray"))
        .args(args)
        .env("PDARRAY_OUT_DIR", out_dir)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sweep_writes_to_env_dir_with_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = pdarray(&["sweep", "--sweep", "beta-scaled", "--G-max", "3", "--rho0", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("beta-scaled.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("g,m,beam,rho0,rho,beta_sq,beta_min_sq,meets_reference"));
    assert_eq!(lines.count(), 3 * 4);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("fig.conf");
    let out = dir.path().join("nested/out.csv");
    fs::write(
        &conf,
        format!("# fixed radius\nsweep = beta-fixed\nG-max = 2\nrho = 0.5, 1\nbeams = uniform\nout = {}\n", out.display()),
    )
    .unwrap();
    let o = pdarray(&["sweep", "--config", conf.to_str().unwrap(), "--rho", "0.25"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(
        text,
        "g,m,beam,rho,beta_sq,beta_min_sq,meets_reference\n\
         0,1,uniform,0.25,1,1,true\n\
         1,7,uniform,0.25,0.14285714285714285,0.06534108843878374,true\n\
         2,19,uniform,0.25,0.05263157894736842,0.0522390750677116,true\n"
    );
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pdarray(&["sweep", "--nope"], dir.path()).status.code(), Some(1));
    assert_eq!(pdarray(&["sweep", "--sweep", "fig9"], dir.path()).status.code(), Some(1));
    assert_eq!(pdarray(&["sweep", "--sweep", "beta-fixed", "--rho", "0"], dir.path()).status.code(), Some(1));
    assert_eq!(pdarray(&["layout", "--m", "8", "--rho", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(pdarray(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn underflow_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = pdarray(
        &["sweep", "--sweep", "beta-fixed", "--rho", "1e-90", "--beams", "lg10", "--G-max", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("raise rho"));
    assert!(!dir.path().join("beta-fixed.csv").exists());
}

#[test]
fn plot_rejects_empty_csv_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    fs::write(&csv, "m,xi,gamma_star_db,gamma_star,beta_min_sq,floor\n").unwrap();
    let o = pdarray(&["plot", csv.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("empty.svg").exists());
}

#[test]
fn plot_renders_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pdarray(&["sweep", "--sweep", "betamin", "--m-max", "100"], dir.path()).status.success());
    let csv = dir.path().join("betamin.csv");
    let svg = dir.path().join("fig.svg");
    let o = pdarray(&["plot", csv.to_str().unwrap(), "--out", svg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("<polyline").count(), 6);
}

#[test]
fn verify_subset_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = pdarray(&["verify", "--checks", "oracle,identity,anchors"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = fs::read_to_string(dir.path().join("verify_report.csv")).unwrap();
    assert!(report.starts_with("group,check,observed,expected,status\n"));
    assert_eq!(report.lines().count(), 1 + 9);
    assert!(!report.contains(",fail"));
}

#[test]
fn verify_catches_misplaced_corner_pds() {
    let dir = tempfile::tempdir().unwrap();
    let o = pdarray(&["verify", "--checks", "oracle", "--inject-corner-fault", "1.01"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let line = stdout.lines().find(|l| l.contains("capture-vs-quadrature")).unwrap();
    assert!(line.starts_with("FAIL"), "{line}");
}

/// A quadrature tolerance below the rounding floor cannot be met; the run
/// reports it as a failed check rather than returning a meaningless number.
#[test]
fn verify_with_sub_roundoff_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = pdarray(&["verify", "--checks", "oracle", "--quad-tol", "1e-14"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("roundoff floor"));
}
