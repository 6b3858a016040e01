use std::fs;
use std::process::{Command, Output};

fn curlkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curlkit")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn cfl_of_second_order_dg() {
    let o = curlkit(&["cfl", "--scheme", "dg", "--n", "1", "--rk", "ssprk2"]);
    assert!(o.status.success());
    let nu: f64 = stdout(&o).trim().parse().unwrap();
    assert!((nu - 0.3162).abs() <= 0.002, "{nu}");
}

#[test]
fn cfl_reports_unstable_pairings() {
    let o = curlkit(&["cfl", "--n", "1", "--rk", "rk1", "--angles", "9"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("unstable"));
}

#[test]
fn matrix_with_oracle() {
    let o = curlkit(&["matrix", "--p", "1", "--kx", "0.4", "--ky", "0", "--vx", "0.8", "--vy", "0.3", "--dt", "0.1", "--oracle"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("dimension=3"));
    assert!(out.contains("spectral_radius="));
    let diff: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("max_eigenvalue_difference="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff < 1e-10, "{diff}");
    // undefined closed form at k = 0
    assert_eq!(curlkit(&["matrix", "--p", "1", "--oracle"]).status.code(), Some(1));
    // only the second-order DG scheme has a closed form
    assert_eq!(curlkit(&["matrix", "--p", "2", "--kx", "1", "--oracle"]).status.code(), Some(1));
}

#[test]
fn run_smoke_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = curlkit(&[
        "run", "--problem", "planewave", "--scheme", "dg", "--n", "0", "--res", "8", "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    for key in ["l1=", "linf=", "energy_fraction=", "max_relative_curl="] {
        let v: f64 = summary.lines().find_map(|l| l.strip_prefix(key)).unwrap().parse().unwrap();
        assert!(v.is_finite());
    }
    let curl = fs::read_to_string(out.join("curl.csv")).unwrap();
    assert!(curl.starts_with("time,max_pointwise_curl,max_circulation,max_field\n"));
    assert_eq!(curl.lines().count(), 101);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = curlkit(&["dispersion", "--n", "2", "--angle", "30", "--wavelength", "5,10", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
        fs::read(p).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("angle_deg,one_minus_amp,phase_err,wavelength,v_angle_deg\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 361);
}

#[test]
fn convergence_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("conv.csv");
    let o = curlkit(&["convergence", "--n", "1", "--res", "8,16", "--snapshots", "0", "--out", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "res,l1,l1_order,linf,linf_order,energy_fraction");
    assert_eq!(lines.len(), 3);
    let order: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
    assert!(order > 1.0, "{order}");
}

#[test]
fn stability_map_csv() {
    let o = curlkit(&["stability-map", "--n", "0", "--rk", "rk1", "--points", "3", "--k-points", "9", "--angles", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("cx,cy,spectral_radius\n"));
    assert_eq!(text.lines().count(), 10);
    // the origin is neutral
    assert!(text.lines().any(|l| l.starts_with("0,0,1.0")));
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, "# second-order DG\nscheme=dg\nn=1\nrk=ssprk2\nk_points=33\nangles=9\n").unwrap();
    let o = curlkit(&["cfl", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let nu: f64 = stdout(&o).trim().parse().unwrap();
    assert!((nu - 0.3162).abs() < 0.002);
    // flags beat the file
    let o = curlkit(&["--config", cfg.to_str().unwrap(), "cfl", "--n", "0", "--rk", "rk1"]);
    let nu: f64 = stdout(&o).trim().parse().unwrap();
    assert!((nu - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.002);
    fs::write(&cfg, "no-such-flag=3\n").unwrap();
    assert_eq!(curlkit(&["cfl", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let o = curlkit(&["run", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(curlkit(&["run", "--n", "5"]).status.code(), Some(1));
    assert_eq!(curlkit(&["cfl", "--scheme", "p0pm", "--n", "1"]).status.code(), Some(1));
    // the family fixes N
    assert!(curlkit(&["cfl", "--scheme", "p0pm", "--m", "1", "--angles", "3", "--k-points", "9"]).status.success());
    // far above the stability limit: numerical failure
    let o = curlkit(&["run", "--n", "1", "--res", "8", "--cfl", "5", "--fraction", "1", "--tf", "200", "--snapshots", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(curlkit(&["--help"]).status.success());
}

#[test]
fn thread_count_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_curlkit"))
        .args(["cfl", "--n", "0", "--rk", "rk1", "--angles", "3", "--k-points", "9"])
        .env("CURLKIT_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_curlkit"))
        .args(["cfl"])
        .env("CURLKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
