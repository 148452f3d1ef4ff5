use std::fs;
use std::process::{Command, Output};

fn igc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// `(header, rows)` of a CSV on stdout, footer lines dropped.
fn csv(o: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = stdout(o);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn footer(o: &Output, key: &str) -> f64 {
    let prefix = format!("# {key}=");
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(|v| v.parse().unwrap()))
        .unwrap_or_else(|| panic!("no footer {key}"))
}

#[test]
fn metric_row_for_bivariate_strong() {
    let o = igc(&[
        "metric",
        "--structure",
        "bivariate-strong",
        "--rho",
        "0",
        "--sigma",
        "1",
    ]);
    assert!(o.status.success());
    let (h, rows) = csv(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][column(&h, "g11")], "2");
    assert_eq!(rows[0][column(&h, "g22")], "4");
}

#[test]
fn mono3_curvature_is_negative() {
    let o = igc(&["metric", "--structure", "mono3"]);
    assert!(o.status.success());
    let (h, rows) = csv(&o);
    let k: f64 = rows[0][column(&h, "K")].parse().unwrap();
    assert!(k < 0.0);
}

#[test]
fn malformed_structure_is_a_usage_error() {
    let o = igc(&["metric", "--structure", "pentavariate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn inadmissible_rho_exits_2() {
    let o = igc(&["metric", "--structure", "trivariate-mildly-weak", "--rho", "0.71"]);
    assert_eq!(o.status.code(), Some(2));
    let o = igc(&["metric", "--structure", "bivariate-strong", "--rho", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mono3_geodesic_defaults() {
    let o = igc(&["geodesic"]);
    assert!(o.status.success());
    let (h, rows) = csv(&o);
    assert_eq!(
        h,
        [
            "tau",
            "mu_numeric",
            "sigma_numeric",
            "mu_closed",
            "sigma_closed",
            "speed",
            "conserved_momentum"
        ]
    );
    assert_eq!(rows.len(), 10_001);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows.last().unwrap()[0], "10");
    assert!(footer(&o, "max_deviation") <= 1e-6);
    assert!(footer(&o, "max_residual") <= 1e-5);
}

#[test]
fn near_boundary_bivariate_geodesic_completes() {
    let o = igc(&[
        "geodesic",
        "--structure",
        "bivariate-strong",
        "--rho",
        "0.99",
        "--stride",
        "100",
    ]);
    assert!(o.status.success());
}

#[test]
fn geodesic_reaching_the_boundary_exits_3() {
    let o = igc(&[
        "geodesic",
        "--structure",
        "bivariate-strong",
        "--rho",
        "0.9",
        "--a1",
        "5",
        "--tau",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn figure1_rows() {
    let o = igc(&["figure1", "--rho", "0,0.5,-0.49,0.9"]);
    assert!(o.status.success());
    let (h, rows) = csv(&o);
    let val = |r: usize, c: &str| rows[r][column(&h, c)].parse::<f64>().unwrap();
    for c in &h[1..] {
        assert_eq!(val(0, c), 1.0, "{c}");
    }
    let root = 1.5f64.sqrt();
    assert!((val(1, "R_trivariate_mildly_weak") - root).abs() < 1e-12);
    assert!((val(1, "R_bivariate_strong") - root).abs() < 1e-12);
    assert!((val(1, "R_trivariate_mildly_weak_fit") - root).abs() < 1e-6);
    assert!((val(2, "R_trivariate_strong") - 0.02f64.sqrt()).abs() < 1e-12);
    // 0.9 lies outside the mildly weak interval
    assert_eq!(rows[3][column(&h, "R_trivariate_mildly_weak")], "");
    assert_eq!(rows[3][column(&h, "R_trivariate_mildly_weak_fit")], "");
}

#[test]
fn figure1_default_grid() {
    let o = igc(&["figure1"]);
    assert!(o.status.success());
    let (_, rows) = csv(&o);
    assert_eq!(rows.len(), 401);
    assert_eq!(rows[0][0], "-0.999");
    assert_eq!(rows[400][0], "0.999");
}

#[test]
fn rectangle_mode_fails_the_plateau_with_exit_4() {
    let o = igc(&["igc", "--structure", "mono3", "--mode", "rectangle"]);
    assert_eq!(o.status.code(), Some(4));
    let (h, rows) = csv(&o);
    assert_eq!(rows[0][column(&h, "plateau_passed")], "false");
}

#[test]
fn report_peak_and_round_trip() {
    let o = igc(&["report", "--structure", "trivariate-mildly-weak"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let peak = &v["structures"][0]["ratio_curve"]["peak"];
    assert!((peak["rho"].as_f64().unwrap() - 0.5).abs() <= 1e-6);
    assert!((peak["value"].as_f64().unwrap() - 1.5f64.sqrt()).abs() <= 1e-6);
    let again: serde_json::Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
}

#[test]
fn mono1_report_is_linear() {
    let o = igc(&["report", "--structure", "mono1", "--a1", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let growth = &v["structures"][0]["complexity"][0]["growth"];
    assert_eq!(growth["law"], "linear");
    assert!((growth["slope"].as_f64().unwrap() - 1.5).abs() < 1e-9);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = igc(&["figure1", "--rho-count", "41", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let r1 = igc(&["report", "--structure", "trivariate-strong", "--rho-count", "21"]);
    let r2 = igc(&["report", "--structure", "trivariate-strong", "--rho-count", "21"]);
    assert_eq!(r1.stdout, r2.stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sweep\nstructure = bivariate-strong\nrho = 0.5\nsigma = 2\n").unwrap();
    let o = igc(&["metric", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let (h, rows) = csv(&o);
    assert_eq!(rows[0][column(&h, "rho")], "0.5");
    assert_eq!(rows[0][column(&h, "sigma")], "2");
    let o = igc(&["metric", "--config", cfg.to_str().unwrap(), "--rho", "0"]);
    let (h, rows) = csv(&o);
    assert_eq!(rows[0][column(&h, "rho")], "0");
    assert_eq!(rows[0][column(&h, "g11")], "0.5");

    fs::write(&cfg, "colour = blue\n").unwrap();
    let o = igc(&["metric", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_tables() {
    let o = igc(&[
        "igc",
        "--structure",
        "bivariate-strong",
        "--rho",
        "0",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = v["rows"][0]["coefficient"].as_f64().unwrap();
    assert!((c / (4.0 * 2f64.sqrt()) - 1.0).abs() < 1e-8);
    assert_eq!(v["rows"][0]["plateau_passed"], true);
}
