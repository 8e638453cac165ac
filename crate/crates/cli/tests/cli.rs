use std::path::Path;
use std::process::{Command, Output};

fn cylheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylheat")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Data lines of a CSV file with the metadata header stripped.
fn data_lines(text: &str) -> Vec<String> {
    text.lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}

fn column(lines: &[String], name: &str) -> Vec<String> {
    let header: Vec<&str> = lines[0].split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines[1..].iter().map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

const PEC_POINT: &str = r#"
command = "point"
observable = "hr"
materials = ["pec"]

[geometry]
radius = 1e-8
h = 1e-7

[quad]
rel_tol = 1e-4
omega_rel_tol = 1e-4
"#;

#[test]
fn point_writes_csv_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.toml", PEC_POINT);
    let out = dir.path().join("p.csv");
    let o = cylheat(&["point", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# tool: cylheat"));
    assert!(text.contains("# config_sha256: "));
    assert!(text.contains("# const_hbar: "));
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 2);
    let ratio: f64 = column(&lines, "ratio_to_vacuum")[0].parse().unwrap();
    assert!(ratio > 15.0 && ratio < 30.0, "{ratio}");
    assert_eq!(column(&lines, "error")[0], "");
    assert!(column(&lines, "hr_W")[0].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn reruns_are_identical_except_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.toml", PEC_POINT);
    let strip = |o: Output| {
        let text = String::from_utf8(o.stdout).unwrap();
        let lines = data_lines(&text);
        let keep = lines[0].split(',').count() - 1;
        assert!(lines[0].ends_with("wall_time_s"));
        lines.iter().map(|l| l.split(',').take(keep).collect::<Vec<_>>().join(",")).collect::<Vec<_>>()
    };
    let a = strip(cylheat(&["point", "--config", &cfg, "--threads", "2"]));
    let b = strip(cylheat(&["point", "--config", &cfg, "--threads", "3"]));
    assert_eq!(a, b);
}

#[test]
fn dumped_config_round_trips() {
    for cmd in ["hr-sweep", "ht-parallel", "ht-angular", "ht-perpendicular", "spectrum", "point"] {
        let dir = tempfile::tempdir().unwrap();
        let first = cylheat(&[cmd, "--dump-config", "--tol", "1e-5"]);
        assert!(first.status.success());
        let text = String::from_utf8(first.stdout).unwrap();
        let cfg = write(dir.path(), "c.toml", &text);
        let second = cylheat(&[cmd, "--config", &cfg, "--dump-config"]);
        assert!(second.status.success(), "{}", String::from_utf8_lossy(&second.stderr));
        assert_eq!(String::from_utf8(second.stdout).unwrap(), text, "{cmd}");
    }
}

#[test]
fn config_errors_exit_with_one_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let bad = write(
        dir.path(),
        "bad.toml",
        "command = \"hr-sweep\"\nmaterials = [\"sic\"]\n[geometry]\nh = 1e-7\nradius = []\n",
    );
    let o = cylheat(&["hr-sweep", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let o = cylheat(&["ht-parallel", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hr-sweep"));
    let o = cylheat(&["point", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_points_keep_the_sweep_going() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.toml",
        r#"
command = "ht-angular"
materials = ["pec"]

[geometry]
radius = 1e-8
h = 1e-7
dz = [0.0, 1e-6]
dphi = [0.0, 3.14159]

[quad]
rel_tol = 1e-4
omega_rel_tol = 1e-4
"#,
    );
    let o = cylheat(&["ht-angular", "--config", &cfg, "--format", "json"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["metadata"]["command"], "ht-angular");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[0]["error"].is_string() && rows[1]["error"].is_string());
    assert!(rows[2]["error"].is_null() && rows[3]["error"].is_null());
    assert_eq!(rows[2]["ratio_to_zero_angle"], 1.0);
    assert!(rows[3]["ratio_to_zero_angle"].as_f64().unwrap() > 0.0);
}

#[test]
fn single_frequency_vacuum_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        r#"
command = "spectrum"
materials = ["vacuum"]

[geometry]
radius = 1e-7
h = 1e-7

[spectrum]
quantity = "tr_im_g"
omega = { min = 1.5e14, max = 1.5e14, points = 1 }
"#,
    );
    let o = cylheat(&["spectrum", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = data_lines(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(lines.len(), 2);
    let v: f64 = column(&lines, "tr_im_g_per_m")[0].parse().unwrap();
    let k = 1.5e14 / 299_792_458.0;
    assert!((v / (k / (2.0 * std::f64::consts::PI)) - 1.0).abs() < 1e-14);
    assert_eq!(column(&lines, "ratio_to_vacuum")[0], "1e0");
}
