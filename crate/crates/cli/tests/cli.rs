use std::path::Path;
use std::process::{Command, Output};

const ERGODIC: &str = r#"
format_version = 1
name = "rayleigh_peak"
objective = "ergodic"
constraint = "F1"
n0 = 1.0
q_pk_db = -5.0
g0 = "rayleigh"
g1 = "rayleigh"
sweep = "p_pk"
sweep_from = -20.0
sweep_to = 15.0
sweep_step = 1.0
sweep_scale = "db"
samples = 2000
seed = 3
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specshare"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], scenario: &Path) -> Output {
    bin().args(args).arg(scenario).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn ergodic_sweep_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.toml", ERGODIC);
    let o = run(&["ergodic"], &s);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), specshare_cli::run::CSV_HEADER);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 36);
}

#[test]
fn quadrature_sweep_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.toml", ERGODIC);
    let o = run(&["--method", "quadrature", "ergodic"], &s);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let values: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(
        values.windows(2).all(|w| w[1] >= w[0] - 1e-12),
        "capacity must not drop as P_pk grows"
    );
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.toml", ERGODIC);
    let a = run(&["ergodic"], &s).stdout;
    let b = run(&["ergodic"], &s).stdout;
    assert_eq!(a, b);
    let c = run(&["--seed", "4", "ergodic"], &s).stdout;
    assert_ne!(a, c);
}

#[test]
fn missing_seed_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = ERGODIC.replace("seed = 3\n", "");
    let s = write(dir.path(), "s.toml", &text);
    let o = run(&["ergodic"], &s);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
    let o = run(&["--seed", "9", "ergodic"], &s);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn db_and_linear_together_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = ERGODIC.replace("q_pk_db = -5.0", "q_pk_db = -5.0\nq_pk = 0.3");
    let o = run(&["ergodic"], &write(dir.path(), "s.toml", &text));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("q_pk"), "{}", stderr(&o));
}

#[test]
fn unknown_field_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{ERGODIC}bogus = 1\n");
    let o = run(&["ergodic"], &write(dir.path(), "s.toml", &text));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn objective_must_match_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["outage"], &write(dir.path(), "s.toml", ERGODIC));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_is_io_error() {
    let o = run(&["ergodic"], Path::new("/nonexistent/scenario.toml"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn delay_limited_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "dl.toml",
        r#"
format_version = 1
name = "dl"
objective = "delay_limited"
constraint = "F4"
n0 = 1.0
p_av = 10.0
g0 = "nakagami"
g0_m = 2.0
g1 = "nakagami"
g1_m = 2.0
sweep = "q_av"
sweep_from = 4.0
sweep_to = 4.0
sweep_step = 1.0
sweep_scale = "linear"
seed = 1
"#,
    );
    let out = dir.path().join("out");
    let o = bin()
        .arg("delay-limited")
        .arg(&s)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("dl.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((v - 3f64.log2()).abs() < 1e-12, "{row}");
    let manifest = std::fs::read_to_string(out.join("dl.manifest.toml")).unwrap();
    assert!(manifest.contains("format_version = 1"));
}

#[test]
fn outage_closed_form_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "o.toml",
        r#"
format_version = 1
name = "anchor"
objective = "outage"
constraint = "F1"
r0 = 1.0
n0 = 1.0
p_pk = inf
g0 = "rayleigh"
g1 = "rayleigh"
sweep = "q_pk"
sweep_from = 1.0
sweep_to = 1.0
sweep_step = 1.0
sweep_scale = "linear"
closed_form = true
seed = 1
"#,
    );
    let o = run(&["outage"], &s);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        text.lines().nth(1).unwrap().split(',').nth(2).unwrap(),
        "0.5"
    );
}

#[test]
fn figure_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["figure", "fig5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(dir.path().join("fig5/manifest.toml")).unwrap();
    for series in ["rayleigh", "nakagami2", "lognormal1"] {
        assert!(manifest.contains(&format!("{series}.csv")));
        assert!(dir.path().join(format!("fig5/{series}.csv")).exists());
    }
}

#[test]
fn verify_passes() {
    let o = bin().arg("verify").output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
