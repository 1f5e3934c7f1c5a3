use std::path::Path;
use std::process::{Command, Output};

fn mbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbp"))
        .args(args)
        .output()
        .expect("spawn mbp")
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("mbp-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_both_csv_files() {
    let dir = tmp("run");
    let out = dir.join("out");
    let o = mbp(&[
        "run",
        "--nx",
        "20",
        "--nt",
        "10",
        "--scheme",
        "sav",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let steps = std::fs::read_to_string(out.join("steps.csv")).unwrap();
    assert!(steps.contains("# scheme=sav"));
    assert!(steps.contains("n,t,max_abs_u,rho,energy,sav_energy,z"));
    let data = steps.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data, 1 + 11);
    let fin = std::fs::read_to_string(out.join("final.csv")).unwrap();
    assert_eq!(fin.lines().filter(|l| !l.starts_with('#')).count(), 1 + 21);
}

#[test]
fn flags_override_config_file() {
    let dir = tmp("cfg");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# coarse\nnx = 10\nnt = 5\ntableau = gl2\n").unwrap();
    let out = dir.join("out");
    let o = mbp(&[
        "run",
        "--config",
        s(&cfg),
        "--tableau",
        "gl3",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let steps = std::fs::read_to_string(out.join("steps.csv")).unwrap();
    assert!(steps.contains("# tableau=gl3"));
    assert!(steps.contains("# nx=10"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tmp("bad");
    let out = dir.join("out");
    for args in [
        vec!["run", "--scheme", "euler", "--out", s(&out)],
        vec!["run", "--tableau", "gl9", "--out", s(&out)],
        vec!["run", "--nx", "0", "--out", s(&out)],
        vec!["run", "--scheme", "sav", "--r", "2", "--out", s(&out)],
        vec!["run", "--nx", "10"],
        vec!["sweep", "--T", "0.01"],
        vec!["sweep", "--axis", "depth", "--ref", "nowhere.csv"],
    ] {
        let o = mbp(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let cfg = dir.join("broken.cfg");
    std::fs::write(&cfg, "nx = 10\nnx = 20\n").unwrap();
    let o = mbp(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn missing_reference_names_the_generator() {
    let o = mbp(&["sweep", "--ref", "/nonexistent/ref.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("make-reference"));
}

#[test]
fn divergent_startup_is_a_numerical_failure() {
    let dir = tmp("diverge");
    let out = dir.join("out");
    let o = mbp(&[
        "run",
        "--nx",
        "20",
        "--nt",
        "1",
        "--T",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("smaller time step"));
}

#[test]
fn reference_then_sweep() {
    let dir = tmp("sweep");
    let reference = dir.join("ref.csv");
    let again = dir.join("ref2.csv");
    let base = ["--r", "1", "--nx", "80", "--nt", "40", "--T", "0.01"];
    for path in [&reference, &again] {
        let mut args = vec!["make-reference"];
        args.extend(base);
        args.extend(["--out", s(path)]);
        let o = mbp(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(
        std::fs::read(&reference).unwrap(),
        std::fs::read(&again).unwrap()
    );

    let table = dir.join("space.csv");
    let o = mbp(&[
        "sweep",
        "--axis",
        "space",
        "--levels",
        "5,10,20",
        "--nt",
        "40",
        "--T",
        "0.01",
        "--tableau",
        "gl3",
        "--ref",
        s(&reference),
        "--out",
        s(&table),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&table).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);

    let o = mbp(&["sweep", "--T", "0.05", "--ref", s(&reference)]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "mismatched horizon must be rejected"
    );
}

#[test]
fn selfcheck_reports_and_detects_perturbation() {
    let o = mbp(&["selfcheck", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")));

    let o = mbp(&["selfcheck", "--perturb-tableau"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL order-conditions"));
}
