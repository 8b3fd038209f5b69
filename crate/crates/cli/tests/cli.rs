use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[mesh]
n_sub = 2
n_seg = [1, 2]
n_fine = [2, 4]

[discretization]
k = 1
l = 1
tau = 1.0

[problem]
id = "sine"

[study]
rate_scale = "H"
"#;

const LAMINATE: &str = r#"
[mesh]
n_sub = 2
n_seg = 1
n_fine = 8

[discretization]
k = 1
l = 1
tau = 1.0
n_cell = 32

[problem]
id = "laminate_eps"
eps = 0.25
"#;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mshdg"))
        .args(args)
        .current_dir(dir)
        .env("MSHDG_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn convergence_writes_csv_and_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let out = tmp.path().join("out");
    let o = run(&["--quiet", "convergence", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "level,L,H,h,tau,dim_coarse,err_q_alpha,err_q_l2,err_u_l2,jump_max,cons_max,rate_q,rate_u"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,"));
    assert!(!csv.contains("FAIL"));
}

#[test]
fn convergence_output_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let mut tables = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let o = run(&["--quiet", "convergence", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
        assert_eq!(code(&o), 0);
        tables.push(fs::read(out.join("convergence.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn missing_config_exits_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["convergence", "--config", "does_not_exist.toml"], tmp.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn malformed_config_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", &SMALL.replace("k = 1", "k = \"one\""));
    let o = run(&["convergence", "--config", &cfg], tmp.path());
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 8") && err.contains("k = \"one\""), "{err}");

    let cfg = write_config(tmp.path(), "unknown.toml", &format!("{SMALL}\n[extra]\nx = 1\n"));
    let o = run(&["convergence", "--config", &cfg], tmp.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn solver_failure_exits_with_code_two() {
    // Cell side 1/16 exceeds eps / 2 = 0.05.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "under.toml", &LAMINATE.replace("eps = 0.25", "eps = 0.1").replace("n_seg = 1", "n_seg = [1, 2]"));
    let out = tmp.path().join("out");
    let o = run(&["--quiet", "convergence", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains("FAIL"));
}

#[test]
fn cell_prints_laminate_means() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "lam.toml", LAMINATE);
    let out = tmp.path().join("out");
    let o = run(&["cell", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("alpha0 = [[1.600000, 0.000000], [0.000000, 2.500000]]"), "{stdout}");
    assert!(out.join("chi.csv").exists());
}

#[test]
fn validate_mesh_reports_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ok.toml", SMALL);
    let o = run(&["validate-mesh", "--config", &cfg], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 violations"));

    let fixed = SMALL.replace("n_fine = [2, 4]", "n_fine = [2, 4]\ndiagonal = \"fixed\"");
    let cfg = write_config(tmp.path(), "fixed.toml", &fixed);
    let o = run(&["validate-mesh", "--config", &cfg], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("multiple skeleton faces"));
}

#[test]
fn solve_writes_solution_errors_and_vtk() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let out = tmp.path().join("out");
    let o = run(
        &["solve", "--config", &cfg, "--out", out.to_str().unwrap(), "--level", "1", "--vtk"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sol: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    assert_eq!(sol["k"], 1);
    assert_eq!(sol["subdomains"].as_array().unwrap().len(), 4);
    let err: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("errors.json")).unwrap()).unwrap();
    assert!(err.to_string().contains("u_l2"));
    assert!(fs::read_to_string(out.join("solution.vtk")).unwrap().starts_with("# vtk DataFile"));

    let o = run(&["solve", "--config", &cfg, "--out", out.to_str().unwrap(), "--level", "5"], tmp.path());
    assert_eq!(code(&o), 1);
}
