use super::*;
use crate::fem::Point;

fn fd_div(q: &dyn Fn(Point) -> Point, x: Point, h: f64) -> f64 {
    // Fourth-order central differences.
    let d = |i: usize| {
        let at = |t: f64| {
            let mut y = x;
            y[i] += t;
            q(y)[i]
        };
        (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
    };
    d(0) + d(1)
}

fn fd_grad(u: &dyn Fn(Point) -> f64, x: Point, h: f64) -> Point {
    let d = |i: usize| {
        let at = |t: f64| {
            let mut y = x;
            y[i] += t;
            u(y)
        };
        (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
    };
    [d(0), d(1)]
}

#[test]
fn registry_problems_are_consistent() {
    let samples = [[0.13, 0.71], [0.5, 0.5], [0.82, 0.27], [0.33, 0.9]];
    for id in ["sine", "bubble", "poly_linear"] {
        for alpha in [1.0, 2.0] {
            let p = problem(id, alpha, None).unwrap();
            let ex = p.exact.clone().unwrap();
            for x in samples {
                let div = fd_div(&*ex.q, x, 1e-3);
                assert!((div - (p.source)(x)).abs() < 1e-10, "{id}: {div} vs {}", (p.source)(x));
                let g = fd_grad(&*ex.u, x, 1e-3);
                let q = (ex.q)(x);
                assert!((alpha * q[0] + g[0]).abs() < 1e-10 && (alpha * q[1] + g[1]).abs() < 1e-10);
            }
            for t in [0.0, 0.3, 0.77, 1.0] {
                for x in [[t, 0.0], [t, 1.0], [0.0, t], [1.0, t]] {
                    assert!((ex.u)(x).abs() < 1e-15);
                }
            }
        }
    }
    assert!(problem("laminate_eps", 1.0, Some(0.125)).unwrap().exact.is_none());
    assert!(matches!(problem("nope", 1.0, None), Err(crate::Error::Config(_))));
}

#[test]
fn rate_examples() {
    let r = estimate_rates(&[1e-1, 2.5e-2], &[0.2, 0.1]).unwrap();
    assert!((r[0].value().unwrap() - 2.0).abs() < 1e-12);
    let r = estimate_rates(&[3e-2, 3e-2, 3e-2], &[0.4, 0.2, 0.1]).unwrap();
    assert!(r.iter().all(|x| x.value().unwrap().abs() < 1e-12));
    let r = estimate_rates(&[8e-3, 1e-3], &[0.2, 0.1]).unwrap();
    assert!((r[0].value().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(estimate_rates(&[1e-3, 0.0], &[0.2, 0.1]).unwrap(), vec![Rate::Exact]);
    assert_eq!(Rate::Exact.to_string(), "exact");
    assert!(estimate_rates(&[1e-3], &[0.2]).is_err());
    assert!(estimate_rates(&[1e-3, 1e-4], &[0.2]).is_err());
    assert!(estimate_rates(&[1e-3, 1e-4], &[0.2, 0.2]).is_err());
}

const CASE: &str = r#"
[mesh]
n_sub = 2
n_seg = [1, 2]
n_fine = [4, 8]

[discretization]
k = 1
l = 1
tau_policy = "uniform"
tau = "H^-1"

[problem]
id = "sine"
"#;

#[test]
fn config_parsing() {
    let cfg = StudyConfig::parse(CASE).unwrap();
    assert_eq!(cfg.n_levels(), 2);
    assert_eq!(cfg.levels()[1], LevelParams { n_sub: 2, n_seg: 2, n_fine: 8 });
    assert_eq!(cfg.discretization.tau.resolve(0.25), 4.0);
    assert_eq!(cfg.output.csv, "convergence.csv");
    assert_eq!(cfg.discretization.coarse_space, CoarseSpaceKind::Polynomial);

    let err = StudyConfig::parse(&CASE.replace("k = 1", "k = 1\nkk = 2")).unwrap_err().to_string();
    assert!(err.contains("kk") && err.contains("line"), "{err}");
    let err = StudyConfig::parse(&CASE.replace("n_fine = [4, 8]", "n_fine = [4, 8, 16]")).unwrap_err().to_string();
    assert!(err.contains("mesh.n_seg"), "{err}");
    let err = StudyConfig::parse(&CASE.replace("\"H^-1\"", "\"H^-2\"")).unwrap_err().to_string();
    assert!(err.contains("tau"), "{err}");
    assert!(StudyConfig::parse(&CASE.replace("\"H^-1\"", "-1.0")).is_err());
    assert!(StudyConfig::parse(&CASE.replace("\"sine\"", "\"cosine\"")).is_err());
    assert!(StudyConfig::load(std::path::Path::new("/nonexistent/case.cfg")).is_err());
}

fn single_level(body: &str) -> StudyConfig {
    StudyConfig::parse(body).unwrap()
}

#[test]
fn exact_polynomial_is_reproduced() {
    let cfg = single_level(
        r#"
[mesh]
n_sub = 2
n_seg = [1, 2]
n_fine = [2, 4]
[discretization]
k = 4
l = 2
tau = 1.0
[problem]
id = "bubble"
alpha = 2.0
"#,
    );
    let mut study = Study::new(cfg).unwrap();
    let result = run_convergence(&mut study).unwrap();
    assert!(result.passed());
    for row in &result.rows {
        let n = row.norms.unwrap();
        assert!(n.q_alpha <= 1e-9 && n.q_l2 <= 1e-9 && n.u_l2 <= 1e-9, "{n:?}");
    }
    assert_eq!(result.rows[1].rate_q, Some(Rate::Exact));
    let csv = result.to_csv();
    assert!(csv.starts_with(CSV_HEADER));
    assert!(csv.lines().nth(2).unwrap().ends_with("exact,exact"));
}

#[test]
fn sine_baseline() {
    let cfg = single_level(
        r#"
[mesh]
n_sub = 2
n_seg = 2
n_fine = 8
[discretization]
k = 1
l = 1
tau = 1.0
[problem]
id = "sine"
"#,
    );
    let mut study = Study::new(cfg).unwrap();
    let run = study.solve_level(0).unwrap();
    let n = run.norms.unwrap();
    // alpha = 1: the weighted and plain flux norms coincide.
    assert_eq!(n.q_alpha, n.q_l2);
    assert!(n.q_alpha > 0.0 && n.u_l2 > 0.0 && n.q_alpha.is_finite());
    let baseline = [SINE_Q, SINE_U];
    eprintln!("sine baseline: q {:.12e} u {:.12e}", n.q_alpha, n.u_l2);
    for (v, b) in [n.q_alpha, n.u_l2].into_iter().zip(baseline) {
        assert!((v - b).abs() <= 1e-10 * b, "{v} vs {b}");
    }
    assert!(run.report.diagnostics.jump_ok() && run.report.diagnostics.cons_ok());
}

const SINE_Q: f64 = 1.524324242521e-1;
const SINE_U: f64 = 5.636658140575e-3;

#[test]
fn weighted_norm_uses_alpha() {
    let mut cfg = single_level(CASE);
    cfg.problem.alpha = 4.0;
    let mut study = Study::new(cfg).unwrap();
    let n = study.solve_level(0).unwrap().norms.unwrap();
    assert!((n.q_alpha - 2.0 * n.q_l2).abs() <= 1e-12 * n.q_alpha);
}

#[test]
fn study_csv_is_deterministic() {
    let cfg = single_level(CASE);
    let a = run_convergence(&mut Study::new(cfg.clone()).unwrap()).unwrap().to_csv();
    let b = run_convergence(&mut Study::new(cfg).unwrap()).unwrap().to_csv();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 3);
}

#[test]
fn solver_failure_marks_the_row() {
    // The coarse level does not resolve the oscillation period.
    let cfg = single_level(
        r#"
[mesh]
n_sub = 1
n_seg = 1
n_fine = [8, 16]
[discretization]
k = 0
l = 0
tau = 1.0
[problem]
id = "laminate_eps"
eps = 0.25
[study]
rate_scale = "h"
reference_k = 1
"#,
    );
    let result = run_convergence(&mut Study::new(cfg).unwrap()).unwrap();
    assert!(!result.passed());
    assert!(matches!(result.rows[0].status, RowStatus::SolverFailed(_)));
    assert_eq!(result.rows[1].status, RowStatus::Ok);
    let csv = result.to_csv();
    assert!(csv.lines().nth(1).unwrap().ends_with("FAIL,FAIL"));
}

#[test]
fn invalid_mesh_aborts_the_study() {
    let cfg = single_level(&CASE.replace("[discretization]", "diagonal = \"fixed\"\n[discretization]"));
    assert!(matches!(run_convergence(&mut Study::new(cfg).unwrap()), Err(crate::Error::InvalidMesh(_))));
}

#[test]
fn reference_is_cached() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_level(
        r#"
[mesh]
n_sub = 2
n_seg = [1, 2]
n_fine = [2, 4]
[discretization]
k = 0
l = 0
tau = 1.0
[problem]
id = "unit_source"
[study]
reference_n_fine = 16
reference_k = 1
"#,
    );
    let mut s1 = Study::new(cfg.clone()).unwrap().with_cache_dir(dir.path());
    let a = run_convergence(&mut s1).unwrap();
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let mut s2 = Study::new(cfg).unwrap().with_cache_dir(dir.path());
    let b = run_convergence(&mut s2).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.rows[1].norms.unwrap().q_alpha < a.rows[0].norms.unwrap().q_alpha);
}

#[test]
fn vtk_export_has_one_triangle_per_element() {
    let mut study = Study::new(single_level(CASE)).unwrap();
    let run = study.solve_level(0).unwrap();
    let mut buf = Vec::new();
    write_solution_vtk(&run.mesh, &run.report.solution, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains(&format!("POLYGONS {} ", run.mesh.n_elements())));
    assert!(text.contains("u_h"));
}
