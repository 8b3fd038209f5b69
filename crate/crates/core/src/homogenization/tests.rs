use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn laminate(y: Point) -> f64 {
    if y[0] < 0.5 {
        1.0
    } else {
        4.0
    }
}

/// Closed-form zero-mean 1D corrector of the {1, 4} laminate.
fn laminate_chi(y1: f64) -> f64 {
    let y1 = y1 - y1.floor();
    if y1 <= 0.5 {
        0.6 * y1 - 0.15
    } else {
        0.3 - 0.6 * (y1 - 0.5) - 0.15
    }
}

fn smooth(y: Point) -> f64 {
    2.0 + (2.0 * PI * y[0]).sin() * (2.0 * PI * y[1]).cos() + 0.5 * (2.0 * PI * y[1]).sin()
}

#[test]
fn constant_coefficient() {
    for c in [0.3, 1.0, 7.0] {
        let cell = solve_cell_problems(|_| c, 8).unwrap();
        assert!(cell.chi.iter().flatten().all(|v| v.abs() <= 1e-10));
        let a = homogenized_tensor(&cell);
        assert!((a[0][0] - c).abs() <= 1e-10 && (a[1][1] - c).abs() <= 1e-10);
        assert!(a[0][1].abs() <= 1e-10);
    }
}

#[test]
fn laminate_means_and_profile() {
    let cell = solve_cell_problems(laminate, 64).unwrap();
    let a = cell.alpha0;
    assert!((a[0][0] - 1.6).abs() <= 0.016);
    assert!((a[1][1] - 2.5).abs() <= 0.025);
    assert!(a[0][1].abs() <= 1e-10);
    assert!((cell.harmonic_mean - 1.6).abs() < 1e-12);
    assert!((cell.arithmetic_mean - 2.5).abs() < 1e-12);
    for y in [[0.1, 0.3], [0.37, 0.9], [0.5, 0.5], [0.81, 0.05]] {
        assert!((cell.chi(0, y) - laminate_chi(y[0])).abs() < 1e-9, "{y:?}");
        assert!(cell.chi(1, y).abs() < 1e-10);
    }
}

#[test]
fn zero_mean_periodic_and_small_residual() {
    let cell = solve_cell_problems(smooth, 32).unwrap();
    for k in 0..2 {
        assert!(cell.mean(k).abs() <= 1e-10);
        for y in [[0.13, 0.27], [0.5, 0.91]] {
            let shifted = [y[0] + 1.0, y[1] - 2.0];
            assert!((cell.chi(k, y) - cell.chi(k, shifted)).abs() < 1e-14);
        }
    }
    assert!(cell.residual <= 1e-10);
    assert!(cell.asymmetry <= 1e-8);
}

#[test]
fn self_convergence_is_second_order() {
    let c16 = solve_cell_problems(smooth, 16).unwrap();
    let c32 = solve_cell_problems(smooth, 32).unwrap();
    let c64 = solve_cell_problems(smooth, 64).unwrap();
    for k in 0..2 {
        let d1 = c16.l2_distance(&c32, k);
        let d2 = c32.l2_distance(&c64, k);
        assert!(d1 / d2 > 3.0, "k = {k}: {d1} / {d2}");
    }
}

#[test]
fn scaling_by_a_constant() {
    let base = solve_cell_problems(smooth, 16).unwrap();
    let scaled = solve_cell_problems(|y| 3.0 * smooth(y), 16).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((scaled.alpha0[i][j] - 3.0 * base.alpha0[i][j]).abs() <= 1e-12 * base.alpha0[0][0]);
        }
        for (a, b) in base.chi[i].iter().zip(&scaled.chi[i]) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn voigt_reuss_bracket() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-0.45..0.45));
        let a = move |y: Point| {
            (c[0] * (2.0 * PI * y[0]).sin() + c[1] * (2.0 * PI * y[1]).cos() + c[2] * (2.0 * PI * (y[0] + y[1])).sin()
                + c[3] * (4.0 * PI * y[0]).cos())
            .exp()
        };
        let cell = solve_cell_problems(a, 16).unwrap();
        let [lo, hi] = cell.eigenvalues();
        assert!(lo >= cell.harmonic_mean * (1.0 - 1e-10), "{lo} < {}", cell.harmonic_mean);
        assert!(hi <= cell.arithmetic_mean * (1.0 + 1e-10));
    }
}

#[test]
fn rejects_small_or_bad_input() {
    assert!(solve_cell_problems(|_| 1.0, 3).is_err());
    assert!(solve_cell_problems(|y| y[0] - 0.5, 8).is_err());
}

#[test]
fn corrector_evaluation() {
    let flat = solve_cell_problems(|_| 2.0, 8).unwrap();
    let u0 = |x: Point| (x[0] * x[1], [x[1], x[0]]);
    let ue = corrector(u0, &flat, 0.1);
    assert!((ue([0.3, 0.7]) - 0.21).abs() < 1e-12);

    let lam = solve_cell_problems(laminate, 32).unwrap();
    let eps = 0.125;
    let ue = corrector(|x: Point| (x[0], [1.0, 0.0]), &lam, eps);
    for x in [[0.3, 0.2], [0.71, 0.4]] {
        let want = x[0] + eps * lam.chi(0, [x[0] / eps, x[1] / eps]);
        assert!((ue(x) - want).abs() < 1e-15);
    }
}

#[test]
fn gradient_matches_difference_quotient() {
    let cell = solve_cell_problems(smooth, 16).unwrap();
    // Interior of a lower triangle of square (3, 5).
    let y = [3.7 / 16.0, 5.2 / 16.0];
    let d = 1e-6;
    for k in 0..2 {
        let g = cell.grad_chi(k, y);
        let gx = (cell.chi(k, [y[0] + d, y[1]]) - cell.chi(k, [y[0] - d, y[1]])) / (2.0 * d);
        let gy = (cell.chi(k, [y[0], y[1] + d]) - cell.chi(k, [y[0], y[1] - d])) / (2.0 * d);
        assert!((g[0] - gx).abs() < 1e-7 && (g[1] - gy).abs() < 1e-7);
    }
}

#[test]
fn chi_csv_shape() {
    let cell = solve_cell_problems(laminate, 4).unwrap();
    let mut buf = Vec::new();
    cell.write_chi_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 17);
    assert!(text.starts_with("i,j,y1,y2,chi1,chi2\n"));
}
