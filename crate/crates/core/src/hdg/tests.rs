use std::f64::consts::PI;

use nalgebra::DVector;
use proptest::prelude::*;

use super::element::local_system;
use super::*;
use crate::fem::basis::signed_area;
use crate::fem::quadrature::{physical_triangle_rule, segment_quadrature};
use crate::fem::{l2_project_segment, CoefficientField, Point, SegmentBasis};
use crate::mesh::{build_structured, Rect};

const REF: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

fn input<'a>(v: [Point; 3], tau: [f64; 3], alpha: &'a CoefficientField, f: Option<&'a SourceFn>) -> ElementInput<'a> {
    ElementInput {
        vertices: v,
        reversed: [false; 3],
        tau,
        alpha,
        source: f,
    }
}

/// Face-basis coefficients of the trace of `g` on every face of `inp`.
fn traces(inp: &ElementInput<'_>, k: usize, g: impl Fn(Point) -> f64) -> DVector<f64> {
    let mut out = Vec::new();
    for j in 0..3 {
        let (a, b, len, _) = inp.face_geometry(j);
        let c = l2_project_segment(
            |t| g([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]),
            len,
            &SegmentBasis::new(k),
            1,
        )
        .unwrap();
        out.extend(c.iter());
    }
    DVector::from_vec(out)
}

#[test]
fn zero_data_gives_zero() {
    let alpha = CoefficientField::Constant(3.0);
    let op = element_operator(&input(REF, [1.0, 0.0, 0.0], &alpha, None), 2).unwrap();
    let zero = DVector::zeros(op.n_trace());
    let sol = op.recover(&zero);
    assert!(sol.qx.iter().chain(&sol.qy).chain(&sol.u).all(|&x| x == 0.0));
    assert!(op.flux_functional(&zero).iter().all(|&x| x == 0.0));
}

#[test]
fn reproduces_linear_solution() {
    let alpha = CoefficientField::Constant(1.0);
    let v = [[0.2, 0.1], [0.9, 0.3], [0.4, 0.8]];
    let inp = input(v, [1.0; 3], &alpha, None);
    let op = element_operator(&inp, 1).unwrap();
    let lambda = traces(&inp, 1, |x| x[0] + 2.0 * x[1]);
    let sol = op.recover(&lambda);
    for x in [[0.4, 0.3], [0.5, 0.4], v[0], v[2]] {
        assert!((op.basis.evaluate(&sol.u, x) - (x[0] + 2.0 * x[1])).abs() < 1e-12);
        assert!((op.basis.evaluate(&sol.qx, x) + 1.0).abs() < 1e-12);
        assert!((op.basis.evaluate(&sol.qy, x) + 2.0).abs() < 1e-12);
    }
    // q . n is constant on each face, so only the constant mode sees it.
    let flux = op.flux_functional(&lambda);
    for j in 0..3 {
        let (_, _, len, n) = inp.face_geometry(j);
        let qn = -(n[0] + 2.0 * n[1]);
        assert!((flux[2 * j] - qn * len.sqrt()).abs() < 1e-12);
        assert!(flux[2 * j + 1].abs() < 1e-12);
    }
}

#[test]
fn reference_triangle_degree_zero() {
    let alpha = CoefficientField::Constant(1.0);
    let inp = input(REF, [1.0; 3], &alpha, None);
    let sys = local_system(&inp, 0).unwrap();
    let perimeter = 2.0 + 2f64.sqrt();
    let expected = nalgebra::DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, perimeter]);
    assert!((&sys.m - &expected).abs().max() < 1e-14);

    // Hand-computed condensation: S_FG = delta + 2 sqrt(|F||G|) n_F . n_G
    // - sqrt(|F||G|) / perimeter.
    let len = [2f64.sqrt(), 1.0, 1.0];
    let r2 = 0.5f64.sqrt();
    let nrm = [[r2, r2], [-1.0, 0.0], [0.0, -1.0]];
    let op = element_operator(&inp, 0).unwrap();
    for f in 0..3 {
        for g in 0..3 {
            let l = (len[f] * len[g]).sqrt();
            let dot = nrm[f][0] * nrm[g][0] + nrm[f][1] * nrm[g][1];
            let want = if f == g { 1.0 } else { 0.0 } + 2.0 * l * dot - l / perimeter;
            assert!((op.s[(f, g)] - want).abs() < 1e-13, "({f}, {g})");
        }
    }
}

#[test]
fn all_zero_tau_is_singular() {
    let alpha = CoefficientField::Constant(1.0);
    assert!(element_operator(&input(REF, [0.0; 3], &alpha, None), 1).is_err());
}

fn ccw(v: [Point; 3]) -> Option<[Point; 3]> {
    let a = signed_area(&v);
    if a.abs() < 0.02 {
        None
    } else if a > 0.0 {
        Some(v)
    } else {
        Some([v[0], v[2], v[1]])
    }
}

fn tau_pattern(policy: usize, face: usize, value: f64) -> [f64; 3] {
    match policy {
        0 => [value; 3],
        _ => {
            let mut t = [0.0; 3];
            t[face] = value;
            t
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn condensed_matrix_symmetric_psd(
        pts in prop::array::uniform6(0.0f64..1.0),
        coef in prop::array::uniform3(-1.0f64..1.0),
        a0 in 0.1f64..10.0,
        policy in 0usize..3,
        face in 0usize..3,
        tau in 0.1f64..10.0,
        k in 0usize..3,
    ) {
        let Some(v) = ccw([[pts[0], pts[1]], [pts[2], pts[3]], [pts[4], pts[5]]]) else { return Ok(()); };
        let alpha = CoefficientField::analytic(move |x| a0 * (1.0 + 0.4 * (coef[0] * x[0] + coef[1] * x[1] + coef[2] * x[0] * x[1]).tanh()));
        let op = element_operator(&input(v, tau_pattern(policy, face, tau), &alpha, None), k).unwrap();
        let scale = op.s.abs().max();
        prop_assert!((&op.s - op.s.transpose()).abs().max() <= 1e-12 * scale);
        let eig = op.s.clone().symmetric_eigen().eigenvalues;
        prop_assert!(eig.min() >= -1e-10 * scale);
    }

    #[test]
    fn flux_identity(
        pts in prop::array::uniform6(0.0f64..1.0),
        lam in prop::collection::vec(-1.0f64..1.0, 9),
        policy in 0usize..3,
        face in 0usize..3,
        k in 0usize..3,
    ) {
        let Some(v) = ccw([[pts[0], pts[1]], [pts[2], pts[3]], [pts[4], pts[5]]]) else { return Ok(()); };
        let alpha = CoefficientField::analytic(|x| 1.0 + x[0] * x[0]);
        let f = |x: Point| (3.0 * x[0]).sin() + x[1];
        let inp = ElementInput { reversed: [true, false, true], ..input(v, tau_pattern(policy, face, 2.0), &alpha, Some(&f)) };
        let op = element_operator(&inp, k).unwrap();
        let nf = k + 1;
        let lambda = DVector::from_iterator(3 * nf, lam.iter().copied().take(3 * nf));
        let sol = op.recover(&lambda);
        let flux = op.flux_functional(&lambda);
        let fb = SegmentBasis::new(k);
        let mut mu = vec![0.0; nf];
        for j in 0..3 {
            let (a, b, len, n) = inp.face_geometry(j);
            let mut direct = vec![0.0; nf];
            for (t, w) in segment_quadrature(2 * k as i32 + 2).unwrap().iter() {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                fb.eval_scaled(inp.face_param(j, t), len, &mut mu);
                let lam_x: f64 = (0..nf).map(|p| lambda[j * nf + p] * mu[p]).sum();
                let qn = op.basis.evaluate(&sol.qx, x) * n[0] + op.basis.evaluate(&sol.qy, x) * n[1];
                let qhat = qn + inp.tau[j] * (op.basis.evaluate(&sol.u, x) - lam_x);
                for p in 0..nf {
                    direct[p] += w * len * qhat * mu[p];
                }
            }
            for p in 0..nf {
                prop_assert!((direct[p] - flux[j * nf + p]).abs() <= 1e-12 * (1.0 + flux.amax()));
            }
        }
        // Local conservation: the constant modes carry (f, 1)_K.
        let mut fint = 0.0;
        for (x, w) in physical_triangle_rule(&v, 2 * k as i32 + 2, None).unwrap() {
            fint += w * f(x);
        }
        let mut total = 0.0;
        for j in 0..3 {
            let (_, _, len, _) = inp.face_geometry(j);
            total += flux[j * nf] * len.sqrt();
        }
        prop_assert!((total - fint).abs() <= 1e-11);
    }
}

fn sin_u(x: Point) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

fn sin_q(x: Point) -> Point {
    [
        -PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
        -PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
    ]
}

#[test]
fn projection_reproduces_polynomials() {
    let v = [[0.1, 0.0], [0.7, 0.2], [0.3, 0.9]];
    for k in 0..=3 {
        let u = move |x: Point| if k == 0 { 2.0 } else { x[0].powi(k as i32) - 3.0 * x[1] + x[0] * x[1].powi(k as i32 - 1) };
        let q = move |x: Point| if k == 0 { [1.0, -1.0] } else { [x[1].powi(k as i32), 1.0 + x[0]] };
        for tau in [[1.0; 3], [0.0, 2.0, 0.0]] {
            let p = hdg_projection(u, q, &v, tau, k).unwrap();
            let basis = crate::fem::ScaledMonomials::for_triangle(&v, k);
            for x in [[0.3, 0.3], [0.4, 0.5], v[1]] {
                assert!((basis.evaluate(&p.u, x) - u(x)).abs() < 1e-11);
                assert!((basis.evaluate(&p.qx, x) - q(x)[0]).abs() < 1e-11);
                assert!((basis.evaluate(&p.qy, x) - q(x)[1]).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn projection_face_residuals() {
    let v = [[0.1, 0.0], [0.7, 0.2], [0.3, 0.9]];
    let tau = [0.0, 0.0, 1.5];
    let k = 2;
    let p = hdg_projection(sin_u, sin_q, &v, tau, k).unwrap();
    let basis = crate::fem::ScaledMonomials::for_triangle(&v, k);
    let fb = SegmentBasis::new(k);
    let mut mu = vec![0.0; k + 1];
    for j in 0..3 {
        let a = v[(j + 1) % 3];
        let b = v[(j + 2) % 3];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        let n = [dy / len, -dx / len];
        let mut res = vec![0.0; k + 1];
        for (t, w) in segment_quadrature(2 * k as i32 + 4).unwrap().iter() {
            let x = [a[0] + t * dx, a[1] + t * dy];
            fb.eval_scaled(t, len, &mut mu);
            let ph = basis.evaluate(&p.qx, x) * n[0] + basis.evaluate(&p.qy, x) * n[1] + tau[j] * basis.evaluate(&p.u, x);
            let ex = sin_q(x)[0] * n[0] + sin_q(x)[1] * n[1] + tau[j] * sin_u(x);
            for (r, m) in res.iter_mut().zip(&mu) {
                *r += w * len * (ph - ex) * m;
            }
        }
        assert!(res.iter().all(|r| r.abs() <= 1e-11), "{res:?}");
    }
}

#[test]
fn projection_rate_two() {
    let mut errs = Vec::new();
    for n in [4, 8, 16] {
        let mesh = build_structured(Rect::UNIT, 1, 1, n).unwrap();
        let sub = &mesh.subdomains[0];
        let mut e2 = 0.0;
        for e in 0..sub.elements.len() {
            let v = sub.element_vertices(e);
            let p = hdg_projection(sin_u, sin_q, &v, [1.0; 3], 1).unwrap();
            let basis = crate::fem::ScaledMonomials::for_triangle(&v, 1);
            for (x, w) in physical_triangle_rule(&v, 6, None).unwrap() {
                e2 += w * (basis.evaluate(&p.u, x) - sin_u(x)).powi(2);
            }
        }
        errs.push(e2.sqrt());
    }
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 2.0).abs() < 0.15, "rate {rate}");
    }
}
