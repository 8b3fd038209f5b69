use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::fem::l2_project_segment;
use crate::homogenization::solve_cell_problems;
use crate::mesh::SegmentSide;

fn segment(a: Point, b: Point) -> SkeletonSegment {
    let length = (b[0] - a[0]).hypot(b[1] - a[1]);
    let t = [(b[0] - a[0]) / length, (b[1] - a[1]) / length];
    let side = |subdomain| SegmentSide {
        subdomain,
        faces: vec![],
    };
    SkeletonSegment {
        id: 3,
        endpoints: [a, b],
        sides: [side(0), side(1)],
        length,
        normal: [t[1], -t[0]],
    }
}

fn laminate(y: Point) -> f64 {
    if y[0] < 0.5 {
        1.0
    } else {
        4.0
    }
}

fn assert_orthonormal(b: &TraceBasis, tol: f64) {
    let g = gram_matrix(b);
    let err = (g - DMatrix::identity(b.dim(), b.dim())).abs().max();
    assert!(err <= tol, "gram error {err}");
}

#[test]
fn polynomial_normalization() {
    let seg = segment([0.5, 0.0], [0.5, 0.25]);
    let b0 = polynomial_trace_basis(&seg, 0);
    assert_eq!(b0.dim(), 1);
    assert!((b0.evaluate(&[1.0], 0.3) - 2.0).abs() < 1e-14);
    let b1 = polynomial_trace_basis(&seg, 1);
    let mut v = [0.0; 2];
    for s in [0.0, 0.2, 0.75, 1.0] {
        b1.eval(s, &mut v);
        let sigma = 0.25 * s;
        assert!((v[0] - 2.0).abs() < 1e-13);
        assert!((v[1] - 768f64.sqrt() * (sigma - 0.125)).abs() < 1e-12);
    }
    for l in 0..5 {
        assert_orthonormal(&polynomial_trace_basis(&seg, l), 1e-12);
    }
}

#[test]
fn flat_corrector_reduces_to_polynomials() {
    let flat = Arc::new(solve_cell_problems(|_| 2.0, 8).unwrap());
    let seg = segment([0.0, 0.5], [0.25, 0.5]);
    let ms0 = multiscale_trace_basis(&seg, 0, flat.clone(), 0.125, 0.125).unwrap();
    assert_eq!(ms0.dim(), 1);
    let ms = multiscale_trace_basis(&seg, 1, flat, 0.125, 0.125).unwrap();
    assert_eq!(ms.dim(), 2);
    assert_orthonormal(&ms, 1e-10);
    for g in [|s: f64| 1.0 + 0.0 * s, |s: f64| 3.0 * s - 1.0] {
        let c = interpolate_on_trace_basis(g, &ms);
        for s in [0.0, 0.4, 1.0] {
            assert!((ms.evaluate(c.as_slice(), s) - g(s)).abs() < 1e-11);
        }
    }
}

#[test]
fn laminate_rank_and_oscillation() {
    let cell = Arc::new(solve_cell_problems(laminate, 64).unwrap());
    let eps = 0.125;
    // Segment normal to e1: the corrector is constant along it.
    let vertical = segment([0.5, 0.25], [0.5, 0.5]);
    let b = multiscale_trace_basis(&vertical, 1, cell.clone(), eps, 0.125).unwrap();
    assert_eq!(b.dim(), 2);
    assert_orthonormal(&b, 1e-10);

    // Segment along e1 crosses two periods.
    let horizontal = segment([0.25, 0.5], [0.5, 0.5]);
    let b = multiscale_trace_basis(&horizontal, 1, cell, eps, 0.125).unwrap();
    assert_eq!(b.dim(), 2);
    assert_orthonormal(&b, 1e-10);
    let n = 256;
    let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let vals = b.eval_points(&s);
    // Remove the best line from each function and locate the Fourier peak.
    let mut peak_found = false;
    for row in 0..b.dim() {
        let f: Vec<f64> = (0..n).map(|i| vals[(row, i)]).collect();
        let mean = f.iter().sum::<f64>() / n as f64;
        let slope = f.iter().zip(&s).map(|(v, x)| (v - mean) * (x - 0.5)).sum::<f64>()
            / s.iter().map(|x| (x - 0.5).powi(2)).sum::<f64>();
        let r: Vec<f64> = f.iter().zip(&s).map(|(v, x)| v - mean - slope * (x - 0.5)).collect();
        let power = |k: usize| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in r.iter().enumerate() {
                let th = 2.0 * PI * k as f64 * i as f64 / n as f64;
                re += v * th.cos();
                im += v * th.sin();
            }
            re * re + im * im
        };
        let best = (1..16).max_by(|&a, &b| power(a).total_cmp(&power(b))).unwrap();
        if power(best) > 1e-6 && best == 2 {
            peak_found = true;
        }
    }
    assert!(peak_found);
}

#[test]
fn two_dimensional_cell_gives_three_functions() {
    let cell = Arc::new(
        solve_cell_problems(|y| 1.0 / (2.0 + (2.0 * PI * y[0]).sin() * (2.0 * PI * y[1]).sin() + 0.5 * (2.0 * PI * y[1]).cos()), 32)
            .unwrap(),
    );
    let seg = segment([0.25, 0.55], [0.5, 0.55]);
    let b = multiscale_trace_basis(&seg, 1, cell, 0.125, 0.125).unwrap();
    assert_eq!(b.dim(), 3);
    assert_orthonormal(&b, 1e-10);
}

#[test]
fn degenerate_sampling_is_reported() {
    let flat = Arc::new(solve_cell_problems(|_| 1.0, 4).unwrap());
    let seg = segment([0.0, 0.0], [1.0, 0.0]);
    assert!(matches!(
        multiscale_trace_basis(&seg, 2, flat.clone(), 10.0, 0.5),
        Err(Error::DegenerateSampling { samples: 4, candidates: 6 })
    ));
    assert!(multiscale_trace_basis(&seg, 1, flat, 0.0, 0.5).is_err());
}

#[test]
fn projection_of_sine_matches_face_projection() {
    let seg = segment([0.0, 0.0], [0.0, 1.0]);
    let b = polynomial_trace_basis(&seg, 1);
    let c = interpolate_on_trace_basis(|s| (PI * s).sin(), &b);
    let d = l2_project_segment(|s| (PI * s).sin(), 1.0, &SegmentBasis::new(1), 8).unwrap();
    assert!((c - d).amax() < 1e-12);
}

#[test]
fn multiscale_traces_beat_polynomials() {
    let cell = Arc::new(solve_cell_problems(laminate, 64).unwrap());
    let eps = 1.0 / 16.0;
    let seg = segment([0.25, 0.5], [0.5, 0.5]);
    let ms = multiscale_trace_basis(&seg, 1, cell.clone(), eps, 0.125).unwrap();
    let poly = polynomial_trace_basis(&seg, 1);
    // Trace of the first-order corrector of u0 = x1^2 along the segment.
    let g = |s: f64| {
        let x = seg.point(s);
        x[0] * x[0] + eps * cell.chi(0, [x[0] / eps, x[1] / eps]) * 2.0 * x[0]
    };
    let err = |b: &TraceBasis| {
        let c = interpolate_on_trace_basis(g, b);
        let rule = multiscale_rule(seg.length, eps);
        rule.iter()
            .map(|(s, w)| w * seg.length * (g(s) - b.evaluate(c.as_slice(), s)).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let (e_ms, e_poly) = (err(&ms), err(&poly));
    assert!(e_ms < e_poly, "{e_ms} vs {e_poly}");

    let sig = ms.signature();
    assert_eq!(sig.0, 3);
    assert_ne!(sig, poly.signature());
}
