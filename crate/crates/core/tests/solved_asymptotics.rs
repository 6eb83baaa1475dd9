use kend::asymptotics::*;
use kend::fixtures::{asymmetric_end, regression_end};
use kend::grid::{EndFunction, EndGrid};
use kend::numerics::fit::{decay_above_floor, decay_exponent};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

const K: f64 = 0.5;

fn omega(k: f64) -> f64 {
    (4.0 - 3.0 * k).sqrt()
}

fn solved() -> Arc<EndFunction> {
    regression_end(K).unwrap().end
}

fn series(end: &EndFunction, cutoff: f64) -> AsymptoticSeries {
    let sg = build_semigroup(end.grid.m, end.k, cutoff).unwrap();
    extract_series(end, &sg, FitWindow::default()).unwrap()
}

fn tail_rate(end: &EndFunction, n: i64) -> f64 {
    let g = &end.grid;
    let p = g.mode_profile(&end.values, g.spectral.slot(n));
    let ys = g.ys();
    let rows: Vec<usize> = (0..g.ny).filter(|&j| ys[j] >= 0.5 * g.y_max && ys[j] <= g.y_max - 1.0).collect();
    let y: Vec<f64> = rows.iter().map(|&j| ys[j]).collect();
    let f: Vec<f64> = rows.iter().map(|&j| p[j].norm()).collect();
    decay_exponent(&y, &f).unwrap().0
}

#[test]
fn mode_tails_and_remainder_rate() {
    let end = solved();
    let a = (1.0 - K).sqrt();
    assert!((tail_rate(&end, 0) / a - 1.0).abs() < 0.01);
    assert!((tail_rate(&end, 1) - 1.0).abs() < 0.01);
    assert!((tail_rate(&end, -1) - 1.0).abs() < 0.01);
    let s = series(&end, omega(K));
    assert!(s.remainder_rate.unwrap() >= omega(K) - 0.05, "{:?}", s.remainder_rate);
    assert!(s.reality_defect() < 1e-12);
    assert!(centroid_free_check(&s));
}

#[test]
fn rotation_equivariance() {
    let end = solved();
    let g = &end.grid;
    let xi = PI / 3.0;
    let rotated: Vec<f64> = end.values.chunks(g.nx).flat_map(|r| g.spectral.translate(r, xi)).collect();
    let rot = EndFunction::new(K, g.clone(), rotated).unwrap();
    let (s0, s1) = (series(&end, omega(K)), series(&rot, omega(K)));
    for t in &s0.terms {
        let lam = t.index.lambda(g.m);
        let want = t.amplitude * Complex64::from_polar(1.0, lam * xi);
        assert!((s1.amplitude(t.index.n, t.index.mu) - want).norm() < 1e-8);
    }
    let (r0, c0) = radius_centroid(&s0).unwrap();
    let (r1, c1) = radius_centroid(&s1).unwrap();
    assert!((r0 - r1).abs() < 1e-8);
    // Resampling at x + ξ rotates the centroid by −ξ.
    assert!((c1 - c0 * Complex64::from_polar(1.0, -xi)).norm() < 1e-8);
}

#[test]
fn translation_equivariance() {
    let end = solved();
    let (a, b) = (0.013, -0.007);
    let moved =
        EndFunction::from_fn(K, end.grid.clone(), |x, y| (a * x.cos() + b * x.sin()) * (-y).exp()).unwrap();
    let sum: Vec<f64> = end.values.iter().zip(&moved.values).map(|(u, s)| u + s).collect();
    let shifted = EndFunction::new(K, end.grid.clone(), sum).unwrap();
    let (r0, c0) = radius_centroid(&series(&end, omega(K))).unwrap();
    let (r1, c1) = radius_centroid(&series(&shifted, omega(K))).unwrap();
    assert!((r1 - r0).abs() < 1e-8);
    assert!((c1 - c0 - Complex64::new(a, b)).norm() < 1e-8);
}

#[test]
fn dilation_equivariance() {
    let end = solved();
    let g = &end.grid;
    let shift_rows = 64;
    let eta = shift_rows as f64 * g.hy;
    let ny = g.ny - shift_rows;
    let g2 = Arc::new(EndGrid::new(g.m, g.nx, ny, g.y(ny - 1)).unwrap());
    let up = EndFunction::new(K, g2, end.values[shift_rows * g.nx..].to_vec()).unwrap();
    let (r0, c0) = radius_centroid(&series(&end, omega(K))).unwrap();
    let (r1, c1) = radius_centroid(&series(&up, omega(K))).unwrap();
    let a = (1.0 - K).sqrt();
    assert!((r1 / (r0 * (-a * eta).exp()) - 1.0).abs() < 1e-6);
    assert!((c1 - c0 * (-eta).exp()).norm() < 1e-6 * c0.norm());
}

#[test]
fn product_matches_pointwise_square() {
    let end = solved();
    let a = (1.0 - K).sqrt();
    let s = series(&end, 1.5);
    let prod = series_product(&s, &s).unwrap();
    assert!((prod.cutoff - (1.5 + a).min(3.0)).abs() < 1e-15);
    let sq: Vec<f64> = end.values.iter().map(|u| u * u).collect();
    let sq = EndFunction::new(K, end.grid.clone(), sq).unwrap();
    let s2 = series(&sq, prod.cutoff);
    let mut checked = 0;
    for t in &s2.terms {
        let want = prod.amplitude(t.index.n, t.index.mu);
        assert!((t.amplitude - want).norm() < 1e-6, "{:?}: {} vs {}", t.index, t.amplitude, want);
        checked += want.norm().max(t.amplitude.norm()).gt(&1e-6) as usize;
    }
    assert!(checked >= 3);
}

#[test]
fn differentiated_series_matches_fd_derivative() {
    let end = solved();
    let s = series(&end, omega(K));
    let uy = EndFunction::new(K, end.grid.clone(), end.jets().uy).unwrap();
    let sy = series(&uy, omega(K));
    let d = s.differentiate(0, 1);
    for t in &d.terms {
        assert!((sy.amplitude(t.index.n, t.index.mu) - t.amplitude).norm() < 1e-7);
    }
}

#[test]
fn centroid_integral_converges() {
    let end = asymmetric_end(K).unwrap().end;
    let g = &end.grid;
    let (_, c) = radius_centroid(&series(&end, omega(K))).unwrap();
    let mpi = g.m as f64 * PI;
    let (ys, errs): (Vec<f64>, Vec<f64>) = (0..g.ny)
        .map(|j| {
            let y = g.y(j);
            (y, (y.exp() * centroid_integral(&end, j, 1.0, 0.0) / mpi - c.re).abs())
        })
        .unzip();
    let rate = decay_above_floor(&ys, &errs, 10.0).unwrap().0;
    assert!(rate >= omega(K) - 1.0 - 0.05, "rate {rate}");
    assert!(errs[g.ny / 2] < 1e-9);
}

#[test]
fn asymmetric_end_remainder_rate() {
    let end = asymmetric_end(K).unwrap().end;
    let s = series(&end, omega(K));
    assert!(s.remainder_rate.unwrap() >= omega(K) - 0.05, "{:?}", s.remainder_rate);
    assert!(s.reality_defect() < 1e-12);
}

#[test]
fn symmetric_end_has_no_centroid() {
    let g = Arc::new(EndGrid::default_for(K, 1).unwrap());
    let s = kend::fixtures::solve_cached(K, g, &kend::fixtures::Boundary::cosine(&[0.05])).unwrap();
    let (r, c) = radius_centroid(&series(&s.end, omega(K))).unwrap();
    assert!(r > 0.0);
    assert!(c.norm() < 1e-12);
    for j in [0, 100, 500] {
        assert!(centroid_integral(&s.end, j, 0.3, -0.8).abs() < 1e-14);
    }
}
