use kend::asymptotics::{build_semigroup, extract_series, radius_centroid, FitWindow};
use kend::fixtures::{asymmetric_end, regression_end};
use kend::functionals::*;
use kend::grid::EndFunction;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn centroid(end: &EndFunction) -> (f64, Complex64) {
    let k = end.k;
    let sg = build_semigroup(end.grid.m, k, (4.0 - 3.0 * k).sqrt()).unwrap();
    radius_centroid(&extract_series(end, &sg, FitWindow::default()).unwrap()).unwrap()
}

fn bar(k: f64) -> f64 {
    (4.0 - 3.0 * k).sqrt() - 1.0 - 0.05
}

#[test]
fn conormal_flux_detects_the_centroid() {
    let k = 0.5;
    let end = asymmetric_end(k).unwrap().end;
    let (_, c) = centroid(&end);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p = FluxProfile::slice(&end, Flux::Conormal, a, b).unwrap();
        let want = -4.0 * PI * end.grid.m as f64 * (a * c.re + b * c.im);
        assert!((p.limit - want).abs() < 1e-4, "{} vs {want}", p.limit);
        assert!(p.exponent.unwrap() >= bar(k));
    }
}

#[test]
fn companion_fluxes_decay() {
    for k in [0.3, 0.5, 0.75] {
        let end = asymmetric_end(k).unwrap().end;
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8)] {
            for which in [Flux::Dnu, Flux::Alpha] {
                let p = FluxProfile::slice(&end, which, a, b).unwrap();
                assert!(p.limit.abs() < 1e-9, "{which:?} limit {}", p.limit);
                assert!(p.exponent.unwrap() >= bar(k), "{which:?} k={k} exponent {:?}", p.exponent);
            }
            let p = FluxProfile::normal(&end, a, b).unwrap();
            assert!(p.exponent.unwrap() >= bar(k));
        }
    }
}

#[test]
fn normal_flux_increments_shrink() {
    let k = 0.5;
    let end = regression_end(k).unwrap().end;
    let g = &end.grid;
    let prof = flux_normal_profile(&end, 1.0, 0.0).unwrap();
    let at = |y: f64| prof[row_of(g, y).unwrap()];
    let y = (g.y_max - 0.5).floor();
    let (d1, d2) = (at(y - 2.0) - at(y - 3.0), at(y - 1.0) - at(y - 2.0));
    let factor = (d1 / d2).abs();
    assert!(factor >= ((4.0 - 3.0 * k).sqrt() - 1.0).exp() * 0.95, "factor {factor}");
    assert!((flux_normal_cumulative(&end, y, 1.0, 0.0).unwrap() - at(y)).abs() < 1e-18);
}

#[test]
fn normal_flux_is_the_alpha_boundary_term() {
    // The normal flux through [0, Y] equals the difference of the α_∞ slice
    // integrals at its two ends.
    let end = asymmetric_end(0.5).unwrap().end;
    let g = &end.grid;
    let prof = flux_normal_profile(&end, 0.6, -0.8).unwrap();
    let alpha = slice_flux_rows(&end, Flux::Alpha, 0.6, -0.8).unwrap();
    for j in (0..g.ny).step_by(97) {
        assert!((prof[j] - (alpha[j] - alpha[0])).abs() < 1e-10, "row {j}");
    }
    assert!((flux_alpha(&end, g.y(97), 0.6, -0.8).unwrap() - alpha[97]).abs() < 1e-18);
}

#[test]
fn slice_length_and_curvature() {
    for k in [0.5, 0.75] {
        let end = regression_end(k).unwrap().end;
        let g = &end.grid;
        let (r, _) = centroid(&end);
        let y = g.y(row_of(g, ((g.y_max - 2.0) / g.hy).round() * g.hy).unwrap());
        let a = (1.0 - k).sqrt();
        let ratio = length_profile(&end, y).unwrap() / (2.0 * PI * r * (-a * y).exp());
        assert!((ratio - 1.0).abs() < 1e-3);
        assert!((kappa_profile(&end, y).unwrap().mean + a).abs() < 1e-3);
    }
}

#[test]
fn energy_and_volume_ladders() {
    let k = 0.5;
    let end = regression_end(k).unwrap().end;
    let a = (1.0 - k).sqrt();
    let e = energy_renormalized(&end).unwrap();
    // The integrand H dArea − dx dy is quadratic in u, so the ladder decays at
    // twice the radial rate.
    for q in &e.cauchy_ratios {
        assert!((q / (-2.0 * a).exp() - 1.0).abs() < 0.01, "ratio {q}");
    }
    assert!(e.tail_bound < 1e-9);
    let v = volume_profile(&end).unwrap();
    let (_, _, ratios, _, _) = ladder(&end.grid, &v);
    for (qv, qe) in ratios.iter().zip(&e.cauchy_ratios) {
        assert!((qv / qe - 1.0).abs() < 0.1);
    }
}

#[test]
fn mirror_image_has_the_same_volume() {
    let end = asymmetric_end(0.5).unwrap().end;
    let g = &end.grid;
    let mirrored: Vec<f64> =
        (0..g.ny).flat_map(|j| (0..g.nx).map(move |i| (j, (g.nx - i) % g.nx))).map(|(j, i)| end.at(i, j)).collect();
    let mirror = EndFunction::new(end.k, end.grid.clone(), mirrored).unwrap();
    let y = 10.0;
    let (v0, v1) = (volume_truncated(&end, y).unwrap(), volume_truncated(&mirror, y).unwrap());
    assert!((v0 - v1).abs() < 1e-14 && v0 > 0.0);
}
