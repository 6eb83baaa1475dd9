use kend::asymptotics::centroid_integral;
use kend::fixtures::asymmetric_end;
use kend::grid::EndFunction;
use kend::halfspace::{boundary_action, BoundaryPoint, Isometry};
use kend::numerics::fit::decay_above_floor;
use kend::steiner::*;
use num_complex::Complex64;
use std::f64::consts::PI;

const K: f64 = 0.5;

fn omega() -> f64 {
    (4.0 - 3.0 * K).sqrt()
}

#[test]
fn slice_centroids_approach_the_foot_point() {
    let end = asymmetric_end(K).unwrap().end;
    let g = &end.grid;
    let geo = steiner_geodesic(&end).unwrap();
    let (ys, errs): (Vec<f64>, Vec<f64>) = (0..g.ny)
        .step_by(8)
        .map(|j| (g.y(j), (steiner_centroid_slice(&end, g.y(j)).unwrap() - geo.foot).norm()))
        .unzip();
    let rate = decay_above_floor(&ys, &errs, 10.0).unwrap().0;
    assert!(rate >= omega() - 1.0 - 0.05, "rate {rate}");
    let j = 3 * g.ny / 4;
    let s = steiner_centroid_slice(&end, g.y(j)).unwrap();
    let by_parts = Complex64::new(centroid_integral(&end, j, 1.0, 0.0), centroid_integral(&end, j, 0.0, 1.0));
    assert!((s - by_parts * g.y(j).exp() / PI).norm() < 1e-14);
}

#[test]
fn geodesic_distance_rate() {
    let end = asymmetric_end(K).unwrap().end;
    let geo = steiner_geodesic(&end).unwrap();
    assert!(geo.exponent.unwrap() >= omega() - 0.05, "{:?}", geo.exponent);
    assert!(geo.radius > 0.0);
}

#[test]
fn translated_end_moves_the_foot_point() {
    let end = asymmetric_end(K).unwrap().end;
    let (a, b) = (0.011, -0.004);
    let sigma = EndFunction::from_fn(K, end.grid.clone(), |x, y| (a * x.cos() + b * x.sin()) * (-y).exp()).unwrap();
    let sum: Vec<f64> = end.values.iter().zip(&sigma.values).map(|(u, s)| u + s).collect();
    let moved = EndFunction::new(K, end.grid.clone(), sum).unwrap();
    let (f0, f1) = (steiner_geodesic(&end).unwrap().foot, steiner_geodesic(&moved).unwrap().foot);
    assert!((f1 - f0 - Complex64::new(a, b)).norm() < 1e-10);
}

#[test]
fn conjugated_foot_point_is_the_steiner_point() {
    let end = asymmetric_end(K).unwrap().end;
    let c = steiner_geodesic(&end).unwrap().foot;
    for zi in [Complex64::new(0.0, 0.0), Complex64::new(1.5, -0.5), Complex64::from_polar(1.0, 2.0)] {
        let image = boundary_action(&Isometry::EndMap(zi), BoundaryPoint::Finite(c));
        let via_origin = boundary_action(&Isometry::Translation(zi.re, zi.im), steiner_point(Complex64::new(0.0, 0.0), c));
        for p in [steiner_point(zi, c), via_origin] {
            let (BoundaryPoint::Finite(x), BoundaryPoint::Finite(y)) = (p, image) else { panic!() };
            assert!((x - y).norm() < 1e-12 * y.norm().max(1.0));
        }
        assert!((steiner_vector(zi, image).unwrap() - c).norm() < 1e-12 * c.norm());
    }
}
