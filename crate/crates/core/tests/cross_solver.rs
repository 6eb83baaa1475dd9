use kend::fixtures::{picard_fixture, solve_cached};
use kend::greens::{end_nonlinearity, picard_solve, GreenConfig};
use kend::grid::EndGrid;
use std::sync::Arc;

#[test]
fn newton_and_picard_agree() {
    for k in [0.3, 0.5, 0.75] {
        let g = Arc::new(EndGrid::default_for(k, 1).unwrap());
        let data = picard_fixture(k);
        let newton = solve_cached(k, g.clone(), &data).unwrap();
        let v = data.sample(&g);
        let (pic, rep) =
            picard_solve(&GreenConfig::end_operator(k, g.clone()), k, &v, end_nonlinearity(k), 1e-14, 60, None).unwrap();
        let diff = pic.values.iter().zip(&newton.end.values).fold(0.0, |a: f64, (p, q)| a.max((p - q).abs()));
        println!("k={k}: {} Picard iterations, sup difference {diff:e}", rep.iterations);
        assert!(diff < 1e-7);
    }
}
