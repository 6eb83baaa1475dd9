//! Steiner centroids, geodesics and points of ends, the relations between the
//! Steiner vectors of a finite-type surface, symmetric configurations where
//! they are known in closed form, and the symplectic pullback check.

use crate::asymptotics::{build_semigroup, extract_series, radius_centroid, FitWindow};
use crate::error::{Error, Result};
use crate::functionals::row_of;
use crate::grid::EndFunction;
use crate::halfspace::BoundaryPoint;
use crate::numerics::fit::decay_above_floor;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// s(y) = (1/(mπ)) ∫_{mS¹} e^y u(x, y)(cos x + i sin x) dx at the grid row nearest y.
pub fn steiner_centroid_slice(end: &EndFunction, y: f64) -> Result<Complex64> {
    let g = &end.grid;
    let j = row_of(g, y)?;
    let jets = end.jets();
    if let Some(i) = (0..g.nx).find(|&i| !(end.at(i, j) + jets.uxx[j * g.nx + i] > 0.0)) {
        return Err(Error::DegenerateImmersion { i, j, value: end.at(i, j) + jets.uxx[j * g.nx + i] });
    }
    Ok(slice_centroid_row(end, j))
}

fn slice_centroid_row(end: &EndFunction, j: usize) -> Complex64 {
    let g = &end.grid;
    let dx = 2.0 * PI * g.m as f64 / g.nx as f64;
    let sum: Complex64 = (0..g.nx).map(|i| Complex64::from_polar(end.at(i, j), g.x(i))).sum();
    sum * dx * g.y(j).exp() / (g.m as f64 * PI)
}

/// The vertical geodesic over the centroid and how fast the slice centroids,
/// placed at height e^y, approach it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteinerGeodesic {
    pub foot: Complex64,
    pub radius: f64,
    pub heights: Vec<f64>,
    /// Hyperbolic distance from (foot, e^y) to (s(y), e^y).
    pub distances: Vec<f64>,
    /// Fitted decay exponent; None when the distances are at rounding level throughout.
    pub exponent: Option<f64>,
}

pub fn steiner_geodesic(end: &EndFunction) -> Result<SteinerGeodesic> {
    let g = &end.grid;
    let sg = build_semigroup(g.m, end.k, (4.0 - 3.0 * end.k).sqrt())?;
    let (radius, foot) = radius_centroid(&extract_series(end, &sg, FitWindow::default())?)?;
    let heights = g.ys();
    let distances: Vec<f64> = (0..g.ny)
        .map(|j| {
            let gap = (slice_centroid_row(end, j) - foot).norm();
            2.0 * (gap / (2.0 * heights[j].exp())).asinh()
        })
        .collect();
    let exponent = if distances.iter().cloned().fold(0.0, f64::max) < 1e-12 {
        None
    } else {
        decay_above_floor(&heights, &distances, 10.0).map(|(b, _)| b)
    };
    Ok(SteinerGeodesic { foot, radius, heights, distances, exponent })
}

/// ζ = z + 1/c̄, or ∞ when c = 0.
pub fn steiner_point(z: Complex64, c: Complex64) -> BoundaryPoint {
    if c.norm_sqr() == 0.0 {
        BoundaryPoint::Infinity
    } else {
        BoundaryPoint::Finite(z + 1.0 / c.conj())
    }
}

/// c = 1/(ζ̄ − z̄), zero when ζ = ∞.
pub fn steiner_vector(z: Complex64, zeta: BoundaryPoint) -> Result<Complex64> {
    match zeta {
        BoundaryPoint::Infinity => Ok(Complex64::new(0.0, 0.0)),
        BoundaryPoint::Finite(w) if w == z => Err(Error::Domain("Steiner point coincides with its extremity".into())),
        BoundaryPoint::Finite(w) => Ok(1.0 / (w - z).conj()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndRecord {
    pub m: u32,
    pub z: BoundaryPoint,
    pub c: Complex64,
    pub zeta: BoundaryPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinerData {
    pub ends: Vec<EndRecord>,
}

impl SteinerData {
    /// Records from (m, z, c) with ζ derived from c.
    pub fn from_vectors(ends: &[(u32, Complex64, Complex64)]) -> Result<Self> {
        Self::new(ends.iter().map(|&(m, z, c)| EndRecord { m, z: BoundaryPoint::Finite(z), c, zeta: steiner_point(z, c) }).collect())
    }

    /// Checks m ≥ 1, ζ ≠ z and ζ = z + 1/c̄ for each finite extremity.
    pub fn new(ends: Vec<EndRecord>) -> Result<Self> {
        for (i, e) in ends.iter().enumerate() {
            if e.m == 0 {
                return Err(Error::Domain(format!("end {i}: winding order must be positive")));
            }
            if e.zeta == e.z {
                return Err(Error::Domain(format!("end {i}: Steiner point equals the extremity")));
            }
            if let BoundaryPoint::Finite(z) = e.z {
                let consistent = match (steiner_point(z, e.c), e.zeta) {
                    (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => true,
                    (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => (a - b).norm() <= 1e-12 * a.norm().max(1.0),
                    _ => false,
                };
                if !consistent {
                    return Err(Error::Domain(format!("end {i}: Steiner point and vector disagree")));
                }
            }
        }
        Ok(Self { ends })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    /// |Σ m_i c_i|
    pub sum_vectors: f64,
    /// |Σ m_i c_i z̄_i + ½ Σ m_i|
    pub moment: f64,
    /// |Σ m_i ‖z_i‖² ρ_i c_i − Σ m_i z_i|
    pub reflected: f64,
    pub tol: f64,
    pub pass: [bool; 3],
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }
}

/// ‖z‖² ρ(c) with ρ the reflection fixing the line through 0 perpendicular to z.
fn reflected_term(z: Complex64, c: Complex64) -> Complex64 {
    -z * z * c.conj()
}

/// ρ(c) = −z² c̄/‖z‖², zero when z = 0.
pub fn reflection(z: Complex64, c: Complex64) -> Complex64 {
    if z.norm_sqr() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        reflected_term(z, c) / z.norm_sqr()
    }
}

pub fn check_relations(data: &SteinerData, tol: f64) -> Result<RelationReport> {
    let mut s8 = Complex64::new(0.0, 0.0);
    let mut s9 = Complex64::new(0.0, 0.0);
    let mut s10 = Complex64::new(0.0, 0.0);
    let mut total = 0.0;
    for (i, e) in data.ends.iter().enumerate() {
        let z = e.z.finite().ok_or_else(|| Error::Unsupported(format!("end {i} has its extremity at infinity")))?;
        let m = e.m as f64;
        s8 += m * e.c;
        s9 += m * e.c * z.conj();
        s10 += m * (reflected_term(z, e.c) - z);
        total += m;
    }
    let (a, b, c) = (s8.norm(), (s9 + 0.5 * total).norm(), s10.norm());
    Ok(RelationReport { sum_vectors: a, moment: b, reflected: c, tol, pass: [a < tol, b < tol, c < tol] })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Example {
    /// n ends at the n-th roots of unity.
    I,
    /// An extra end at the origin.
    II,
    /// A branched configuration: order m0 at the origin, m1 at each root.
    III,
}

fn root(i: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64)
}

/// Whether 1/m0 + n/m1 is an integer.
pub fn integrality_holds(n: u32, m0: u32, m1: u32) -> bool {
    m0 > 0 && m1 > 0 && (m1 as u64 + n as u64 * m0 as u64).is_multiple_of(m0 as u64 * m1 as u64)
}

/// Extremities and Steiner vectors of the symmetric configurations. `m0` and
/// `m1` are only read for kind III.
pub fn symmetric_examples(kind: Example, n: u32, m0: u32, m1: u32) -> Result<SteinerData> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least two ends on the unit circle, got {n}")));
    }
    let nf = n as f64;
    let ring = |m: u32, factor: f64| (1..=n as usize).map(move |i| (m, root(i, n as usize), factor * root(i, n as usize)));
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        Example::I => SteinerData::from_vectors(&ring(1, -0.5).collect::<Vec<_>>()),
        Example::II => {
            let mut v = vec![(1, zero, zero)];
            v.extend(ring(1, -(nf + 1.0) / (2.0 * nf)));
            SteinerData::from_vectors(&v)
        }
        Example::III => {
            if !integrality_holds(n, m0, m1) {
                return Err(Error::Constraint(format!("1/{m0} + {n}/{m1} is not an integer")));
            }
            let (a, b) = (m0 as f64, m1 as f64);
            let mut v = vec![(m0, zero, zero)];
            v.extend(ring(m1, -(a + nf * b) / (2.0 * nf * b)));
            SteinerData::from_vectors(&v)
        }
    }
}

/// Closed-form Steiner points of the symmetric configurations, in the order
/// produced by `symmetric_examples`.
pub fn closed_form_points(kind: Example, n: u32, m0: u32, m1: u32) -> Vec<BoundaryPoint> {
    let nf = n as f64;
    let ring = |f: f64| (1..=n as usize).map(move |i| BoundaryPoint::Finite(f * root(i, n as usize)));
    match kind {
        Example::I => ring(-1.0).collect(),
        Example::II => std::iter::once(BoundaryPoint::Infinity).chain(ring((1.0 - nf) / (1.0 + nf))).collect(),
        Example::III => {
            let (a, b) = (m0 as f64, nf * m1 as f64);
            std::iter::once(BoundaryPoint::Infinity).chain(ring((a - b) / (a + b))).collect()
        }
    }
}

/// Ψ(z, w) = (z, z + 1/w̄): the map from (extremity, Steiner vector) to
/// (extremity, Steiner point).
pub fn psi(z: Complex64, w: Complex64) -> (Complex64, Complex64) {
    (z, z + 1.0 / w.conj())
}

/// The holomorphic variant (z, z + 1/w).
pub fn psi_holomorphic(z: Complex64, w: Complex64) -> (Complex64, Complex64) {
    (z, z + 1.0 / w)
}

/// ω = dz∧dw/(z − w)² at (z, w) on the tangent vectors u, v (components dz, dw).
pub fn omega(z: Complex64, w: Complex64, u: [Complex64; 2], v: [Complex64; 2]) -> Complex64 {
    (u[0] * v[1] - v[0] * u[1]) / ((z - w) * (z - w))
}

/// dz∧dw̄ on real tangent vectors given by their (dz, dw) components.
fn dz_dwbar(u: [Complex64; 2], v: [Complex64; 2]) -> Complex64 {
    u[0] * v[1].conj() - v[0] * u[1].conj()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymplecticReport {
    /// max |Ψ*ω − σ dz∧dw̄| over pairs of real coordinate directions, with σ = `sign`.
    pub residual: f64,
    pub sign: f64,
    /// The same with σ = +1.
    pub residual_positive: f64,
    /// max |Ψ_hol*ω − dz∧dw̄| for the holomorphic variant.
    pub residual_holomorphic: f64,
}

pub const PULLBACK_SIGN: f64 = -1.0;
pub const FD_STEP: f64 = 1e-5;

type Chart = fn(Complex64, Complex64) -> (Complex64, Complex64);

fn pullback_residual(map: Chart, z: Complex64, w: Complex64, sign: f64, h: f64) -> f64 {
    let basis: [[Complex64; 2]; 4] = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
    ];
    let push = |e: [Complex64; 2]| {
        let (a1, b1) = map(z + h * e[0], w + h * e[1]);
        let (a0, b0) = map(z - h * e[0], w - h * e[1]);
        [(a1 - a0) / (2.0 * h), (b1 - b0) / (2.0 * h)]
    };
    let pushed: Vec<[Complex64; 2]> = basis.iter().map(|&e| push(e)).collect();
    let (pz, pw) = map(z, w);
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            let lhs = omega(pz, pw, pushed[a], pushed[b]);
            let rhs = sign * dz_dwbar(basis[a], basis[b]);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Finite-difference pullback of ω through Ψ at (z, w), compared with ±dz∧dw̄.
pub fn symplectic_check(z: Complex64, w: Complex64) -> Result<SymplecticReport> {
    if z == w {
        return Err(Error::Domain("coincident points".into()));
    }
    if w.norm_sqr() == 0.0 {
        return Err(Error::Domain("w = 0 is outside the chart".into()));
    }
    let report = SymplecticReport {
        residual: pullback_residual(psi, z, w, PULLBACK_SIGN, FD_STEP),
        sign: PULLBACK_SIGN,
        residual_positive: pullback_residual(psi, z, w, 1.0, FD_STEP),
        residual_holomorphic: pullback_residual(psi_holomorphic, z, w, 1.0, FD_STEP),
    };
    log::debug!("pullback of ω through Ψ is {}dz∧dw̄ (residual {:e})", if PULLBACK_SIGN < 0.0 { "−" } else { "" }, report.residual);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::EndGrid;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn cx(a: f64, b: f64) -> Complex64 {
        Complex64::new(a, b)
    }

    #[test]
    fn steiner_point_examples() {
        assert_eq!(steiner_point(cx(0.0, 0.0), cx(-0.5, 0.0)), BoundaryPoint::Finite(cx(-2.0, 0.0)));
        assert_eq!(steiner_point(cx(1.0, 0.0), cx(0.0, 0.0)), BoundaryPoint::Infinity);
        let z = Complex64::from_polar(1.0, 0.7);
        let BoundaryPoint::Finite(zeta) = steiner_point(z, -0.5 * z) else { panic!() };
        assert!((zeta + z).norm() < 1e-15);
        let c = cx(0.3, -1.2);
        let back = steiner_vector(z, steiner_point(z, c)).unwrap();
        assert!((back - c).norm() < 1e-15);
        assert!(steiner_vector(z, BoundaryPoint::Finite(z)).is_err());
    }

    #[test]
    fn planted_end_is_centred_exactly() {
        let k: f64 = 0.5;
        let a = (1.0 - k).sqrt();
        let (g1, g2) = (0.004, -0.003);
        let g = Arc::new(EndGrid::new(1, 64, 12 * 32 + 1, 12.0).unwrap());
        let end = EndFunction::from_fn(k, g.clone(), |x, y| {
            0.05 * (-a * y).exp() + (g1 * x.cos() + g2 * x.sin()) * (-y).exp()
        })
        .unwrap();
        for y in [0.0, 3.0, 7.5, 12.0] {
            assert!((steiner_centroid_slice(&end, y).unwrap() - cx(g1, g2)).norm() < 1e-15);
        }
        let geo = steiner_geodesic(&end).unwrap();
        assert!((geo.foot - cx(g1, g2)).norm() < 1e-12);
        assert!(geo.distances.iter().all(|&d| d < 1e-12));
        assert!(geo.exponent.is_none());
    }

    #[test]
    fn radial_end_has_zero_centroid_and_nonconvex_slices_fail() {
        let g = Arc::new(EndGrid::new(1, 32, 41, 4.0).unwrap());
        let end = EndFunction::from_fn(0.5, g.clone(), |_, y| 0.05 * (-0.7 * y).exp()).unwrap();
        assert!(steiner_centroid_slice(&end, 2.0).unwrap().norm() < 1e-15);
        let bad = EndFunction::from_fn(0.5, g, |x, y| (0.01 + 0.05 * (2.0 * x).cos()) * (-y).exp()).unwrap();
        assert!(matches!(steiner_centroid_slice(&bad, 1.0), Err(Error::DegenerateImmersion { .. })));
    }

    #[test]
    fn example_relations_and_points() {
        for n in 3..=8 {
            for kind in [Example::I, Example::II] {
                let d = symmetric_examples(kind, n, 1, 1).unwrap();
                let r = check_relations(&d, 1e-14).unwrap();
                assert!(r.all_pass(), "{kind:?} n={n}: {r:?}");
                for (e, want) in d.ends.iter().zip(closed_form_points(kind, n, 1, 1)) {
                    match (e.zeta, want) {
                        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => assert!((a - b).norm() < 1e-15),
                        (a, b) => assert_eq!(a, b),
                    }
                }
            }
        }
        let ii = symmetric_examples(Example::II, 5, 1, 1).unwrap();
        let moment: Complex64 = ii.ends.iter().map(|e| e.m as f64 * e.c * e.z.finite().unwrap().conj()).sum();
        assert!((moment - cx(-3.0, 0.0)).norm() < 1e-14);
        let BoundaryPoint::Finite(z1) = ii.ends[1].zeta else { panic!() };
        assert!((z1.norm() - 2.0 / 3.0).abs() < 1e-15);
        let iii = symmetric_examples(Example::III, 3, 2, 2).unwrap();
        for e in &iii.ends[1..] {
            assert!((e.c + 2.0 / 3.0 * e.z.finite().unwrap()).norm() < 1e-15);
            assert_eq!(e.m, 2);
        }
        assert_eq!(iii.ends[0].m, 2);
        assert!(matches!(symmetric_examples(Example::III, 5, 5, 5), Err(Error::Constraint(_))));
    }

    #[test]
    fn perturbation_and_infinity() {
        let mut d = symmetric_examples(Example::III, 2, 2, 4).unwrap();
        d.ends[1].c += 0.01;
        d.ends[1].zeta = steiner_point(d.ends[1].z.finite().unwrap(), d.ends[1].c);
        let r = check_relations(&d, 1e-14).unwrap();
        assert!((r.sum_vectors - 0.01 * 4.0).abs() < 1e-14);
        assert!(!r.pass[0]);
        let far = SteinerData::new(vec![EndRecord {
            m: 1,
            z: BoundaryPoint::Infinity,
            c: cx(0.0, 0.0),
            zeta: BoundaryPoint::Finite(cx(0.0, 0.0)),
        }])
        .unwrap();
        assert!(matches!(check_relations(&far, 1e-14), Err(Error::Unsupported(_))));
        let inconsistent = SteinerData::new(vec![EndRecord {
            m: 1,
            z: BoundaryPoint::Finite(cx(1.0, 0.0)),
            c: cx(-0.5, 0.0),
            zeta: BoundaryPoint::Finite(cx(0.0, 0.0)),
        }]);
        assert!(inconsistent.is_err());
    }

    #[test]
    fn reflection_is_an_involution_fixing_the_perpendicular() {
        let z = cx(0.6, 0.8);
        let c = cx(-0.3, 0.45);
        assert!((reflection(z, reflection(z, c)) - c).norm() < 1e-15);
        assert!((reflection(z, z) + z).norm() < 1e-15);
        let perp = z * Complex64::i();
        assert!((reflection(z, perp) - perp).norm() < 1e-15);
        assert_eq!(reflection(cx(0.0, 0.0), c), cx(0.0, 0.0));
    }

    #[test]
    fn pullback_examples() {
        for (z, w) in [(cx(0.0, 0.0), cx(1.0, 0.0)), (cx(1.0, 1.0), cx(2.0, -1.0))] {
            let r = symplectic_check(z, w).unwrap();
            assert!(r.residual < 1e-8, "{r:?}");
            assert!(r.residual_positive > 1.0);
            assert!(r.residual_holomorphic > 1.0);
        }
        let v = [cx(0.3, 1.0), cx(-2.0, 0.5)];
        assert_eq!(omega(cx(0.0, 0.0), cx(1.0, 0.0), v, v), cx(0.0, 0.0));
        assert!(symplectic_check(cx(1.0, 0.0), cx(1.0, 0.0)).is_err());
        assert!(symplectic_check(cx(1.0, 0.0), cx(0.0, 0.0)).is_err());
    }

    fn arb_data() -> impl Strategy<Value = SteinerData> {
        prop::collection::vec((1u32..4, -2.0..2.0f64, -2.0..2.0f64, -1.0..1.0f64, -1.0..1.0f64), 2..7).prop_filter_map(
            "valid data",
            |v| SteinerData::from_vectors(&v.iter().map(|&(m, a, b, c, d)| (m, cx(a, b), cx(c, d))).collect::<Vec<_>>()).ok(),
        )
    }

    proptest! {
        #[test]
        fn relations_are_permutation_invariant(d in arb_data(), seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = d.clone();
            shuffled.ends.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let (a, b) = (check_relations(&d, 1e-14).unwrap(), check_relations(&shuffled, 1e-14).unwrap());
            for (x, y) in [(a.sum_vectors, b.sum_vectors), (a.moment, b.moment), (a.reflected, b.reflected)] {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn translation_preserves_the_first_two_relations(n in 3u32..9, ta in -3.0..3.0f64, tb in -3.0..3.0f64) {
            let t = cx(ta, tb);
            let d = symmetric_examples(Example::II, n, 1, 1).unwrap();
            let moved: Vec<EndRecord> = d.ends.iter().map(|e| {
                let z = BoundaryPoint::Finite(e.z.finite().unwrap() + t);
                let zeta = match e.zeta { BoundaryPoint::Finite(w) => BoundaryPoint::Finite(w + t), p => p };
                EndRecord { m: e.m, z, c: e.c, zeta }
            }).collect();
            let r = check_relations(&SteinerData::new(moved).unwrap(), 1e-13).unwrap();
            prop_assert!(r.pass[0] && r.pass[1], "{:?}", r);
        }
    }
}
