//! The upper half-space model of hyperbolic 3-space.
//!
//! Points are (x, y, z) with z > 0 and metric δ/z². Tangent vectors are
//! ambient Cartesian triples; hyperbolic inner products carry the 1/z² factor.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(z > 0.0) || !x.is_finite() || !y.is_finite() || !z.is_finite() {
            return Err(Error::Domain(format!("point ({x}, {y}, {z}) is not in the upper half-space")));
        }
        Ok(Self { x, y, z })
    }

    pub fn from_array(v: Vec3) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn scale(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Hyperbolic inner product of two tangent vectors at p.
pub fn inner(p: HPoint, a: Vec3, b: Vec3) -> f64 {
    dot(a, b) / (p.z * p.z)
}

/// Hyperbolic distance. Written as 2 asinh(|p − q| / (2√(z z'))), which equals
/// acosh(1 + |p − q|²/(2 z z')) and keeps full relative accuracy for nearby points.
pub fn hyp_distance(p: HPoint, q: HPoint) -> f64 {
    let d = sub(p.to_array(), q.to_array());
    let e = dot(d, d).sqrt();
    2.0 * (e / (2.0 * (p.z * q.z).sqrt())).asinh()
}

/// Ideal boundary point: a finite complex number or ∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Finite(Complex64),
    Infinity,
}

impl BoundaryPoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            BoundaryPoint::Finite(w) => Some(w),
            BoundaryPoint::Infinity => None,
        }
    }
}

/// 1/w̄ on the Riemann sphere.
fn invert_boundary(w: BoundaryPoint) -> BoundaryPoint {
    match w {
        BoundaryPoint::Infinity => BoundaryPoint::Finite(Complex64::new(0.0, 0.0)),
        BoundaryPoint::Finite(v) if v.norm_sqr() == 0.0 => BoundaryPoint::Infinity,
        BoundaryPoint::Finite(v) => BoundaryPoint::Finite(v / v.norm_sqr()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Isometry {
    /// Rotation by ξ radians about the vertical axis.
    Rotation(f64),
    /// Dilation x ↦ s·x with s > 0.
    Dilation(f64),
    /// Horizontal translation by (a, b).
    Translation(f64, f64),
    /// Inversion x ↦ x/‖x‖² in the unit sphere.
    Inversion,
    /// Reflection (x, y, z) ↦ (x, −y, z).
    ReflectY,
    /// x ↦ x/‖x‖² + z_i, sending ∞ to z_i.
    EndMap(Complex64),
    /// Apply the listed maps from first to last.
    Compose(Vec<Isometry>),
}

impl Isometry {
    pub fn validate(&self) -> Result<()> {
        match self {
            Isometry::Dilation(s) if !(*s > 0.0) => Err(Error::Domain(format!("dilation scale {s} must be positive"))),
            Isometry::Compose(v) => v.iter().try_for_each(|i| i.validate()),
            _ => Ok(()),
        }
    }

    /// Orientation-preserving isometry sending w to ∞ (and ∞ to 0 for finite w).
    pub fn sending_to_infinity(w: BoundaryPoint) -> Isometry {
        match w {
            BoundaryPoint::Infinity => Isometry::Compose(vec![]),
            BoundaryPoint::Finite(c) => Isometry::Compose(vec![
                Isometry::Translation(-c.re, -c.im),
                Isometry::Inversion,
                Isometry::ReflectY,
            ]),
        }
    }

    pub fn reverses_orientation(&self) -> bool {
        match self {
            Isometry::Inversion | Isometry::ReflectY | Isometry::EndMap(_) => true,
            Isometry::Compose(v) => v.iter().filter(|i| i.reverses_orientation()).count() % 2 == 1,
            _ => false,
        }
    }

    fn apply_raw(&self, p: Vec3) -> Vec3 {
        match self {
            Isometry::Rotation(xi) => {
                let (s, c) = xi.sin_cos();
                [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]]
            }
            Isometry::Dilation(s) => scale(*s, p),
            Isometry::Translation(a, b) => [p[0] + a, p[1] + b, p[2]],
            Isometry::Inversion => scale(1.0 / dot(p, p), p),
            Isometry::ReflectY => [p[0], -p[1], p[2]],
            Isometry::EndMap(zi) => {
                let q = scale(1.0 / dot(p, p), p);
                [q[0] + zi.re, q[1] + zi.im, q[2]]
            }
            Isometry::Compose(v) => v.iter().fold(p, |acc, i| i.apply_raw(acc)),
        }
    }

    pub fn apply(&self, p: HPoint) -> HPoint {
        let q = self.apply_raw(p.to_array());
        HPoint { x: q[0], y: q[1], z: q[2] }
    }

    /// Differential at p applied to the tangent vector v.
    pub fn push(&self, p: HPoint, v: Vec3) -> Vec3 {
        self.push_raw(p.to_array(), v)
    }

    fn push_raw(&self, p: Vec3, v: Vec3) -> Vec3 {
        match self {
            Isometry::Rotation(xi) => {
                let (s, c) = xi.sin_cos();
                [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
            }
            Isometry::Dilation(s) => scale(*s, v),
            Isometry::Translation(..) => v,
            Isometry::Inversion | Isometry::EndMap(_) => {
                let r2 = dot(p, p);
                sub(scale(1.0 / r2, v), scale(2.0 * dot(p, v) / (r2 * r2), p))
            }
            Isometry::ReflectY => [v[0], -v[1], v[2]],
            Isometry::Compose(list) => {
                let mut q = p;
                let mut w = v;
                for i in list {
                    w = i.push_raw(q, w);
                    q = i.apply_raw(q);
                }
                w
            }
        }
    }
}

pub fn apply_isometry(iso: &Isometry, p: HPoint) -> HPoint {
    iso.apply(p)
}

pub fn boundary_action(iso: &Isometry, w: BoundaryPoint) -> BoundaryPoint {
    use BoundaryPoint::*;
    match iso {
        Isometry::Rotation(xi) => match w {
            Finite(v) => Finite(v * Complex64::from_polar(1.0, *xi)),
            Infinity => Infinity,
        },
        Isometry::Dilation(s) => match w {
            Finite(v) => Finite(v * *s),
            Infinity => Infinity,
        },
        Isometry::Translation(a, b) => match w {
            Finite(v) => Finite(v + Complex64::new(*a, *b)),
            Infinity => Infinity,
        },
        Isometry::Inversion => invert_boundary(w),
        Isometry::ReflectY => match w {
            Finite(v) => Finite(v.conj()),
            Infinity => Infinity,
        },
        Isometry::EndMap(zi) => match invert_boundary(w) {
            Finite(v) => Finite(v + zi),
            Infinity => Infinity,
        },
        Isometry::Compose(list) => list.iter().fold(w, |acc, i| boundary_action(i, acc)),
    }
}

/// Horofunction centred at `center`: −log z for ∞; for a finite centre the
/// conjugate of −log z by the end map, normalised to vanish at (center, 1).
pub fn horofunction(center: BoundaryPoint, p: HPoint) -> f64 {
    match center {
        BoundaryPoint::Infinity => -p.z.ln(),
        BoundaryPoint::Finite(w) => {
            let dx = p.x - w.re;
            let dy = p.y - w.im;
            ((dx * dx + dy * dy + p.z * p.z) / p.z).ln()
        }
    }
}

/// α_∞ = −(1/2z²) dx∧dy evaluated on (v1, v2) at p.
fn alpha_infinity(p: Vec3, v1: Vec3, v2: Vec3) -> f64 {
    -(v1[0] * v2[1] - v1[1] * v2[0]) / (2.0 * p[2] * p[2])
}

/// Horospherical primitive of the volume form centred at `center`, obtained by
/// pulling α_∞ back through an orientation-preserving isometry sending the
/// centre to ∞ (so that dα equals the volume form for every centre).
pub fn horospherical_primitive(center: BoundaryPoint, p: HPoint, v1: Vec3, v2: Vec3) -> f64 {
    match center {
        BoundaryPoint::Infinity => alpha_infinity(p.to_array(), v1, v2),
        BoundaryPoint::Finite(_) => {
            let m = Isometry::sending_to_infinity(center);
            alpha_infinity(m.apply(p).to_array(), m.push(p, v1), m.push(p, v2))
        }
    }
}

const E: [Vec3; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Components (xy, xz, yz) of a 2-form given as a function of position.
fn components<F: Fn(Vec3, Vec3, Vec3) -> f64>(form: &F, p: Vec3) -> [f64; 3] {
    [form(p, E[0], E[1]), form(p, E[0], E[2]), form(p, E[1], E[2])]
}

/// Pointwise g-norm of the horospherical primitive (bounded by 1/2).
pub fn primitive_norm(center: BoundaryPoint, p: HPoint) -> f64 {
    let f = |q: Vec3, a: Vec3, b: Vec3| horospherical_primitive(center, HPoint { x: q[0], y: q[1], z: q[2] }, a, b);
    let c = components(&f, p.to_array());
    let s = p.z * p.z;
    (c.iter().map(|v| (v * s).powi(2)).sum::<f64>()).sqrt()
}

/// Coefficient of dx∧dy∧dz in dα_center at p, by central differences.
pub fn primitive_exterior_derivative(center: BoundaryPoint, p: HPoint, step: f64) -> f64 {
    let f = |q: Vec3, a: Vec3, b: Vec3| horospherical_primitive(center, HPoint { x: q[0], y: q[1], z: q[2] }, a, b);
    let q = p.to_array();
    let d = |axis: usize, comp: usize| {
        let mut a = q;
        let mut b = q;
        a[axis] += step;
        b[axis] -= step;
        (components(&f, a)[comp] - components(&f, b)[comp]) / (2.0 * step)
    };
    // dα(e_x, e_y, e_z) = ∂_x α_yz − ∂_y α_xz + ∂_z α_xy.
    d(0, 2) - d(1, 1) + d(2, 0)
}

/// Compares α_∞ − α_0 with the exact form (1/2) d log(z²/ρ²) ∧ dθ
/// = −d(log cosh(r) dθ), where r is the distance to the vertical geodesic
/// through 0, cosh r = ρ/z and θ is the polar angle. Returns the g-norm of the
/// difference of the two 2-forms (central differences with the given step).
pub fn primitive_difference_check(p: HPoint, step: f64) -> Result<f64> {
    let rho_h2 = p.x * p.x + p.y * p.y;
    if rho_h2 < 1e-24 {
        return Err(Error::SingularCoordinates("angle θ is undefined on the axis x = y = 0".into()));
    }
    let zero = BoundaryPoint::Finite(Complex64::new(0.0, 0.0));
    let diff = |q: Vec3, a: Vec3, b: Vec3| {
        let h = HPoint { x: q[0], y: q[1], z: q[2] };
        horospherical_primitive(BoundaryPoint::Infinity, h, a, b) - horospherical_primitive(zero, h, a, b)
    };
    // β = −log(cosh r) dθ.
    let beta = |q: Vec3| -> Vec3 {
        let r2 = q[0] * q[0] + q[1] * q[1];
        let f = -0.5 * (dot(q, q) / (q[2] * q[2])).ln();
        [-f * q[1] / r2, f * q[0] / r2, 0.0]
    };
    let q = p.to_array();
    let partial = |axis: usize, comp: usize| {
        let mut a = q;
        let mut b = q;
        a[axis] += step;
        b[axis] -= step;
        (beta(a)[comp] - beta(b)[comp]) / (2.0 * step)
    };
    let dbeta = [
        partial(0, 1) - partial(1, 0),
        partial(0, 2) - partial(2, 0),
        partial(1, 2) - partial(2, 1),
    ];
    let exact = components(&diff, q);
    let s = p.z * p.z;
    Ok((0..3).map(|i| ((exact[i] - dbeta[i]) * s).powi(2)).sum::<f64>().sqrt())
}
