//! Darboux chart around the vertical geodesic and pointwise geometry of the
//! immersion Φ[u](x, y) = e^y (u cos x − u_x sin x, u sin x + u_x cos x, 1).
//!
//! Shorthand used throughout: P = u + u_xx, Q = u_xy + u_x, W = u_yy + u_y,
//! T = u + u_y, C = 1/√(1 + T²), S = T C.
//!
//! The shape operator is A = ∇N with N the unit normal below, so that
//! H = tr A and K = det A. Its entries, and hence H and K, were derived
//! directly from the immersion and cross-checked against a finite-difference
//! covariant derivative of N and against exact horospheres and totally
//! geodesic planes. The variants evaluated from the printed matrix formula
//! are kept in [`printed`] for comparison; near the vertical geodesic they
//! agree with the geometric ones to linear order in the jet but not beyond.

use crate::error::{Error, Result};
use crate::halfspace::{cross, dot, scale, sub, HPoint, Isometry, Vec3};
use crate::numerics::dual::Scalar;

/// Default immersion threshold on |u + u_xx|.
pub const EPS_IMMERSION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct JetState {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uxy: f64,
    pub uyy: f64,
}

impl JetState {
    /// Jet of the constant function u ≡ c.
    pub fn constant(c: f64, x: f64, y: f64) -> Self {
        Self { x, y, u: c, ..Default::default() }
    }

    pub fn t(&self) -> f64 {
        self.u + self.uy
    }
    pub fn theta(&self) -> f64 {
        self.t().atan()
    }
    pub fn c(&self) -> f64 {
        1.0 / (1.0 + self.t() * self.t()).sqrt()
    }
    pub fn s(&self) -> f64 {
        self.t() * self.c()
    }
    pub fn p(&self) -> f64 {
        self.u + self.uxx
    }
    pub fn q(&self) -> f64 {
        self.uxy + self.ux
    }
    pub fn w(&self) -> f64 {
        self.uyy + self.uy
    }
}

/// Φ(x, y, u, v, t): base point and unit fibre vector (6 components).
pub fn darboux_chart(x: f64, y: f64, u: f64, v: f64, t: f64) -> [f64; 6] {
    let e = y.exp();
    let tt = t + v;
    let c = 1.0 / (1.0 + tt * tt).sqrt();
    let s = tt * c;
    let (sx, cx) = x.sin_cos();
    [
        e * t * cx - e * u * sx,
        e * t * sx + e * u * cx,
        e,
        -c * e * cx,
        -c * e * sx,
        s * e,
    ]
}

/// Finite-difference check of Φ*λ = −C (dt − u dx − v dy), where λ is the
/// Liouville form (1/z²)(U dX + V dY + W dZ). Uses 4th-order central
/// differences with the given step; returns the largest component error.
pub fn contact_pullback_check(x: f64, y: f64, u: f64, v: f64, t: f64, step: f64) -> f64 {
    let q0 = [x, y, u, v, t];
    let f0 = darboux_chart(x, y, u, v, t);
    let tt = t + v;
    let c = 1.0 / (1.0 + tt * tt).sqrt();
    let exact = [c * u, c * v, 0.0, 0.0, -c];
    let mut err: f64 = 0.0;
    for (k, ex) in exact.iter().enumerate() {
        let at = |d: f64| {
            let mut q = q0;
            q[k] += d;
            darboux_chart(q[0], q[1], q[2], q[3], q[4])
        };
        let (p1, m1, p2, m2) = (at(step), at(-step), at(2.0 * step), at(-2.0 * step));
        let mut comp = 0.0;
        for i in 0..3 {
            let d = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * step);
            comp += f0[3 + i] * d;
        }
        comp /= f0[2] * f0[2];
        err = err.max((comp - ex).abs());
    }
    err
}

/// Residuals of the three equivariance identities of the chart under the
/// rotation R[ξ], the dilation by e^η and the translation T[a, b].
pub fn chart_equivariance_residual(q: [f64; 5], xi: f64, eta: f64, a: f64, b: f64) -> [f64; 3] {
    let [x, y, u, v, t] = q;
    let base = darboux_chart(x, y, u, v, t);
    let split = |f: [f64; 6]| ([f[0], f[1], f[2]], [f[3], f[4], f[5]]);
    let (p, w) = split(base);
    let hp = HPoint { x: p[0], y: p[1], z: p[2] };
    let diff = |f: [f64; 6], p2: Vec3, w2: Vec3| {
        let (fp, fw) = split(f);
        let d: Vec3 = sub(fp, p2);
        let e: Vec3 = sub(fw, w2);
        dot(d, d).sqrt().max(dot(e, e).sqrt())
    };
    let rot = Isometry::Rotation(xi);
    let r = diff(darboux_chart(x + xi, y, u, v, t), rot.apply(hp).to_array(), rot.push(hp, w));
    let dil = Isometry::Dilation(eta.exp());
    let d = diff(darboux_chart(x, y + eta, u, v, t), dil.apply(hp).to_array(), dil.push(hp, w));
    let e = (-y).exp();
    let (sx, cx) = x.sin_cos();
    let sigma = a * e * cx + b * e * sx;
    let sigma_x = e * (-a * sx + b * cx);
    let sigma_y = -sigma;
    let tr = Isometry::Translation(a, b);
    let tt = diff(
        darboux_chart(x, y, u + sigma_x, v + sigma_y, t + sigma),
        tr.apply(hp).to_array(),
        tr.push(hp, w),
    );
    [r, d, tt]
}

/// Frame over the immersion at one point: position, unit normal N, unit
/// conormal ν along the horizontal slice and the horizontal tangent 𝕋.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FramePack {
    pub position: HPoint,
    pub normal: Vec3,
    pub conormal: Vec3,
    pub tangent: Vec3,
}

pub fn immerse(j: &JetState) -> FramePack {
    let e = j.y.exp();
    let (sx, cx) = j.x.sin_cos();
    let (c, s) = (j.c(), j.s());
    FramePack {
        position: HPoint { x: e * (j.u * cx - j.ux * sx), y: e * (j.u * sx + j.ux * cx), z: e },
        normal: [e * c * cx, e * c * sx, -e * s],
        conormal: [e * s * cx, e * s * sx, e * c],
        tangent: [e * sx, -e * cx, 0.0],
    }
}

/// Φ_*∂x and Φ_*∂y.
pub fn tangent_vectors(j: &JetState) -> (Vec3, Vec3) {
    let e = j.y.exp();
    let (sx, cx) = j.x.sin_cos();
    let (p, q, t) = (j.p(), j.q(), j.t());
    (
        [-e * p * sx, e * p * cx, 0.0],
        [e * (t * cx - q * sx), e * (t * sx + q * cx), e],
    )
}

/// Hyperbolic cross product of two tangent vectors at height z.
pub fn cross_h(z: f64, a: Vec3, b: Vec3) -> Vec3 {
    scale(1.0 / z, cross(a, b))
}

/// Largest violation among: g-orthonormality of (N, ν, 𝕋), 𝕋 = N ∧_h ν,
/// the identities for ‖Φ‖², ⟨Φ, N⟩, ⟨Φ, ν⟩, ⟨Φ, 𝕋⟩ (Φ viewed as a vector at
/// its own base point), and ν = C Φ_y − C (Q/P) Φ_x.
pub fn frame_identity_residual(j: &JetState) -> f64 {
    let f = immerse(j);
    let p = f.position;
    let g = |a: Vec3, b: Vec3| dot(a, b) / (p.z * p.z);
    let pv = p.to_array();
    let vs = [f.normal, f.conormal, f.tangent];
    let mut r: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let target = if a == b { 1.0 } else { 0.0 };
            r = r.max((g(vs[a], vs[b]) - target).abs());
        }
    }
    let t = cross_h(p.z, f.normal, f.conormal);
    r = r.max(dot(sub(t, f.tangent), sub(t, f.tangent)).sqrt() / p.z);
    let (c, s) = (j.c(), j.s());
    r = r.max((g(pv, pv) - (1.0 + j.u * j.u + j.ux * j.ux)).abs());
    r = r.max((g(pv, f.normal) + c * j.uy).abs());
    r = r.max((g(pv, f.conormal) - (c + s * j.u)).abs());
    r = r.max((g(pv, f.tangent) + j.ux).abs());
    if j.p().abs() > EPS_IMMERSION {
        let (px, py) = tangent_vectors(j);
        let nu = sub(scale(c, py), scale(c * j.q() / j.p(), px));
        let d = sub(nu, f.conormal);
        r = r.max(dot(d, d).sqrt() / p.z);
    }
    r
}

pub type Mat2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvaturePack {
    pub first_form: Mat2,
    /// dArea = area_density dx dy.
    pub area_density: f64,
    /// dl = length_density dx along horizontal slices.
    pub length_density: f64,
    /// Shape operator in the basis (∂x, ∂y), A^row_col.
    pub shape_operator: Mat2,
    pub mean: f64,
    pub extrinsic: f64,
    pub kappa_y: f64,
}

pub fn first_form(j: &JetState) -> Mat2 {
    let (p, q, c) = (j.p(), j.q(), j.c());
    [[p * p, p * q], [p * q, q * q + 1.0 / (c * c)]]
}

/// Second fundamental form ⟨∇_{Φ_i} N, Φ_j⟩_g.
pub fn second_form(j: &JetState) -> Mat2 {
    let (p, q, w, c, s) = (j.p(), j.q(), j.w(), j.c(), j.s());
    [[p * c + s * p * p, s * p * q], [s * p * q, s * (q * q + 1.0 / (c * c)) - c * w]]
}

fn shape_from_jet(j: &JetState) -> Mat2 {
    let (p, q, w, c, s) = (j.p(), j.q(), j.w(), j.c(), j.s());
    let c3 = c * c * c;
    [[s + c / p + c3 * q * q / p, c3 * q * w / p], [-c3 * q, s - c3 * w]]
}

/// Extrinsic curvature K = S² + SC/P + C⁴ (T Q² − W − T P W)/P, generic over
/// the scalar type so that dual numbers give exact linearisations.
pub fn extrinsic_curvature<T: Scalar>(u: T, ux: T, uy: T, uxx: T, uxy: T, uyy: T) -> T {
    let one = T::cst(1.0);
    let p = u + uxx;
    let q = uxy + ux;
    let w = uyy + uy;
    let t = u + uy;
    let c = one / (one + t * t).sqrt();
    let s = t * c;
    let c2 = c * c;
    s * s + (s * c + c2 * c2 * (t * q * q - w - t * p * w)) / p
}

/// Mean curvature H = C/P + 2S − C³ (P W − Q²)/P.
pub fn mean_curvature<T: Scalar>(u: T, ux: T, uy: T, uxx: T, uxy: T, uyy: T) -> T {
    let one = T::cst(1.0);
    let p = u + uxx;
    let q = uxy + ux;
    let w = uyy + uy;
    let t = u + uy;
    let c = one / (one + t * t).sqrt();
    let s = t * c;
    c / p + T::cst(2.0) * s - c * c * c * (p * w - q * q) / p
}

/// The value of W = u_yy + u_y for which K = k, given the remaining jet.
pub fn w_for_curvature<T: Scalar>(k: f64, u: T, ux: T, uy: T, uxx: T, uxy: T) -> T {
    let one = T::cst(1.0);
    let p = u + uxx;
    let q = uxy + ux;
    let t = u + uy;
    let c = one / (one + t * t).sqrt();
    let s = t * c;
    let c2 = c * c;
    (s * s * p + s * c + c2 * c * s * q * q - T::cst(k) * p) / (c2 * c2 * (one + t * p))
}

pub fn curvature_pack_with(j: &JetState, eps: f64) -> Result<CurvaturePack> {
    let p = j.p();
    if !(p.abs() >= eps) {
        return Err(Error::DegeneratePoint { value: p.abs() });
    }
    let c = j.c();
    let a = shape_from_jet(j);
    Ok(CurvaturePack {
        first_form: first_form(j),
        area_density: p / c,
        length_density: p,
        shape_operator: a,
        mean: mean_curvature(j.u, j.ux, j.uy, j.uxx, j.uxy, j.uyy),
        extrinsic: extrinsic_curvature(j.u, j.ux, j.uy, j.uxx, j.uxy, j.uyy),
        kappa_y: c * (j.uy - j.uxx) / p,
    })
}

pub fn curvature_pack(j: &JetState) -> Result<CurvaturePack> {
    curvature_pack_with(j, EPS_IMMERSION)
}

/// Formulas evaluated exactly as printed in the source derivation (matrix
/// expression for A built from the jet matrices, and its trace/determinant
/// as displayed). Kept for comparison only.
pub mod printed {
    use super::*;

    /// −S·I + M⁻¹ diag(−C, C) N with M = [[P, Q], [0, 1]], N = C⁻²[[C², 0], [Q, W]].
    pub fn shape_operator(j: &JetState) -> Mat2 {
        let (p, q, w, c, s) = (j.p(), j.q(), j.w(), j.c(), j.s());
        [[-s - (c * c + q * q) / (c * p), -q * w / (c * p)], [q / c, -s + w / c]]
    }

    pub fn mean_curvature(j: &JetState) -> f64 {
        let (p, q, w, c, s) = (j.p(), j.q(), j.w(), j.c(), j.s());
        c / p + 2.0 * s - (p * w - q * q) / (c * p)
    }

    pub fn extrinsic_curvature(j: &JetState) -> f64 {
        let (p, q, w, c, s, t) = (j.p(), j.q(), j.w(), j.c(), j.s(), j.t());
        s * s + (s * c + t * q * q - t * p * w - w) / p
    }
}

/// Levi-Civita connection term Γ(a, b) of δ/z² at height z.
pub fn christoffel(z: f64, a: Vec3, b: Vec3) -> Vec3 {
    let ab = dot(a, b);
    [
        -(a[0] * b[2] + b[0] * a[2]) / z,
        -(a[1] * b[2] + b[1] * a[2]) / z,
        (ab - 2.0 * a[2] * b[2]) / z,
    ]
}

pub fn inv2(m: Mat2) -> Mat2 {
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

pub fn mul2(a: Mat2, b: Mat2) -> Mat2 {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Shape operator from a central finite-difference covariant derivative of
/// the unit normal of the surface given by `jets`, at (x, y).
pub fn shape_operator_fd<F: Fn(f64, f64) -> JetState>(jets: &F, x: f64, y: f64, step: f64) -> Result<Mat2> {
    let j = jets(x, y);
    if j.p().abs() < EPS_IMMERSION {
        return Err(Error::DegeneratePoint { value: j.p().abs() });
    }
    let f = immerse(&j);
    let z = f.position.z;
    let (px, py) = tangent_vectors(&j);
    let dn = |dx: f64, dy: f64| {
        let a = immerse(&jets(x + dx, y + dy)).normal;
        let b = immerse(&jets(x - dx, y - dy)).normal;
        scale(0.5 / step, sub(a, b))
    };
    let cov = |d: Vec3, t: Vec3| {
        let g = christoffel(z, t, f.normal);
        [d[0] + g[0], d[1] + g[1], d[2] + g[2]]
    };
    let nx = cov(dn(step, 0.0), px);
    let ny = cov(dn(0.0, step), py);
    let g = |a: Vec3, b: Vec3| dot(a, b) / (z * z);
    let b = [[g(nx, px), g(ny, px)], [g(nx, py), g(ny, py)]];
    Ok(mul2(inv2(first_form(&j)), b))
}

/// Largest entry of A_fd − A, with A from [`curvature_pack`].
pub fn shape_operator_fd_check<F: Fn(f64, f64) -> JetState>(jets: &F, x: f64, y: f64, step: f64) -> Result<f64> {
    let afd = shape_operator_fd(jets, x, y, step)?;
    let a = curvature_pack(&jets(x, y))?.shape_operator;
    let mut r: f64 = 0.0;
    for i in 0..2 {
        for k in 0..2 {
            r = r.max((afd[i][k] - a[i][k]).abs());
        }
    }
    Ok(r)
}

/// Jets of the radial function r e^{−μ y} (not a solution; a test surface).
pub fn radial_mode_jet(r: f64, mu: f64) -> impl Fn(f64, f64) -> JetState {
    move |x, y| {
        let u = r * (-mu * y).exp();
        JetState { x, y, u, ux: 0.0, uy: -mu * u, uxx: 0.0, uxy: 0.0, uyy: mu * mu * u }
    }
}

/// Jets of a smooth non-symmetric test function
/// u = r e^{−μy} + e^{−y}(a cos x + b sin x) + d e^{−νy} cos 2x.
pub fn mixed_mode_jet(r: f64, mu: f64, a: f64, b: f64, d: f64, nu: f64) -> impl Fn(f64, f64) -> JetState {
    move |x, y| {
        let e0 = r * (-mu * y).exp();
        let e1 = (-y).exp();
        let e2 = d * (-nu * y).exp();
        let (s1, c1) = x.sin_cos();
        let (s2, c2) = (2.0 * x).sin_cos();
        let l1 = a * c1 + b * s1;
        let l1x = -a * s1 + b * c1;
        JetState {
            x,
            y,
            u: e0 + e1 * l1 + e2 * c2,
            ux: e1 * l1x - 2.0 * e2 * s2,
            uy: -mu * e0 - e1 * l1 - nu * e2 * c2,
            uxx: -e1 * l1 - 4.0 * e2 * c2,
            uxy: -e1 * l1x + 2.0 * nu * e2 * s2,
            uyy: mu * mu * e0 + e1 * l1 + nu * nu * e2 * c2,
        }
    }
}
