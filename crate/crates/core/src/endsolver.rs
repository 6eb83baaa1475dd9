//! Newton–Krylov solver for the end equation K[u] = k on mS¹ × [0, Y], a
//! radial shooting oracle, and the Jacobi operator.
//!
//! Discrete system: row 0 is pinned to the boundary data, rows 1..ny−2 impose
//! K[u] − k = 0, and the top row imposes u_n' = −μ_n u_n for every Fourier
//! mode, μ_n = √(kλ_n² + 1 − k).

use crate::darboux::{extrinsic_curvature, w_for_curvature, Mat2};
use crate::error::{Error, Result};
use crate::grid::{check_k, EndFunction, EndGrid, JetField};
use crate::numerics::banded::BandedLu;
use crate::numerics::dopri::{self, Tolerance};
use crate::numerics::dual::Dual;
use crate::numerics::gmres::gmres;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Decay rate of the Fourier mode with wavenumber λ.
pub fn mode_rate(k: f64, lambda: f64) -> f64 {
    (k * lambda * lambda + 1.0 - k).sqrt()
}

/// K[u] − k at every node.
pub fn residual_field(end: &EndFunction) -> Result<Vec<f64>> {
    residual_from_jets(end.k, &end.grid, &end.jets())
}

fn residual_from_jets(k: f64, g: &EndGrid, j: &JetField) -> Result<Vec<f64>> {
    check_immersed(g, j)?;
    Ok((0..j.u.len())
        .into_par_iter()
        .map(|q| extrinsic_curvature(j.u[q], j.ux[q], j.uy[q], j.uxx[q], j.uxy[q], j.uyy[q]) - k)
        .collect())
}

fn check_immersed(g: &EndGrid, j: &JetField) -> Result<()> {
    for q in 0..j.u.len() {
        let p = j.u[q] + j.uxx[q];
        if !(p.abs() >= crate::darboux::EPS_IMMERSION) {
            return Err(Error::DegenerateImmersion { i: q % g.nx, j: q / g.nx, value: p.abs() });
        }
    }
    Ok(())
}

/// Directional derivative of K at u along v (exact for the discrete jets).
pub fn linearised_curvature(end: &EndFunction, v: &[f64]) -> Result<Vec<f64>> {
    let ju = end.jets();
    check_immersed(&end.grid, &ju)?;
    let jv = end.grid.jets(v);
    Ok(dual_curvature(&ju, &jv))
}

fn dual_curvature(ju: &JetField, jv: &JetField) -> Vec<f64> {
    (0..ju.u.len())
        .into_par_iter()
        .map(|q| {
            let d = |a: &Vec<f64>, b: &Vec<f64>| Dual::new(a[q], b[q]);
            extrinsic_curvature(
                d(&ju.u, &jv.u),
                d(&ju.ux, &jv.ux),
                d(&ju.uy, &jv.uy),
                d(&ju.uxx, &jv.uxx),
                d(&ju.uxy, &jv.uxy),
                d(&ju.uyy, &jv.uyy),
            )
            .d
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub final_residual: f64,
    pub krylov_iterations: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct NewtonConfig {
    pub k: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Bound on sup |v|; defaults to [`smallness_threshold`].
    pub smallness: Option<f64>,
}

impl NewtonConfig {
    pub fn new(k: f64) -> Self {
        Self { k, tol: 1e-10, max_iter: 20, smallness: None }
    }
}

/// Default bound on boundary data: 0.2·min(√(1−k), 1), measured against a
/// unit reference radius.
pub fn smallness_threshold(k: f64) -> f64 {
    0.2 * (1.0 - k).sqrt().min(1.0)
}

/// Mode-wise decaying extension of boundary data with the exact linear rates.
pub fn initial_guess(k: f64, grid: &EndGrid, v: &[f64]) -> Vec<f64> {
    crate::greens::decaying_extension(grid, v, |s| mode_rate(k, grid.spectral.wavenumber(s)))
}

struct System<'a> {
    k: f64,
    g: &'a EndGrid,
    v: &'a [f64],
    rates: Vec<f64>,
    lus: Vec<Option<Arc<BandedLu>>>,
}

impl<'a> System<'a> {
    fn new(k: f64, g: &'a EndGrid, v: &'a [f64]) -> Result<Self> {
        let rates: Vec<f64> = (0..g.nx).map(|s| mode_rate(k, g.spectral.wavenumber(s))).collect();
        // Modes ±n share a matrix.
        let mut lus: Vec<Option<Arc<BandedLu>>> = vec![None; g.nx];
        for s in 0..g.nx {
            let twin = g.spectral.slot(-g.spectral.index(s));
            if twin < s {
                lus[s] = lus[twin].clone();
                continue;
            }
            let lu = Self::factor_mode(k, g, rates[s])
                .ok_or_else(|| Error::Divergence("singular mode preconditioner".into()))?;
            lus[s] = Some(Arc::new(lu));
        }
        Ok(Self { k, g, v, rates, lus })
    }

    /// Mode operator on rows 1..ny−1: ∂²_y − μ² inside, ∂_y + μ on the top row.
    fn factor_mode(_k: f64, g: &EndGrid, mu: f64) -> Option<BandedLu> {
        let n = g.ny - 1;
        let st = &g.stencil;
        let (kl, ku) = st.bandwidths();
        BandedLu::factor(n, kl, ku, |r, c| {
            let row = &st.rows[r + 1];
            let node = c + 1;
            let mut val = 0.0;
            let top = r + 1 == g.ny - 1;
            if node >= row.start && node < row.start + row.d1.len() {
                let s = node - row.start;
                val = if top { row.d1[s] } else { row.d2[s] };
            }
            if r == c {
                val += if top { mu } else { -mu * mu };
            }
            Complex64::new(val, 0.0)
        })
    }

    fn full(&self, x: &[f64], boundary: bool) -> Vec<f64> {
        let nx = self.g.nx;
        let mut u = vec![0.0; self.g.len()];
        if boundary {
            u[..nx].copy_from_slice(self.v);
        }
        u[nx..].copy_from_slice(x);
        u
    }

    fn robin(&self, u: &[f64]) -> Vec<f64> {
        let g = self.g;
        let nx = g.nx;
        let top = g.ny - 1;
        let row = &g.stencil.rows[top];
        let mut d = vec![0.0; nx];
        for (s, w) in row.d1.iter().enumerate() {
            let r = &u[(row.start + s) * nx..(row.start + s + 1) * nx];
            for (a, b) in d.iter_mut().zip(r) {
                *a += w * b;
            }
        }
        let c = g.spectral.forward(&u[top * nx..]);
        let m: Vec<Complex64> = c.iter().zip(&self.rates).map(|(c, r)| c * r).collect();
        let mu = g.spectral.inverse(&m);
        d.iter().zip(&mu).map(|(a, b)| a + b).collect()
    }

    /// Residual over the unknown rows, and the jets of the full field.
    fn residual(&self, x: &[f64]) -> Result<(Vec<f64>, JetField)> {
        let u = self.full(x, true);
        let jets = self.g.jets(&u);
        let kres = residual_from_jets(self.k, self.g, &jets)?;
        let nx = self.g.nx;
        let mut r = kres[nx..].to_vec();
        let top = (self.g.ny - 2) * nx;
        r[top..].copy_from_slice(&self.robin(&u));
        Ok((r, jets))
    }

    fn jvp(&self, jets: &JetField, dx: &[f64]) -> Vec<f64> {
        let du = self.full(dx, false);
        let jd = self.g.jets(&du);
        let nx = self.g.nx;
        let mut r = dual_curvature(jets, &jd)[nx..].to_vec();
        let top = (self.g.ny - 2) * nx;
        r[top..].copy_from_slice(&self.robin(&du));
        r
    }

    /// Approximate inverse: scale curvature rows by −P, then invert the
    /// constant-coefficient linear operator mode by mode.
    fn precondition(&self, jets: &JetField, r: &[f64]) -> Vec<f64> {
        let g = self.g;
        let nx = g.nx;
        let rows = g.ny - 1;
        let scaled: Vec<f64> = r
            .iter()
            .enumerate()
            .map(|(q, v)| {
                if q >= (rows - 1) * nx {
                    *v
                } else {
                    let p = jets.u[q + nx] + jets.uxx[q + nx];
                    -p * v
                }
            })
            .collect();
        let modes: Vec<Vec<Complex64>> = scaled.par_chunks(nx).map(|row| g.spectral.forward(row)).collect();
        let cols: Vec<Vec<Complex64>> = (0..nx)
            .into_par_iter()
            .map(|s| {
                let mut b: Vec<Complex64> = modes.iter().map(|m| m[s]).collect();
                self.lus[s].as_ref().expect("factored").solve(&mut b);
                b
            })
            .collect();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); nx]; rows];
        for (s, c) in cols.iter().enumerate() {
            for (j, v) in c.iter().enumerate() {
                out[j][s] = *v;
            }
        }
        g.from_row_modes(&out)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}

/// Solve K[u] = k with u(·, 0) = v on the given grid.
pub fn newton_solve(cfg: &NewtonConfig, grid: Arc<EndGrid>, v: &[f64]) -> Result<(EndFunction, SolveReport)> {
    let k = cfg.k;
    check_k(k)?;
    let g = &*grid;
    if v.len() != g.nx {
        return Err(Error::Grid(format!("boundary data has {} samples, grid has {}", v.len(), g.nx)));
    }
    let vs = sup(v);
    let thr = cfg.smallness.unwrap_or_else(|| smallness_threshold(k));
    if vs > thr {
        return Err(Error::SmallnessViolated { sup: vs, threshold: thr });
    }
    let d2 = g.spectral.derivative(v, 2);
    for (i, (a, b)) in v.iter().zip(&d2).enumerate() {
        if !(a + b > 0.0) {
            return Err(Error::DegenerateImmersion { i, j: 0, value: (a + b).abs() });
        }
    }
    let sys = System::new(k, g, v)?;
    let nx = g.nx;
    let mut x = initial_guess(k, g, v)[nx..].to_vec();
    let (mut r, mut jets) = sys.residual(&x)?;
    let mut res = sup(&r);
    let mut history = vec![res];
    let mut krylov = Vec::new();
    let mut it = 0;
    while res > cfg.tol && it < cfg.max_iter {
        it += 1;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let rtol = (0.1 * res).clamp(1e-13, 1e-4);
        let (dx, out) = gmres(|d| sys.jvp(&jets, d), |q| sys.precondition(&jets, q), &rhs, rtol, 40, 400);
        krylov.push(out.iterations);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=10 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            if let Ok((rt, jt)) = sys.residual(&trial) {
                let rs = sup(&rt);
                if rs < res {
                    accepted = Some((trial, rt, jt, rs));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((xt, rt, jt, rs)) => {
                x = xt;
                r = rt;
                jets = jt;
                res = rs;
                history.push(res);
            }
            None => return Err(Error::Divergence(format!("line search failed at residual {res:e}"))),
        }
    }
    let converged = res <= cfg.tol;
    let report = SolveReport {
        iterations: it,
        residual_history: history,
        converged,
        final_residual: res,
        krylov_iterations: krylov,
    };
    if !converged {
        return Err(Error::NotConverged { iterations: it, residual: res });
    }
    let end = EndFunction::new(k, grid.clone(), sys.full(&x, true))?;
    Ok((end, report))
}

/// Sampled radial profile u(y) with its derivative.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub k: f64,
    pub ys: Vec<f64>,
    pub u: Vec<f64>,
    pub uy: Vec<f64>,
    /// Amplitude r of the asymptotic term r e^{−√(1−k) y}.
    pub radius: f64,
}

/// u'' = W(u, u') − u' with W fixed by K = k for rotationally symmetric u.
fn radial_rhs(k: f64) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    move |_, s: &[f64]| {
        let w = w_for_curvature(k, s[0], 0.0, s[1], 0.0, 0.0);
        vec![s[1], w - s[1]]
    }
}

fn shoot_back(k: f64, amp: f64, ys: &[f64], y_top: f64) -> Option<Vec<Vec<f64>>> {
    let mu = (1.0 - k).sqrt();
    let u_top = amp * (-mu * y_top).exp();
    let outs: Vec<f64> = ys.iter().rev().cloned().collect();
    let tol = Tolerance { rtol: 1e-13, atol: 1e-300 };
    let mut r = dopri::integrate(radial_rhs(k), y_top, &[u_top, -mu * u_top], &outs, tol)?;
    r.reverse();
    Some(r)
}

/// Decaying radial solution with u(0) = u0, sampled at `ys` (ascending, from 0).
/// The amplitude of the linear tail at the top is found by bisection on the
/// backward-integrated value at 0, which selects the decaying solution.
pub fn ode_radial_solve(k: f64, u0: f64, ys: &[f64]) -> Result<RadialProfile> {
    check_k(k)?;
    if !(u0 > 0.0) {
        return Err(Error::Domain(format!("initial value {u0} must be positive")));
    }
    if ys.is_empty() || ys[0] != 0.0 {
        return Err(Error::Domain("sample points must start at 0".into()));
    }
    let y_top = *ys.last().unwrap();
    let at0 = |amp: f64| shoot_back(k, amp, &[0.0], y_top).map(|r| r[0][0]);
    let (mut lo, mut hi) = (u0 * 0.25, u0 * 4.0);
    let (flo, fhi) = (at0(lo), at0(hi));
    match (flo, fhi) {
        (Some(a), Some(b)) if a < u0 && b > u0 => {}
        _ => return Err(Error::Bracket(format!("no decaying solution bracketed for u0 = {u0}"))),
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match at0(mid) {
            Some(v) if v < u0 => lo = mid,
            Some(_) => hi = mid,
            None => return Err(Error::Bracket("integration failed".into())),
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let amp = 0.5 * (lo + hi);
    let r = shoot_back(k, amp, ys, y_top).ok_or_else(|| Error::Bracket("integration failed".into()))?;
    Ok(RadialProfile {
        k,
        ys: ys.to_vec(),
        u: r.iter().map(|s| s[0]).collect(),
        uy: r.iter().map(|s| s[1]).collect(),
        radius: amp,
    })
}

/// Covariant Hessian and first form of the immersion on the grid.
pub struct MetricFields {
    pub first: Vec<Mat2>,
    pub shape: Vec<Mat2>,
    pub mean: Vec<f64>,
}

fn d_x(g: &EndGrid, f: &[f64]) -> Vec<f64> {
    f.par_chunks(g.nx).flat_map_iter(|r| g.spectral.derivative(r, 1)).collect()
}

fn d_y(g: &EndGrid, f: &[f64]) -> Vec<f64> {
    g.stencil.d1_rows(f, g.nx)
}

pub fn metric_fields(end: &EndFunction) -> Result<MetricFields> {
    let g = &end.grid;
    let j = end.jets();
    check_immersed(g, &j)?;
    let packs: Vec<_> = (0..g.len())
        .into_par_iter()
        .map(|q| crate::darboux::curvature_pack(&j.at(g, q % g.nx, q / g.nx)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricFields {
        first: packs.iter().map(|p| p.first_form).collect(),
        shape: packs.iter().map(|p| p.shape_operator).collect(),
        mean: packs.iter().map(|p| p.mean).collect(),
    })
}

/// Christoffel symbols Γ^l_ij of a metric field given entrywise.
fn christoffels(g: &EndGrid, metric: &[Mat2]) -> Vec<[[[f64; 2]; 2]; 2]> {
    let comp = |a: usize, b: usize| metric.iter().map(|m| m[a][b]).collect::<Vec<f64>>();
    let (e, f, gg) = (comp(0, 0), comp(0, 1), comp(1, 1));
    let d = [[d_x(g, &e), d_x(g, &f), d_x(g, &gg)], [d_y(g, &e), d_y(g, &f), d_y(g, &gg)]];
    (0..metric.len())
        .map(|q| {
            let m = metric[q];
            let inv = crate::darboux::inv2(m);
            // ∂_c g_ab
            let dg = |c: usize, a: usize, b: usize| d[c][a + b][q];
            let mut gam = [[[0.0; 2]; 2]; 2];
            for l in 0..2 {
                for i in 0..2 {
                    for jj in 0..2 {
                        let mut s = 0.0;
                        for mm in 0..2 {
                            s += inv[l][mm] * (dg(i, jj, mm) + dg(jj, i, mm) - dg(mm, i, jj));
                        }
                        gam[l][i][jj] = 0.5 * s;
                    }
                }
            }
            gam
        })
        .collect()
}

/// Jv = (1/k) H (1−k) v − Tr(A⁻¹ Hess v), Hess taken in the induced metric.
pub fn jacobi_apply(end: &EndFunction, v: &[f64]) -> Result<Vec<f64>> {
    let g = &end.grid;
    let mf = metric_fields(end)?;
    let gam = christoffels(g, &mf.first);
    let jv = g.jets(v);
    let k = end.k;
    Ok((0..g.len())
        .into_par_iter()
        .map(|q| {
            let dv = [jv.ux[q], jv.uy[q]];
            let dd = [[jv.uxx[q], jv.uxy[q]], [jv.uxy[q], jv.uyy[q]]];
            let mut hess = [[0.0; 2]; 2];
            for i in 0..2 {
                for jj in 0..2 {
                    hess[i][jj] = dd[i][jj] - gam[q][0][i][jj] * dv[0] - gam[q][1][i][jj] * dv[1];
                }
            }
            let hsharp = crate::darboux::mul2(crate::darboux::inv2(mf.first[q]), hess);
            let t = crate::darboux::mul2(crate::darboux::inv2(mf.shape[q]), hsharp);
            mf.mean[q] * (1.0 - k) * v[q] / k - (t[0][0] + t[1][1])
        })
        .collect())
}

/// Laplace–Beltrami operator of ĝ = 𝕀((Id + A²/k)·, ·).
pub fn sasaki_laplacian(end: &EndFunction, v: &[f64]) -> Result<Vec<f64>> {
    let g = &end.grid;
    let mf = metric_fields(end)?;
    let k = end.k;
    let ghat: Vec<Mat2> = mf
        .first
        .iter()
        .zip(&mf.shape)
        .map(|(i, a)| {
            let a2 = crate::darboux::mul2(*a, *a);
            let ia2 = crate::darboux::mul2(*i, a2);
            let mut r = *i;
            for p in 0..2 {
                for c in 0..2 {
                    r[p][c] += ia2[p][c] / k;
                }
            }
            // Symmetrise against roundoff.
            let off = 0.5 * (r[0][1] + r[1][0]);
            r[0][1] = off;
            r[1][0] = off;
            r
        })
        .collect();
    let jv = g.jets(v);
    let n = g.len();
    let mut fx = vec![0.0; n];
    let mut fy = vec![0.0; n];
    let mut root = vec![0.0; n];
    for q in 0..n {
        let m = ghat[q];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let sq = det.sqrt();
        let inv = crate::darboux::inv2(m);
        root[q] = sq;
        fx[q] = sq * (inv[0][0] * jv.ux[q] + inv[0][1] * jv.uy[q]);
        fy[q] = sq * (inv[1][0] * jv.ux[q] + inv[1][1] * jv.uy[q]);
    }
    let dfx = d_x(g, &fx);
    let dfy = d_y(g, &fy);
    Ok((0..n).map(|q| (dfx[q] + dfy[q]) / root[q]).collect())
}

/// Gaussian curvature of the induced metric by the Brioschi formula, with
/// spectral x- and finite-difference y-derivatives of its coefficients.
/// G = 1 + Q² + T² is passed as its offset from 1: far up the end E ~ P² is
/// tiny and the rounding of G would otherwise dominate G_xx·(EG − F²)/(EG − F²)².
pub fn intrinsic_curvature(end: &EndFunction) -> Result<Vec<f64>> {
    let g = &end.grid;
    let mf = metric_fields(end)?;
    let jets = end.jets();
    let shifted: Vec<Mat2> = mf
        .first
        .iter()
        .enumerate()
        .map(|(q, m)| {
            let (qq, t) = (jets.uxy[q] + jets.ux[q], end.values[q] + jets.uy[q]);
            [m[0], [m[1][0], qq * qq + t * t]]
        })
        .collect();
    Ok(brioschi_offset(g, &shifted, 1.0))
}

pub fn brioschi(g: &EndGrid, metric: &[Mat2]) -> Vec<f64> {
    brioschi_offset(g, metric, 0.0)
}

/// Brioschi curvature of the metric whose G coefficient is `metric[1][1] + offset`.
pub fn brioschi_offset(g: &EndGrid, metric: &[Mat2], offset: f64) -> Vec<f64> {
    let comp = |a: usize, b: usize| metric.iter().map(|m| m[a][b]).collect::<Vec<f64>>();
    let (e, f, g1) = (comp(0, 0), comp(0, 1), comp(1, 1));
    let (ex, ey) = (d_x(g, &e), d_y(g, &e));
    let (fx, fy) = (d_x(g, &f), d_y(g, &f));
    let (gx, gy) = (d_x(g, &g1), d_y(g, &g1));
    let gg: Vec<f64> = g1.iter().map(|v| v + offset).collect();
    let eyy = d_y(g, &ey);
    let fxy = d_y(g, &fx);
    let gxx = d_x(g, &gx);
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    (0..metric.len())
        .map(|q| {
            let a = det3([
                [-0.5 * eyy[q] + fxy[q] - 0.5 * gxx[q], 0.5 * ex[q], fx[q] - 0.5 * ey[q]],
                [fy[q] - 0.5 * gx[q], e[q], f[q]],
                [0.5 * gy[q], f[q], gg[q]],
            ]);
            let b = det3([[0.0, 0.5 * ey[q], 0.5 * gx[q]], [0.5 * ey[q], e[q], f[q]], [0.5 * gx[q], f[q], gg[q]]]);
            let d = e[q] * gg[q] - f[q] * f[q];
            (a - b) / (d * d)
        })
        .collect()
}

/// Residual of (k/H) J v = (1 − k) v − Δ̂ v at every node.
pub fn jacobi_identity_residual(end: &EndFunction, v: &[f64]) -> Result<Vec<f64>> {
    let j = jacobi_apply(end, v)?;
    let lap = sasaki_laplacian(end, v)?;
    let mf = metric_fields(end)?;
    let k = end.k;
    Ok((0..v.len()).map(|q| k / mf.mean[q] * j[q] - ((1.0 - k) * v[q] - lap[q])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_profile_rates() {
        for (k, rate) in [(0.5, 0.5f64.sqrt()), (0.75, 0.5)] {
            let ys: Vec<f64> = (0..=200).map(|j| j as f64 * 0.1).collect();
            let p = ode_radial_solve(k, 0.05, &ys).unwrap();
            assert!((p.u[0] - 0.05).abs() < 1e-13);
            let (b, _) = crate::numerics::fit::decay_exponent(&ys[100..], &p.u[100..]).unwrap();
            assert!((b - rate).abs() < 0.01 * rate, "k={k} b={b}");
        }
        assert!(ode_radial_solve(0.5, 0.0, &[0.0, 1.0]).is_err());
    }

    fn radial_end(k: f64, u0: f64) -> (EndFunction, RadialProfile) {
        let g = Arc::new(EndGrid::default_for(k, 1).unwrap());
        let p = ode_radial_solve(k, u0, &g.ys()).unwrap();
        let vals = g.sample(|_, _| 0.0);
        let mut vals = vals;
        for j in 0..g.ny {
            for i in 0..g.nx {
                vals[j * g.nx + i] = p.u[j];
            }
        }
        (EndFunction::new(k, g, vals).unwrap(), p)
    }

    #[test]
    fn radial_profile_has_small_residual() {
        let (end, _) = radial_end(0.5, 0.05);
        let r = residual_field(&end).unwrap();
        assert!(sup(&r) < 1e-9, "{:e}", sup(&r));
    }

    #[test]
    fn newton_matches_radial_oracle() {
        let k = 0.5;
        let (oracle, _) = radial_end(k, 0.05);
        let g = oracle.grid.clone();
        let v = vec![0.05; g.nx];
        let (end, rep) = newton_solve(&NewtonConfig::new(k), g.clone(), &v).unwrap();
        assert!(rep.converged);
        let d = end.values.iter().zip(&oracle.values).fold(0.0, |a: f64, (p, q)| a.max((p - q).abs()));
        assert!(d < 1e-8, "{d:e} {:?}", rep);
    }

    #[test]
    fn newton_asymmetric_data() {
        let k = 0.5;
        let g = Arc::new(EndGrid::default_for(k, 1).unwrap());
        let v: Vec<f64> = (0..g.nx).map(|i| 0.05 + 0.02 * g.x(i).cos()).collect();
        let (end, rep) = newton_solve(&NewtonConfig::new(k), g.clone(), &v).unwrap();
        assert!(rep.iterations <= 8 && rep.final_residual < 1e-10, "{rep:?}");
        assert_eq!(end.row(0), &v[..]);
        end.check_convex().unwrap();
    }

    fn small_solved_end(k: f64) -> (EndFunction, SolveReport) {
        let y = 12.0 / (1.0 - k).sqrt();
        let ny = (64.0 * y).ceil() as usize + 1;
        let g = Arc::new(EndGrid::new(1, 32, ny, y).unwrap());
        let v: Vec<f64> = (0..g.nx).map(|i| 0.05 + 0.02 * g.x(i).cos()).collect();
        newton_solve(&NewtonConfig::new(k), g, &v).unwrap()
    }

    fn test_field(g: &EndGrid) -> Vec<f64> {
        g.sample(|x, y| (0.3 + 0.2 * x.sin() + 0.1 * (2.0 * x).cos()) * (-0.5 * y).exp() * (1.0 + 0.3 * y))
    }

    #[test]
    fn newton_converges_quadratically() {
        let (_, rep) = small_solved_end(0.5);
        let h = &rep.residual_history;
        for w in h.windows(2) {
            if w[0] < 1e-3 && w[1] > 1e-10 {
                assert!(w[1] <= 10.0 * w[0] * w[0], "{h:?}");
            }
        }
    }

    #[test]
    fn jacobi_operator_is_the_linearisation() {
        let k = 0.5;
        let (end, _) = small_solved_end(k);
        let g = end.grid.clone();
        // Scaled with u so that t measures the relative size of the perturbation.
        let m = test_field(&g);
        let w: Vec<f64> = end.values.iter().zip(&m).map(|(u, m)| u * m * 5.0).collect();
        let jets = end.jets();
        // Moving u by t w moves the surface normally by t C w.
        let phi: Vec<f64> = (0..g.len())
            .map(|q| {
                let t = jets.u[q] + jets.uy[q];
                w[q] / (1.0 + t * t).sqrt()
            })
            .collect();
        let jphi = jacobi_apply(&end, &phi).unwrap();
        let k0 = residual_field(&end).unwrap();
        let shifted = |t: f64| {
            let vals: Vec<f64> = end.values.iter().zip(&w).map(|(a, b)| a + t * b).collect();
            residual_field(&EndFunction::new(k, g.clone(), vals).unwrap()).unwrap()
        };
        let inner = 4 * g.nx..(g.ny - 4) * g.nx;
        // One-sided differences converge at first order in t (sup over the interior).
        let err = |t: f64, r: &[f64]| {
            inner.clone().fold(0.0, |a: f64, q| a.max(((r[q] - k0[q]) / t - k * jphi[q]).abs()))
        };
        let ratio = err(1e-3, &shifted(1e-3)) / err(1e-4, &shifted(1e-4));
        assert!(ratio > 8.0 && ratio < 12.0, "{ratio}");
        // Richardson extrapolation; smaller steps would be dominated by roundoff
        // from the y-stencils, which amplify it by about 1/h².
        let (t, r1, r2) = (2e-5, shifted(2e-5), shifted(1e-5));
        // Interior rows; near the edges the metric derivatives use one-sided stencils.
        for q in inner.step_by(97) {
            let d1 = (r1[q] - k0[q]) / t;
            let d2 = (r2[q] - k0[q]) / (0.5 * t);
            let rich = 2.0 * d2 - d1;
            let exact = k * jphi[q];
            assert!((rich - exact).abs() < 1e-6 * (1.0 + exact.abs()), "q={q} {rich} {exact}");
        }
        let zero = jacobi_apply(&end, &vec![0.0; g.len()]).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn jacobi_identity_with_sasaki_laplacian() {
        let (end, _) = small_solved_end(0.5);
        let w = test_field(&end.grid);
        let r = jacobi_identity_residual(&end, &w).unwrap();
        assert!(sup(&r) < 1e-5, "{:e}", sup(&r));
    }

    #[test]
    fn solved_end_has_intrinsic_curvature_k_minus_one() {
        let k = 0.5;
        let (end, _) = small_solved_end(k);
        let kint = intrinsic_curvature(&end).unwrap();
        let g = &end.grid;
        // Away from the one-sided stencil rows.
        let lo = 4 * g.nx;
        let hi = (g.ny - 4) * g.nx;
        let err = kint[lo..hi].iter().fold(0.0, |a: f64, v| a.max((v - (k - 1.0)).abs()));
        assert!(err < 1e-5, "{err:e}");
    }

    #[test]
    fn gauss_equation_on_arbitrary_surface() {
        let g = Arc::new(EndGrid::new(1, 64, 401, 4.0).unwrap());
        let f = crate::darboux::mixed_mode_jet(0.3, 0.6, 0.1, -0.05, 0.02, 1.5);
        let jets: Vec<crate::darboux::JetState> = (0..g.len()).map(|q| f(g.x(q % g.nx), g.y(q / g.nx))).collect();
        let metric: Vec<Mat2> = jets.iter().map(crate::darboux::first_form).collect();
        let kint = brioschi(&g, &metric);
        let mut printed_gap: f64 = 0.0;
        for q in (10 * g.nx..(g.ny - 10) * g.nx).step_by(53) {
            let kext = crate::darboux::curvature_pack(&jets[q]).unwrap().extrinsic;
            assert!((kint[q] - (kext - 1.0)).abs() < 1e-6, "q={q} {} {}", kint[q], kext - 1.0);
            let printed = crate::darboux::printed::extrinsic_curvature(&jets[q]);
            printed_gap = printed_gap.max((kint[q] - (printed - 1.0)).abs());
        }
        assert!(printed_gap > 1e-3);
    }

    #[test]
    fn zero_data_is_rejected() {
        let g = Arc::new(EndGrid::new(1, 16, 65, 4.0).unwrap());
        let r = newton_solve(&NewtonConfig::new(0.5), g, &[0.0; 16]);
        assert!(matches!(r, Err(Error::DegenerateImmersion { .. })));
    }

    #[test]
    fn constant_function_has_unit_curvature() {
        let g = Arc::new(EndGrid::new(1, 16, 33, 2.0).unwrap());
        let end = EndFunction { k: 1.0, grid: g.clone(), values: vec![0.3; g.len()] };
        let r = residual_from_jets(end.k, &g, &end.jets()).unwrap();
        // Only roundoff in the y-stencils, whose weights sum to zero in exact arithmetic.
        assert!(sup(&r) < 1e-11, "{:e}", sup(&r));
    }
}
