//! Green's kernels and Dirichlet solution operators for L = κ∂²_x + ∂²_y − a²
//! on the half-cylinder, and a fixed-point solver for semilinear problems.

use crate::error::{Error, Result};
use crate::grid::{EndFunction, EndGrid, JetField};
use crate::numerics::quadrature::{PanelTable, PANEL_POINTS};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Relative tail size above which a truncation warning is raised.
pub const TAIL_WARNING: f64 = 1e-12;

/// K̃_a(y) = −e^{−a|y|}/(2a).
pub fn green1d_kernel(a: f64, y: f64) -> Result<f64> {
    check_mass(a)?;
    Ok(-(-a * y.abs()).exp() / (2.0 * a))
}

fn check_mass(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("mass a = {a} must be positive")))
    }
}

/// Output of a one-dimensional Dirichlet solve.
#[derive(Clone, Debug)]
pub struct Green1d<T> {
    pub values: Vec<T>,
    /// Estimated contribution of (Y, ∞) to the solution, relative to its sup.
    pub tail: f64,
    pub tail_warning: bool,
}

/// Solve w'' − a²w = f on [0, ∞), w(0) = 0, w bounded, for f sampled on a
/// uniform grid of spacing h starting at 0. The part of f beyond the grid is
/// modelled by its fitted exponential decay.
pub fn green1d_dirichlet(a: f64, f: &[f64], h: f64) -> Result<Green1d<f64>> {
    let fc: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let table = panel_table(a, h, f.len())?;
    let g = green1d_complex(&table, a, &fc);
    Ok(Green1d { values: g.values.iter().map(|c| c.re).collect(), tail: g.tail, tail_warning: g.tail_warning })
}

pub fn panel_table(a: f64, h: f64, n: usize) -> Result<PanelTable> {
    check_mass(a)?;
    if n < PANEL_POINTS + 1 {
        return Err(Error::Grid(format!("need at least {} samples", PANEL_POINTS + 1)));
    }
    if !(h > 0.0) {
        return Err(Error::Grid("spacing must be positive".into()));
    }
    Ok(PanelTable::new(a, h, n))
}

/// Complex version of [`green1d_dirichlet`] with a precomputed panel table.
pub fn green1d_complex(table: &PanelTable, a: f64, f: &[Complex64]) -> Green1d<Complex64> {
    let n = f.len();
    let zero = Complex64::new(0.0, 0.0);
    if f.iter().all(|v| *v == zero) {
        return Green1d { values: vec![zero; n], tail: 0.0, tail_warning: false };
    }
    let d = table.decay;
    // Tail ∫_Y^∞ e^{−a(z−Y)} f(z) dz with f continued as f(Y) e^{−ω(z−Y)}.
    let (last, prev) = (f[n - 1], f[n - 2]);
    let h = table.h;
    let omega = if last.norm() > 0.0 && prev.norm() > last.norm() {
        (prev.norm() / last.norm()).ln() / h
    } else {
        0.0
    };
    let b_tail = last / (a + omega);
    let mut big_a = vec![zero; n];
    for j in 0..n - 1 {
        let (s0, w) = table.panel(j);
        let inc: Complex64 = (0..PANEL_POINTS).map(|s| f[s0 + s] * w.from_right[s]).sum();
        big_a[j + 1] = big_a[j] * d + inc;
    }
    let mut big_b = vec![zero; n];
    big_b[n - 1] = b_tail;
    for j in (0..n - 1).rev() {
        let (s0, w) = table.panel(j);
        let inc: Complex64 = (0..PANEL_POINTS).map(|s| f[s0 + s] * w.from_left[s]).sum();
        big_b[j] = big_b[j + 1] * d + inc;
    }
    let b0 = big_b[0];
    let mut values = vec![zero; n];
    let mut e = 1.0;
    for j in 0..n {
        values[j] = -(big_a[j] + big_b[j] - b0 * e) / (2.0 * a);
        e *= d;
    }
    values[0] = zero;
    let sup = values.iter().fold(0.0, |s: f64, v| s.max(v.norm()));
    let tail = if sup > 0.0 { (b_tail.norm() / (2.0 * a)) / sup } else { 0.0 };
    let tail_warning = tail > TAIL_WARNING;
    if tail_warning {
        log::warn!("green1d: truncated tail is {tail:e} of the solution (mass {a})");
    }
    Green1d { values, tail, tail_warning }
}

/// Π_n u = (1/Nx) Σ u(x_i) e^{−i n x_i/m}: the amplitude of e^{inx/m} on a
/// uniform grid over [0, 2πm). On such a grid the phase n x_i/m = 2πni/Nx
/// does not depend on m, which is kept in the signature for clarity.
pub fn fourier_project(samples: &[f64], _m: u32, n: i64) -> Complex64 {
    let nx = samples.len();
    let mut s = Complex64::new(0.0, 0.0);
    for (i, v) in samples.iter().enumerate() {
        let phase = -2.0 * std::f64::consts::PI * (n as f64) * (i as f64) / nx as f64;
        s += Complex64::from_polar(*v, phase);
    }
    s / nx as f64
}

/// Configuration of the two-dimensional operator κ∂²_x + ∂²_y − a².
#[derive(Clone, Debug)]
pub struct GreenConfig {
    pub a: f64,
    /// Coefficient κ of ∂²_x (1 for the isotropic operator).
    pub kx: f64,
    pub grid: Arc<EndGrid>,
}

impl GreenConfig {
    pub fn isotropic(a: f64, grid: Arc<EndGrid>) -> Self {
        Self { a, kx: 1.0, grid }
    }

    /// Operator k∂²_x + ∂²_y − (1−k) of the linearised end equation.
    pub fn end_operator(k: f64, grid: Arc<EndGrid>) -> Self {
        Self { a: (1.0 - k).sqrt(), kx: k, grid }
    }

    /// Mass of the Fourier mode in `slot`.
    pub fn mode_mass(&self, slot: usize) -> f64 {
        let lam = self.grid.spectral.wavenumber(slot);
        (self.a * self.a + self.kx * lam * lam).sqrt()
    }

    fn validate(&self) -> Result<()> {
        check_mass(self.a)?;
        if !(self.kx > 0.0) {
            return Err(Error::Domain(format!("x coefficient {} must be positive", self.kx)));
        }
        Ok(())
    }
}

/// Per-mode panel tables, reused across solves.
#[derive(Clone, Debug)]
pub struct GreenOperator {
    pub cfg: GreenConfig,
    tables: Vec<PanelTable>,
}

impl GreenOperator {
    pub fn new(cfg: GreenConfig) -> Result<Self> {
        cfg.validate()?;
        let g = &cfg.grid;
        let tables = (0..g.nx)
            .into_par_iter()
            .map(|s| panel_table(cfg.mode_mass(s), g.hy, g.ny))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cfg, tables })
    }

    /// Dirichlet solution of L w = f with w = 0 at y = 0; returns the solution
    /// and the largest relative tail estimate over modes.
    pub fn solve(&self, f: &[f64]) -> Result<(Vec<f64>, f64)> {
        let g = &self.cfg.grid;
        if f.len() != g.len() {
            return Err(Error::Grid("source has the wrong size".into()));
        }
        let modes = g.row_modes(f);
        let cols: Vec<(Vec<Complex64>, f64)> = (0..g.nx)
            .into_par_iter()
            .map(|s| {
                let prof: Vec<Complex64> = modes.iter().map(|r| r[s]).collect();
                let r = green1d_complex(&self.tables[s], self.cfg.mode_mass(s), &prof);
                (r.values, r.tail)
            })
            .collect();
        let tail = cols.iter().fold(0.0, |a: f64, c| a.max(c.1));
        let mut out = vec![vec![Complex64::new(0.0, 0.0); g.nx]; g.ny];
        for (s, (col, _)) in cols.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                out[j][s] = *v;
            }
        }
        Ok((g.from_row_modes(&out), tail))
    }

    /// Mode-wise decaying extension Σ v_n e^{inx/m} e^{−a_n y} of boundary data.
    pub fn extension(&self, v: &[f64]) -> Result<Vec<f64>> {
        let g = &self.cfg.grid;
        if v.len() != g.nx {
            return Err(Error::Grid("boundary data has the wrong size".into()));
        }
        Ok(decaying_extension(g, v, |s| self.cfg.mode_mass(s)))
    }
}

pub fn decaying_extension<F: Fn(usize) -> f64 + Sync>(g: &EndGrid, v: &[f64], mass: F) -> Vec<f64> {
    let c = g.spectral.forward(v);
    let modes: Vec<Vec<Complex64>> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let y = g.y(j);
            c.iter().enumerate().map(|(s, cs)| cs * (-mass(s) * y).exp()).collect()
        })
        .collect();
    let mut out = g.from_row_modes(&modes);
    out[..g.nx].copy_from_slice(v);
    out
}

pub fn green2d_dirichlet(cfg: &GreenConfig, f: &[f64]) -> Result<Vec<f64>> {
    Ok(GreenOperator::new(cfg.clone())?.solve(f)?.0)
}

/// Smallness threshold for boundary data of the fixed-point solver.
pub fn picard_threshold(k: f64) -> f64 {
    0.05 * (1.0 - k)
}

#[derive(Clone, Debug)]
pub struct PicardReport {
    pub iterations: usize,
    pub increments: Vec<f64>,
    pub converged: bool,
}

/// Solve L u = G(jets of u), u(·, 0) = v by the iteration
/// u ← E[v] + K_{a,0}[G(u)], where E is the decaying extension.
pub fn picard_solve<G>(
    cfg: &GreenConfig,
    k: f64,
    v: &[f64],
    nonlinearity: G,
    tol: f64,
    max_iter: usize,
    threshold: Option<f64>,
) -> Result<(EndFunction, PicardReport)>
where
    G: Fn(&JetField) -> Vec<f64>,
{
    let sup = v.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
    let thr = threshold.unwrap_or_else(|| picard_threshold(k));
    if sup > thr {
        return Err(Error::SmallnessViolated { sup, threshold: thr });
    }
    let op = GreenOperator::new(cfg.clone())?;
    let g = &cfg.grid;
    let base = op.extension(v)?;
    let mut u = base.clone();
    let mut increments = Vec::new();
    let mut norms = vec![sup_norm(&u)];
    let mut growth = 0;
    for it in 1..=max_iter {
        let src = nonlinearity(&g.jets(&u));
        let (w, _) = op.solve(&src)?;
        let next: Vec<f64> = base.iter().zip(&w).map(|(b, w)| b + w).collect();
        let inc = next.iter().zip(&u).fold(0.0, |a: f64, (p, q)| a.max((p - q).abs()));
        u = next;
        increments.push(inc);
        let norm = sup_norm(&u);
        if !norm.is_finite() {
            return Err(Error::SmallnessViolated { sup, threshold: thr });
        }
        growth = if norm > *norms.last().unwrap() * (1.0 + 1e-12) && inc > tol { growth + 1 } else { 0 };
        norms.push(norm);
        if growth >= 5 {
            return Err(Error::SmallnessViolated { sup, threshold: thr });
        }
        if inc <= tol {
            let end = EndFunction::new(k, g.clone(), u)?;
            return Ok((end, PicardReport { iterations: it, increments, converged: true }));
        }
    }
    Err(Error::NotConverged { iterations: max_iter, residual: *increments.last().unwrap_or(&f64::NAN) })
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}

/// Source term of the end equation in the form k u_xx + u_yy − (1−k) u = G,
/// with u_yy eliminated through K[u] = k.
pub fn end_nonlinearity(k: f64) -> impl Fn(&JetField) -> Vec<f64> {
    move |j: &JetField| {
        (0..j.u.len())
            .into_par_iter()
            .map(|q| {
                let w = crate::darboux::w_for_curvature(k, j.u[q], j.ux[q], j.uy[q], j.uxx[q], j.uxy[q]);
                k * j.uxx[q] + (w - j.uy[q]) - (1.0 - k) * j.u[q]
            })
            .collect()
    }
}
