//! Gauss–Legendre rules and exponentially weighted product integration on
//! uniform grids.

use super::stencil::fornberg;
use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Integrate `f` over [a, b] with `panels` composite Gauss–Legendre panels of `order` points.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in xs.iter().zip(&ws) {
            s += w * f(mid + 0.5 * h * x);
        }
    }
    s * 0.5 * h
}

/// Number of interpolation nodes used per panel.
pub const PANEL_POINTS: usize = 6;

/// Start of the interpolation window for panel [j, j+1] on a grid of n nodes.
pub fn panel_window(j: usize, n: usize) -> usize {
    (j as isize - 2).clamp(0, (n - PANEL_POINTS) as isize) as usize
}

/// Weights for ∫_{y_j}^{y_{j+1}} e^{-a(y - y_j)} f(y) dy ("decay from the left
/// node") and ∫ e^{-a(y_{j+1} - y)} f(y) dy ("decay from the right node"), with f
/// replaced by its Lagrange interpolant through the window nodes. `offset` is
/// window start minus j.
#[derive(Clone, Debug)]
pub struct PanelWeights {
    pub from_left: [f64; PANEL_POINTS],
    pub from_right: [f64; PANEL_POINTS],
}

impl PanelWeights {
    pub fn new(a: f64, h: f64, offset: isize) -> Self {
        let (gx, gw) = gauss_legendre(16);
        // Subdivide so that the exponential varies by at most e over each sub-panel.
        let sub = ((a * h).ceil() as usize).max(1);
        let nodes: Vec<f64> = (0..PANEL_POINTS).map(|s| (offset + s as isize) as f64).collect();
        let mut from_left = [0.0; PANEL_POINTS];
        let mut from_right = [0.0; PANEL_POINTS];
        for q in 0..sub {
            let t0 = q as f64 / sub as f64;
            let dt = 1.0 / sub as f64;
            for (x, w) in gx.iter().zip(&gw) {
                let t = t0 + 0.5 * dt * (x + 1.0);
                let ww = 0.5 * dt * w * h;
                let l = fornberg(t, &nodes, 0);
                let el = (-a * h * t).exp();
                let er = (-a * h * (1.0 - t)).exp();
                for s in 0..PANEL_POINTS {
                    from_left[s] += ww * el * l[0][s];
                    from_right[s] += ww * er * l[0][s];
                }
            }
        }
        Self { from_left, from_right }
    }
}

/// Panel weights for every panel type of an n-node grid, keyed by window offset.
#[derive(Clone, Debug)]
pub struct PanelTable {
    pub n: usize,
    pub h: f64,
    pub decay: f64,
    weights: Vec<(isize, PanelWeights)>,
}

impl PanelTable {
    pub fn new(a: f64, h: f64, n: usize) -> Self {
        let mut weights: Vec<(isize, PanelWeights)> = Vec::new();
        for j in 0..n - 1 {
            let off = panel_window(j, n) as isize - j as isize;
            if !weights.iter().any(|(o, _)| *o == off) {
                weights.push((off, PanelWeights::new(a, h, off)));
            }
        }
        Self { n, h, decay: (-a * h).exp(), weights }
    }

    pub fn panel(&self, j: usize) -> (usize, &PanelWeights) {
        let start = panel_window(j, self.n);
        let off = start as isize - j as isize;
        let w = &self.weights.iter().find(|(o, _)| *o == off).expect("panel type").1;
        (start, w)
    }
}

/// Cumulative integral F(y_j) = ∫_0^{y_j} f on a uniform grid (6-point panels).
pub fn cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let table = PanelTable::new(0.0, h, n);
    let mut out = vec![0.0; n];
    for j in 0..n - 1 {
        let (s0, w) = table.panel(j);
        let inc: f64 = (0..PANEL_POINTS).map(|s| w.from_left[s] * f[s0 + s]).sum();
        out[j + 1] = out[j] + inc;
    }
    out
}
