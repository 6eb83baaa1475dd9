//! Finite-difference stencils on uniform grids.

/// Fornberg's algorithm: weights of derivatives `0..=max_deriv` at `x0`
/// for the given nodes. Returns `w[d][s]`.
pub fn fornberg(x0: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for d in (1..=mn).rev() {
                    c[d][i] = c1 * (d as f64 * c[d - 1][i - 1] - c5 * c[d][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for d in (1..=mn).rev() {
                c[d][j] = (c4 * c[d][j] - d as f64 * c[d - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// One row of a first/second derivative stencil: the node window starts at
/// `start` and has `d1.len()` points.
#[derive(Clone, Debug)]
pub struct StencilRow {
    pub start: usize,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// First and second derivative operators along a uniform grid of `n` nodes
/// with spacing `h`. Interior rows use the centered `order + 1` point
/// stencil; rows near the ends use the `order + 3` nearest nodes, one more
/// than needed to keep the second derivative at the same order, which cuts
/// the one-sided error constants by roughly an order of magnitude.
#[derive(Clone, Debug)]
pub struct UniformStencil {
    pub n: usize,
    pub h: f64,
    pub order: usize,
    pub rows: Vec<StencilRow>,
}

impl UniformStencil {
    pub fn new(n: usize, h: f64, order: usize) -> Self {
        assert!(order.is_multiple_of(2) && order >= 2, "stencil order must be even");
        let half = order / 2;
        let edge = order + 3;
        assert!(n >= edge, "too few nodes for the stencil");
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            let (start, len) = if j >= half && j + half < n {
                (j - half, order + 1)
            } else if j < half {
                (0, edge)
            } else {
                (n - edge, edge)
            };
            // Offsets in units of h keep the weights independent of roundoff in y_j.
            let nodes: Vec<f64> = (0..len).map(|s| (start + s) as f64 - j as f64).collect();
            let w = fornberg(0.0, &nodes, 2);
            rows.push(StencilRow {
                start,
                d1: w[1].iter().map(|v| v / h).collect(),
                d2: w[2].iter().map(|v| v / (h * h)).collect(),
            });
        }
        Self { n, h, order, rows }
    }

    /// Lower and upper bandwidth of the derivative matrices.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (j, r) in self.rows.iter().enumerate() {
            kl = kl.max(j - r.start);
            ku = ku.max(r.start + r.d1.len() - 1 - j);
        }
        (kl, ku)
    }

    pub fn d1(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.d1.iter().enumerate().map(|(s, w)| w * f[r.start + s]).sum())
            .collect()
    }

    pub fn d2(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.d2.iter().enumerate().map(|(s, w)| w * f[r.start + s]).sum())
            .collect()
    }

    /// Apply the first derivative along the slow index of a field stored as
    /// `n` rows of `width` values.
    pub fn d1_rows(&self, field: &[f64], width: usize) -> Vec<f64> {
        self.apply_rows(field, width, false)
    }

    pub fn d2_rows(&self, field: &[f64], width: usize) -> Vec<f64> {
        self.apply_rows(field, width, true)
    }

    fn apply_rows(&self, field: &[f64], width: usize, second: bool) -> Vec<f64> {
        let mut out = vec![0.0; self.n * width];
        for (j, r) in self.rows.iter().enumerate() {
            let w = if second { &r.d2 } else { &r.d1 };
            let dst = &mut out[j * width..(j + 1) * width];
            for (s, ws) in w.iter().enumerate() {
                let src = &field[(r.start + s) * width..(r.start + s + 1) * width];
                for (d, v) in dst.iter_mut().zip(src) {
                    *d += ws * v;
                }
            }
        }
        out
    }
}

/// Lagrange interpolation of uniformly sampled data at an arbitrary point,
/// using the `npts` nodes nearest to `t` (in units of the spacing from node 0).
pub fn lagrange_uniform(values: &[f64], h: f64, t: f64, npts: usize) -> f64 {
    let n = values.len();
    let npts = npts.min(n);
    let s = t / h;
    let centre = s.floor() as isize - (npts as isize - 1) / 2;
    let start = centre.clamp(0, (n - npts) as isize) as usize;
    let nodes: Vec<f64> = (0..npts).map(|q| (start + q) as f64).collect();
    let w = fornberg(s, &nodes, 0);
    w[0].iter().enumerate().map(|(q, wq)| wq * values[start + q]).sum()
}
