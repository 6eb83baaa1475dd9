//! Index semigroups, fixed-rate extraction of asymptotic series
//! u ~ Σ a_{λ,μ} e^{iλx} e^{−μy}, radius and centroid, and series algebra.

use crate::error::{Error, Result};
use crate::grid::{check_k, EndFunction};
use crate::numerics::fit::decay_exponent;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Rates closer than this at the same wavenumber are the same element.
pub const MERGE_TOL: f64 = 1e-9;
/// Rates closer than this cannot be separated by regression.
pub const COLLISION_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ELEMENTS: usize = 10_000;

/// Index pair (λ, μ) with λ = n/m stored through the integer n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub n: i64,
    pub mu: f64,
}

impl IndexPair {
    pub fn lambda(&self, m: u32) -> f64 {
        self.n as f64 / m as f64
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexSemigroup {
    pub m: u32,
    pub k: f64,
    pub cutoff: f64,
    /// Sorted by (μ, n).
    pub elements: Vec<IndexPair>,
}

/// Rate of the generator with integer index n: √(n²k + m²(1−k))/m.
pub fn generator_rate(m: u32, k: f64, n: i64) -> f64 {
    let mf = m as f64;
    if n.unsigned_abs() == m as u64 {
        // kλ² + 1 − k = 1 exactly at λ = ±1.
        return 1.0;
    }
    ((n * n) as f64 * k + mf * mf * (1.0 - k)).sqrt() / mf
}

pub fn build_semigroup(m: u32, k: f64, cutoff: f64) -> Result<IndexSemigroup> {
    build_semigroup_bounded(m, k, cutoff, DEFAULT_MAX_ELEMENTS)
}

pub fn build_semigroup_bounded(m: u32, k: f64, cutoff: f64, max_elements: usize) -> Result<IndexSemigroup> {
    check_k(k)?;
    if m == 0 {
        return Err(Error::Domain("winding order must be positive".into()));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::Domain(format!("cutoff {cutoff} must be positive")));
    }
    let mut gens = Vec::new();
    let mut n = 0i64;
    // Generator rates grow with |n|, so stop at the first one above the cutoff.
    loop {
        let mu = generator_rate(m, k, n);
        if mu >= cutoff {
            break;
        }
        gens.push(IndexPair { n, mu });
        if n > 0 {
            gens.push(IndexPair { n: -n, mu });
        }
        n += 1;
        if gens.len() > max_elements {
            return Err(Error::Cutoff(max_elements));
        }
    }
    let mut elems: Vec<IndexPair> = Vec::new();
    let mut queue: VecDeque<IndexPair> = VecDeque::new();
    let insert = |p: IndexPair, elems: &mut Vec<IndexPair>, queue: &mut VecDeque<IndexPair>| -> Result<()> {
        if elems.iter().any(|e| e.n == p.n && (e.mu - p.mu).abs() < MERGE_TOL) {
            return Ok(());
        }
        elems.push(p);
        queue.push_back(p);
        if elems.len() > max_elements {
            return Err(Error::Cutoff(max_elements));
        }
        Ok(())
    };
    for g in &gens {
        insert(*g, &mut elems, &mut queue)?;
    }
    while let Some(p) = queue.pop_front() {
        for g in &gens {
            let s = IndexPair { n: p.n + g.n, mu: p.mu + g.mu };
            if s.mu < cutoff {
                insert(s, &mut elems, &mut queue)?;
            }
        }
    }
    elems.sort_by(|a, b| a.mu.partial_cmp(&b.mu).unwrap().then(a.n.cmp(&b.n)));
    Ok(IndexSemigroup { m, k, cutoff, elements: elems })
}

impl IndexSemigroup {
    pub fn contains(&self, n: i64, mu: f64) -> bool {
        self.elements.iter().any(|e| e.n == n && (e.mu - mu).abs() < MERGE_TOL)
    }

    /// Rates at integer index n, ascending.
    pub fn rates(&self, n: i64) -> Vec<f64> {
        self.elements.iter().filter(|e| e.n == n).map(|e| e.mu).collect()
    }

    pub fn indices(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.elements.iter().map(|e| e.n).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub index: IndexPair,
    pub amplitude: Complex64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticSeries {
    pub m: u32,
    pub k: f64,
    pub cutoff: f64,
    pub terms: Vec<SeriesTerm>,
    /// Fitted decay exponent of the remainder after subtracting all terms.
    pub remainder_rate: Option<f64>,
    /// Largest condition number met in the regressions.
    pub condition: f64,
}

impl AsymptoticSeries {
    pub fn zero(m: u32, k: f64, cutoff: f64) -> Self {
        Self { m, k, cutoff, terms: Vec::new(), remainder_rate: None, condition: 1.0 }
    }

    pub fn amplitude(&self, n: i64, mu: f64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.index.n == n && (t.index.mu - mu).abs() < MERGE_TOL)
            .map(|t| t.amplitude)
            .sum()
    }

    /// Σ a e^{iλx} e^{−μy}.
    pub fn evaluate(&self, x: f64, y: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.amplitude * Complex64::from_polar((-t.index.mu * y).exp(), t.index.lambda(self.m) * x))
            .sum()
    }

    /// Termwise ∂_x^p ∂_y^q.
    pub fn differentiate(&self, p: u32, q: u32) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            let lam = t.index.lambda(self.m);
            t.amplitude *= Complex64::new(0.0, lam).powu(p) * (-t.index.mu).powi(q as i32);
        }
        out.remainder_rate = None;
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.cutoff = self.cutoff.min(other.cutoff);
        for t in &other.terms {
            out.push(t.index, t.amplitude);
        }
        out.terms.retain(|t| t.index.mu < out.cutoff);
        out.remainder_rate = None;
        Ok(out)
    }

    fn push(&mut self, index: IndexPair, amp: Complex64) {
        match self.terms.iter_mut().find(|t| t.index.n == index.n && (t.index.mu - index.mu).abs() < MERGE_TOL) {
            Some(t) => t.amplitude += amp,
            None => self.terms.push(SeriesTerm { index, amplitude: amp }),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.m != other.m || (self.k - other.k).abs() > 1e-15 {
            return Err(Error::Mismatch);
        }
        Ok(())
    }

    fn sort(&mut self) {
        self.terms
            .sort_by(|a, b| a.index.mu.partial_cmp(&b.index.mu).unwrap().then(a.index.n.cmp(&b.index.n)));
    }

    /// Largest |a_{−λ,μ} − conj(a_{λ,μ})|.
    pub fn reality_defect(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| (self.amplitude(-t.index.n, t.index.mu) - t.amplitude.conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Formal product; the result is valid below min(ω₁ + √(1−k), ω₂ + √(1−k), ω₁ + ω₂).
pub fn series_product(s1: &AsymptoticSeries, s2: &AsymptoticSeries) -> Result<AsymptoticSeries> {
    s1.check_compatible(s2)?;
    let a = (1.0 - s1.k).sqrt();
    let cutoff = (s1.cutoff + a).min(s2.cutoff + a).min(s1.cutoff + s2.cutoff);
    let mut out = AsymptoticSeries::zero(s1.m, s1.k, cutoff);
    for t1 in &s1.terms {
        for t2 in &s2.terms {
            let idx = IndexPair { n: t1.index.n + t2.index.n, mu: t1.index.mu + t2.index.mu };
            if idx.mu < cutoff {
                out.push(idx, t1.amplitude * t2.amplitude);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Fit windows for extraction, as fractions of the height Y.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo_frac: f64,
    /// Distance kept from the top boundary.
    pub top_margin: f64,
    /// Window for the remainder-rate fit.
    pub remainder_lo_frac: f64,
    pub remainder_hi_frac: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { lo_frac: 0.5, top_margin: 1.0, remainder_lo_frac: 0.2, remainder_hi_frac: 0.45 }
    }
}

/// Fixed-rate least squares for every Fourier mode with semigroup elements.
pub fn extract_series(end: &EndFunction, sg: &IndexSemigroup, window: FitWindow) -> Result<AsymptoticSeries> {
    let g = &end.grid;
    if sg.m != g.m || (sg.k - end.k).abs() > 1e-15 {
        return Err(Error::Mismatch);
    }
    let ys = g.ys();
    let y_lo = window.lo_frac * g.y_max;
    let y_hi = g.y_max - window.top_margin;
    let rows: Vec<usize> = (0..g.ny).filter(|&j| ys[j] >= y_lo && ys[j] <= y_hi).collect();
    if rows.len() < 4 {
        return Err(Error::Grid("fit window holds too few rows".into()));
    }
    let modes = g.row_modes(&end.values);
    let mut series = AsymptoticSeries::zero(sg.m, sg.k, sg.cutoff);
    let mut cond_max: f64 = 1.0;
    for n in sg.indices() {
        if n.unsigned_abs() as usize >= g.nx / 2 {
            return Err(Error::Grid(format!("mode {n} is beyond the Nyquist limit")));
        }
        let slot = g.spectral.slot(n);
        let mut rates = sg.rates(n);
        // Merge rates regression cannot tell apart.
        let mut merged: Vec<f64> = Vec::new();
        for r in rates.drain(..) {
            match merged.last() {
                Some(prev) if (r - prev).abs() < COLLISION_TOL => {
                    log::warn!("rate collision at index {n}: {prev} and {r}");
                }
                _ => merged.push(r),
            }
        }
        let basis = DMatrix::from_fn(rows.len(), merged.len(), |i, c| (-merged[c] * (ys[rows[i]] - y_lo)).exp());
        let svd = basis.clone().svd(true, true);
        let sv = &svd.singular_values;
        let cond = sv.max() / sv.min();
        cond_max = cond_max.max(cond);
        if cond > 1e12 {
            log::warn!("ill-conditioned fit at index {n}: condition number {cond:e}");
        }
        let re = DVector::from_fn(rows.len(), |i, _| modes[rows[i]][slot].re);
        let im = DVector::from_fn(rows.len(), |i, _| modes[rows[i]][slot].im);
        let eps = 1e-15 * sv.max();
        let cre = svd.solve(&re, eps).map_err(|e| Error::Grid(e.to_string()))?;
        let cim = svd.solve(&im, eps).map_err(|e| Error::Grid(e.to_string()))?;
        for (c, mu) in merged.iter().enumerate() {
            let shift = (mu * y_lo).exp();
            let amp = Complex64::new(cre[c], cim[c]) * shift;
            series.terms.push(SeriesTerm { index: IndexPair { n, mu: *mu }, amplitude: amp });
        }
    }
    series.sort();
    series.condition = cond_max;
    series.remainder_rate = remainder_rate(end, &series, window);
    Ok(series)
}

/// Sup over each slice of |u − series| and its fitted decay exponent on the remainder window.
pub fn remainder_profile(end: &EndFunction, series: &AsymptoticSeries) -> Vec<f64> {
    let g = &end.grid;
    (0..g.ny)
        .map(|j| {
            let y = g.y(j);
            (0..g.nx).map(|i| (end.at(i, j) - series.evaluate(g.x(i), y).re).abs()).fold(0.0, f64::max)
        })
        .collect()
}

fn remainder_rate(end: &EndFunction, series: &AsymptoticSeries, w: FitWindow) -> Option<f64> {
    let g = &end.grid;
    let prof = remainder_profile(end, series);
    let (lo, hi) = (w.remainder_lo_frac * g.y_max, w.remainder_hi_frac * g.y_max);
    let (ys, vs): (Vec<f64>, Vec<f64>) =
        (0..g.ny).filter(|&j| g.y(j) >= lo && g.y(j) <= hi).map(|j| (g.y(j), prof[j])).unzip();
    decay_exponent(&ys, &vs).map(|(b, _)| b)
}

/// r = a_{(0, √(1−k))} and c = c₁ + i c₂ with (c₁, c₂) = (a₊ + a₋, i(a₊ − a₋)), a_± = a_{(±1, 1)}.
pub fn radius_centroid(series: &AsymptoticSeries) -> Result<(f64, Complex64)> {
    let a = (1.0 - series.k).sqrt();
    let r = series.amplitude(0, a);
    if r.im.abs() > 1e-10 {
        log::warn!("radius has imaginary part {:e}", r.im);
    }
    if !(r.re > 0.0) {
        return Err(Error::DegenerateEnd(r.re));
    }
    let m = series.m as i64;
    let ap = series.amplitude(m, 1.0);
    let am = series.amplitude(-m, 1.0);
    let c1 = (ap + am).re;
    let c2 = (Complex64::i() * (ap - am)).re;
    Ok((r.re, Complex64::new(c1, c2)))
}

/// ∫_{mS¹} (a cos x + b sin x) u(x, y_j) dx by the periodic trapezoid rule.
pub fn centroid_integral(end: &EndFunction, j: usize, a: f64, b: f64) -> f64 {
    let g = &end.grid;
    let dx = 2.0 * std::f64::consts::PI * g.m as f64 / g.nx as f64;
    (0..g.nx).map(|i| (a * g.x(i).cos() + b * g.x(i).sin()) * end.at(i, j)).sum::<f64>() * dx
}

/// a_{(±1,1)}[u + u_xx] = 0 and a_{(±1,1)}[u + u_y] = 0 for the termwise derivatives.
pub fn centroid_free_check(series: &AsymptoticSeries) -> bool {
    let pxx = series.add(&series.differentiate(2, 0));
    let py = series.add(&series.differentiate(0, 1));
    let m = series.m as i64;
    match (pxx, py) {
        (Ok(a), Ok(b)) => [m, -m].iter().all(|&n| a.amplitude(n, 1.0).norm() == 0.0 && b.amplitude(n, 1.0).norm() == 0.0),
        _ => false,
    }
}
