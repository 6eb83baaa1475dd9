//! Integral geometry of an end: slice lengths and curvatures, fluxes of the
//! Killing fields X_{a,b}, the truncated generalised volume and the
//! end-local renormalised energy.
//!
//! Fluxes are evaluated from the immersion and its frame (Killing field at
//! Φ[u], inner products in the hyperbolic metric), not from expanded
//! formulas; the expansions are checked in the tests instead.

use crate::darboux::{immerse, mean_curvature, JetState};
use crate::error::{Error, Result};
use crate::grid::{EndFunction, EndGrid, JetField};
use crate::halfspace::{dot, HPoint, Vec3};
use crate::numerics::fit::geometric_limit;
use crate::numerics::quadrature::cumulative;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// X_{a,b}(p) = ‖p‖² a̲ − 2⟨p, a̲⟩ p with a̲ = (a, b, 0), the push-forward of
/// the horizontal translation field by the inversion in the unit sphere.
pub fn killing_field(a: f64, b: f64, p: HPoint) -> Vec3 {
    let v = p.to_array();
    let n2 = dot(v, v);
    let pa = v[0] * a + v[1] * b;
    [n2 * a - 2.0 * pa * v[0], n2 * b - 2.0 * pa * v[1], -2.0 * pa * v[2]]
}

/// Nearest grid row to height y; heights off the grid by more than 1e−9 are rejected.
pub fn row_of(g: &EndGrid, y: f64) -> Result<usize> {
    let j = (y / g.hy).round();
    if !(j >= 0.0 && j <= (g.ny - 1) as f64) || (j * g.hy - y).abs() > 1e-9 * y.abs().max(1.0) {
        return Err(Error::Grid(format!("height {y} is not a grid row")));
    }
    Ok(j as usize)
}

fn dx(g: &EndGrid) -> f64 {
    2.0 * PI * g.m as f64 / g.nx as f64
}

fn slice_jets(jets: &JetField, g: &EndGrid, j: usize) -> Result<Vec<JetState>> {
    (0..g.nx)
        .map(|i| {
            let s = jets.at(g, i, j);
            if !(s.p().abs() >= crate::darboux::EPS_IMMERSION) {
                return Err(Error::DegenerateImmersion { i, j, value: s.p().abs() });
            }
            Ok(s)
        })
        .collect()
}

/// Length of the slice Φ_y[u], ∫ (u + u_xx) dx.
pub fn length_profile(end: &EndFunction, y: f64) -> Result<f64> {
    let g = &end.grid;
    let j = row_of(g, y)?;
    let s = slice_jets(&end.jets(), g, j)?;
    Ok(s.iter().map(|s| s.p()).sum::<f64>() * dx(g))
}

/// Geodesic curvature κ_y = C(u_y − u_xx)/P of a slice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaSlice {
    pub samples: Vec<f64>,
    /// Average over x.
    pub mean: f64,
}

pub fn kappa_profile(end: &EndFunction, y: f64) -> Result<KappaSlice> {
    let g = &end.grid;
    let j = row_of(g, y)?;
    let samples: Vec<f64> =
        slice_jets(&end.jets(), g, j)?.iter().map(|s| s.c() * (s.uy - s.uxx) / s.p()).collect();
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(KappaSlice { samples, mean })
}

/// Pointwise Killing inner products ⟨X, N⟩_g and ⟨X, ν⟩_g at Φ[u](x, y).
pub fn killing_products(s: &JetState, a: f64, b: f64) -> (f64, f64) {
    let f = immerse(s);
    let x = killing_field(a, b, f.position);
    let z2 = f.position.z * f.position.z;
    (dot(x, f.normal) / z2, dot(x, f.conormal) / z2)
}

/// Which slice flux to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flux {
    /// ∫ H ⟨X, ν⟩_g dl.
    Conormal,
    /// ∫ ∂_ν ⟨X, ν⟩_g dl.
    Dnu,
    /// ∫ i_X α_∞ along the slice oriented by ∂x.
    Alpha,
}

/// Slice integrals of one flux on every row.
fn flux_rows(end: &EndFunction, jets: &JetField, which: Flux, a: f64, b: f64) -> Result<Vec<f64>> {
    let g = &end.grid;
    let nx = g.nx;
    let h = dx(g);
    match which {
        Flux::Conormal => (0..g.ny)
            .into_par_iter()
            .map(|j| {
                let s = slice_jets(jets, g, j)?;
                Ok(s.iter()
                    .map(|s| {
                        let hm = mean_curvature(s.u, s.ux, s.uy, s.uxx, s.uxy, s.uyy);
                        hm * killing_products(s, a, b).1 * s.p()
                    })
                    .sum::<f64>()
                    * h)
            })
            .collect(),
        Flux::Alpha => (0..g.ny)
            .into_par_iter()
            .map(|j| {
                let s = slice_jets(jets, g, j)?;
                Ok(s.iter()
                    .map(|s| {
                        let f = immerse(s);
                        let x = killing_field(a, b, f.position);
                        let (px, _) = crate::darboux::tangent_vectors(s);
                        -(x[0] * px[1] - x[1] * px[0]) / (2.0 * f.position.z * f.position.z)
                    })
                    .sum::<f64>()
                    * h)
            })
            .collect(),
        Flux::Dnu => {
            let mut f = vec![0.0; g.len()];
            f.par_chunks_mut(nx).enumerate().try_for_each(|(j, row)| -> Result<()> {
                for (i, s) in slice_jets(jets, g, j)?.iter().enumerate() {
                    row[i] = killing_products(s, a, b).1;
                }
                Ok(())
            })?;
            let fy = g.stencil.d1_rows(&f, nx);
            Ok((0..g.ny)
                .into_par_iter()
                .map(|j| {
                    let fx = g.spectral.derivative(&f[j * nx..(j + 1) * nx], 1);
                    (0..nx)
                        .map(|i| {
                            let s = jets.at(g, i, j);
                            // ν = C Φ_y − C (Q/P) Φ_x and dl = P dx.
                            s.c() * (s.p() * fy[j * nx + i] - s.q() * fx[i])
                        })
                        .sum::<f64>()
                        * h
                })
                .collect())
        }
    }
}

/// Slice integrals of one flux on every grid row.
pub fn slice_flux_rows(end: &EndFunction, which: Flux, a: f64, b: f64) -> Result<Vec<f64>> {
    flux_rows(end, &end.jets(), which, a, b)
}

pub fn slice_flux(end: &EndFunction, which: Flux, y: f64, a: f64, b: f64) -> Result<f64> {
    let j = row_of(&end.grid, y)?;
    Ok(flux_rows(end, &end.jets(), which, a, b)?[j])
}

pub fn flux_conormal(end: &EndFunction, y: f64, a: f64, b: f64) -> Result<f64> {
    slice_flux(end, Flux::Conormal, y, a, b)
}

pub fn flux_dnu(end: &EndFunction, y: f64, a: f64, b: f64) -> Result<f64> {
    slice_flux(end, Flux::Dnu, y, a, b)
}

pub fn flux_alpha(end: &EndFunction, y: f64, a: f64, b: f64) -> Result<f64> {
    slice_flux(end, Flux::Alpha, y, a, b)
}

/// ∫_0^Y ∫ ⟨X, N⟩_g dArea at every grid height Y.
pub fn flux_normal_profile(end: &EndFunction, a: f64, b: f64) -> Result<Vec<f64>> {
    let g = &end.grid;
    let jets = end.jets();
    let rows: Vec<f64> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let s = slice_jets(&jets, g, j)?;
            Ok(s.iter().map(|s| killing_products(s, a, b).0 * s.p() / s.c()).sum::<f64>() * dx(g))
        })
        .collect::<Result<_>>()?;
    Ok(cumulative(&rows, g.hy))
}

pub fn flux_normal_cumulative(end: &EndFunction, y_cut: f64, a: f64, b: f64) -> Result<f64> {
    let j = row_of(&end.grid, y_cut)?;
    Ok(flux_normal_profile(end, a, b)?[j])
}

/// Values of a slice quantity at regularly spaced heights with a fitted limit
/// and the decay exponent of (value − limit).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FluxProfile {
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// None when the profile is flat to within its noise floor from the start.
    pub exponent: Option<f64>,
    /// RMS of the log-linear fit behind the exponent.
    pub fit_rms: f64,
}

/// Sampling stride used for profiles: every eighth row.
pub const PROFILE_STRIDE: usize = 8;

impl FluxProfile {
    /// Fit on the leading part of the profile until successive differences
    /// reach the artifact floor; the limit is the geometric extrapolation
    /// from the last sample above the floor.
    pub fn fit(ys: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ys.len() < 8 || ys.len() != values.len() {
            return Err(Error::Grid("flux profile needs at least 8 samples".into()));
        }
        let d: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let upper = d.len() / 2;
        let floor = 10.0 * d[upper..].iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        let end = d.iter().position(|v| v.abs() <= floor).unwrap_or(d.len());
        Ok(match geometric_limit(&ys[..=end], &values[..=end]) {
            Some((limit, beta, rms)) => Self { ys, values, limit, exponent: Some(beta), fit_rms: rms },
            None => {
                let limit = values[end];
                Self { ys, values, limit, exponent: None, fit_rms: 0.0 }
            }
        })
    }

    /// Profile of a slice flux over the whole end.
    pub fn slice(end: &EndFunction, which: Flux, a: f64, b: f64) -> Result<Self> {
        let rows = flux_rows(end, &end.jets(), which, a, b)?;
        Self::sampled(&end.grid, &rows)
    }

    /// Profile of the cumulative normal flux over the whole end.
    pub fn normal(end: &EndFunction, a: f64, b: f64) -> Result<Self> {
        Self::sampled(&end.grid, &flux_normal_profile(end, a, b)?)
    }

    fn sampled(g: &EndGrid, rows: &[f64]) -> Result<Self> {
        let idx: Vec<usize> = (0..g.ny).step_by(PROFILE_STRIDE).collect();
        Self::fit(idx.iter().map(|&j| g.y(j)).collect(), idx.iter().map(|&j| rows[j]).collect())
    }
}

/// ∫∫_{[0,Y]} Φ*α_∞ at every grid height; the density is (u + u_xx)(u + u_y)/2.
pub fn volume_profile(end: &EndFunction) -> Result<Vec<f64>> {
    let g = &end.grid;
    let jets = end.jets();
    let rows: Vec<f64> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let s = slice_jets(&jets, g, j)?;
            Ok(s.iter().map(volume_density).sum::<f64>() * dx(g))
        })
        .collect::<Result<_>>()?;
    Ok(cumulative(&rows, g.hy))
}

/// α_∞(Φ_x, Φ_y), computed from the tangent vectors.
pub fn volume_density(s: &JetState) -> f64 {
    let (px, py) = crate::darboux::tangent_vectors(s);
    let z = s.y.exp();
    -(px[0] * py[1] - px[1] * py[0]) / (2.0 * z * z)
}

pub fn volume_truncated(end: &EndFunction, y_cut: f64) -> Result<f64> {
    let j = row_of(&end.grid, y_cut)?;
    Ok(volume_profile(end)?[j])
}

/// H dArea − dx dy as a density in dx dy.
pub fn energy_density(s: &JetState) -> f64 {
    mean_curvature(s.u, s.ux, s.uy, s.uxx, s.uxy, s.uyy) * s.p() / s.c() - 1.0
}

/// Truncated renormalised energies along a ladder of heights.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub heights: Vec<f64>,
    /// ∫_{[0,Y]} H dArea for each ladder height Y.
    pub truncated: Vec<f64>,
    /// ∫_{[0,Y]} (H dArea − dx dy) = Ê_Y − 2πmY.
    pub renormalized: Vec<f64>,
    pub limit: f64,
    /// |E(Y_{i+1}) − E(Y_i)| / |E(Y_i) − E(Y_{i−1})|.
    pub cauchy_ratios: Vec<f64>,
    /// Geometric bound on |limit − last ladder value|.
    pub tail_bound: f64,
}

/// Cumulative ∫_{[0,Y]} (H dArea − dx dy) at every grid height.
pub fn energy_profile(end: &EndFunction) -> Result<Vec<f64>> {
    let g = &end.grid;
    let jets = end.jets();
    let rows: Vec<f64> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let s = slice_jets(&jets, g, j)?;
            Ok(s.iter().map(energy_density).sum::<f64>() * dx(g))
        })
        .collect::<Result<_>>()?;
    Ok(cumulative(&rows, g.hy))
}

/// Ladder of Cauchy differences of a cumulative profile at unit height steps
/// from 1 to Y − 1, with a geometric tail estimate.
pub fn ladder(g: &EndGrid, profile: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64, f64) {
    let per_unit = (1.0 / g.hy).round() as usize;
    let idx: Vec<usize> = (1..).map(|n| n * per_unit).take_while(|&j| g.y(j) <= g.y_max - 1.0 + 1e-9).collect();
    let heights: Vec<f64> = idx.iter().map(|&j| g.y(j)).collect();
    let values: Vec<f64> = idx.iter().map(|&j| profile[j]).collect();
    let d: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = d.windows(2).map(|w| (w[1] / w[0]).abs()).collect();
    let last = *values.last().unwrap_or(&0.0);
    let (limit, tail) = match (d.last(), ratios.last()) {
        (Some(dl), Some(&q)) if q < 1.0 => (last + dl * q / (1.0 - q), (dl * q / (1.0 - q)).abs()),
        _ => (last, f64::INFINITY),
    };
    (heights, values, ratios, limit, tail)
}

/// End-local renormalised energy with respect to the height origin y = 0.
pub fn energy_renormalized(end: &EndFunction) -> Result<EnergyLedger> {
    let g = &end.grid;
    let prof = energy_profile(end)?;
    let (heights, renormalized, cauchy_ratios, limit, tail_bound) = ladder(g, &prof);
    let two_pi_m = 2.0 * PI * g.m as f64;
    let truncated = heights.iter().zip(&renormalized).map(|(y, e)| e + two_pi_m * y).collect();
    Ok(EnergyLedger { heights, truncated, renormalized, limit, cauchy_ratios, tail_bound })
}

/// Renormalised energy when heights are measured from `origin` instead of 0:
/// the counterterm 2πm(Y − origin) shifts the limit by exactly 2πm·origin.
pub fn energy_with_origin(ledger: &EnergyLedger, m: u32, origin: f64) -> f64 {
    ledger.limit + 2.0 * PI * m as f64 * origin
}
