//! Uniform grids on the half-cylinder mS¹ × [0, Y] and sampled end functions.
//!
//! Samples are stored in horizontal rows: `values[j * nx + i]` is the value at
//! (x_i, y_j) with x_i = 2πm·i/nx and y_j = Y·j/(ny − 1).

use crate::darboux::JetState;
use crate::error::{Error, Result};
use crate::numerics::spectral::Spectral;
use crate::numerics::stencil::UniformStencil;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

/// Order of the finite-difference stencil in y.
pub const Y_ORDER: usize = 4;

#[derive(Clone, Debug)]
pub struct EndGrid {
    pub m: u32,
    pub nx: usize,
    pub ny: usize,
    pub y_max: f64,
    pub hy: f64,
    pub spectral: Spectral,
    pub stencil: UniformStencil,
}

impl EndGrid {
    pub fn new(m: u32, nx: usize, ny: usize, y_max: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("winding order must be positive".into()));
        }
        if !nx.is_power_of_two() || nx < 4 {
            return Err(Error::Grid(format!("nx = {nx} must be a power of two ≥ 4")));
        }
        if ny < 16 {
            return Err(Error::Grid(format!("ny = {ny} must be at least 16")));
        }
        if !(y_max > 0.0 && y_max.is_finite()) {
            return Err(Error::Domain(format!("height Y = {y_max} must be positive")));
        }
        let hy = y_max / (ny - 1) as f64;
        Ok(Self {
            m,
            nx,
            ny,
            y_max,
            hy,
            spectral: Spectral::new(nx, m),
            stencil: UniformStencil::new(ny, hy, Y_ORDER),
        })
    }

    /// Default height: 12/√(1−k) rounded up to a multiple of the step 1/64,
    /// with 128 points per winding in x.
    pub fn default_for(k: f64, m: u32) -> Result<Self> {
        check_k(k)?;
        let steps = (64.0 * 12.0 / (1.0 - k).sqrt()).ceil() as usize;
        Self::new(m, 128 * m as usize, steps + 1, steps as f64 / 64.0)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        2.0 * PI * self.m as f64 * i as f64 / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.hy * j as f64
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    pub fn sample<F: Fn(f64, f64) -> f64 + Sync>(&self, f: F) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        v.par_chunks_mut(self.nx).enumerate().for_each(|(j, row)| {
            let y = self.y(j);
            for (i, r) in row.iter_mut().enumerate() {
                *r = f(self.x(i), y);
            }
        });
        v
    }

    /// All first and second derivatives of a sampled field.
    pub fn jets(&self, values: &[f64]) -> JetField {
        let nx = self.nx;
        let uy = self.stencil.d1_rows(values, nx);
        let uyy = self.stencil.d2_rows(values, nx);
        let mut ux = vec![0.0; values.len()];
        let mut uxx = vec![0.0; values.len()];
        let mut uxy = vec![0.0; values.len()];
        ux.par_chunks_mut(nx)
            .zip(uxx.par_chunks_mut(nx))
            .zip(uxy.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(j, ((a, b), c))| {
                let (d1, d2) = self.spectral.d1_d2(&values[j * nx..(j + 1) * nx]);
                a.copy_from_slice(&d1);
                b.copy_from_slice(&d2);
                c.copy_from_slice(&self.spectral.derivative(&uy[j * nx..(j + 1) * nx], 1));
            });
        JetField { u: values.to_vec(), ux, uy, uxx, uxy, uyy }
    }

    /// Fourier coefficients of every row, `out[j][slot]`.
    pub fn row_modes(&self, values: &[f64]) -> Vec<Vec<Complex64>> {
        values.par_chunks(self.nx).map(|r| self.spectral.forward(r)).collect()
    }

    /// Inverse of [`row_modes`](Self::row_modes) (real part).
    pub fn from_row_modes(&self, modes: &[Vec<Complex64>]) -> Vec<f64> {
        modes.par_iter().flat_map_iter(|c| self.spectral.inverse(c)).collect()
    }

    /// Column of one Fourier mode across all rows.
    pub fn mode_profile(&self, values: &[f64], slot: usize) -> Vec<Complex64> {
        let modes = self.row_modes(values);
        modes.iter().map(|r| r[slot]).collect()
    }
}

pub fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("curvature k = {k} must lie in (0, 1)")))
    }
}

/// Derivative fields of a sampled function, same layout as the samples.
#[derive(Clone, Debug)]
pub struct JetField {
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    pub uxx: Vec<f64>,
    pub uxy: Vec<f64>,
    pub uyy: Vec<f64>,
}

impl JetField {
    pub fn at(&self, grid: &EndGrid, i: usize, j: usize) -> JetState {
        let q = j * grid.nx + i;
        JetState {
            x: grid.x(i),
            y: grid.y(j),
            u: self.u[q],
            ux: self.ux[q],
            uy: self.uy[q],
            uxx: self.uxx[q],
            uxy: self.uxy[q],
            uyy: self.uyy[q],
        }
    }
}

/// A sampled end u on mS¹ × [0, Y] together with its curvature k.
#[derive(Clone, Debug)]
pub struct EndFunction {
    pub k: f64,
    pub grid: Arc<EndGrid>,
    pub values: Vec<f64>,
}

impl EndFunction {
    pub fn new(k: f64, grid: Arc<EndGrid>, values: Vec<f64>) -> Result<Self> {
        check_k(k)?;
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("{} samples for a {}×{} grid", values.len(), grid.nx, grid.ny)));
        }
        Ok(Self { k, grid, values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync>(k: f64, grid: Arc<EndGrid>, f: F) -> Result<Self> {
        let v = grid.sample(f);
        Self::new(k, grid, v)
    }

    pub fn jets(&self) -> JetField {
        self.grid.jets(&self.values)
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.grid.nx..(j + 1) * self.grid.nx]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    /// Check u + u_xx > 0 at every node.
    pub fn check_convex(&self) -> Result<()> {
        let jets = self.jets();
        let nx = self.grid.nx;
        for (q, (u, uxx)) in jets.u.iter().zip(&jets.uxx).enumerate() {
            let p = u + uxx;
            if !(p > 0.0) {
                return Err(Error::DegenerateImmersion { i: q % nx, j: q / nx, value: p.abs() });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(EndGrid::new(1, 100, 32, 1.0).is_err());
        assert!(EndGrid::new(1, 64, 8, 1.0).is_err());
        assert!(EndGrid::new(0, 64, 32, 1.0).is_err());
        assert!(EndGrid::default_for(1.0, 1).is_err());
        let g = EndGrid::default_for(0.5, 2).unwrap();
        assert_eq!(g.nx, 256);
        assert!((g.y(g.ny - 1) - 12.0 / 0.5f64.sqrt()).abs() < 1.0 / 64.0);
        assert_eq!(g.hy, 1.0 / 64.0);
    }

    #[test]
    fn jets_of_smooth_field() {
        let g = EndGrid::new(1, 32, 161, 4.0).unwrap();
        let u = g.sample(|x, y| (0.3 + 0.1 * x.cos()) * (-0.7 * y).exp());
        let jf = g.jets(&u);
        let j = jf.at(&g, 5, 80);
        let (x, y) = (g.x(5), g.y(80));
        let e = (-0.7 * y).exp();
        assert!((j.ux + 0.1 * x.sin() * e).abs() < 1e-12);
        assert!((j.uxx + 0.1 * x.cos() * e).abs() < 1e-12);
        assert!((j.uy + 0.7 * (0.3 + 0.1 * x.cos()) * e).abs() < 1e-8);
        assert!((j.uyy - 0.49 * (0.3 + 0.1 * x.cos()) * e).abs() < 1e-7);
        assert!((j.uxy - 0.07 * x.sin() * e).abs() < 1e-8);
    }

    #[test]
    fn row_modes_round_trip() {
        let g = EndGrid::new(2, 16, 16, 1.0).unwrap();
        let u = g.sample(|x, y| (x / 2.0).sin() + y);
        let back = g.from_row_modes(&g.row_modes(&u));
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        let p = g.mode_profile(&u, 1);
        assert!((p[3] - Complex64::new(0.0, -0.5)).norm() < 1e-14);
    }
}
