//! Fourier differentiation in the periodic variable x ∈ [0, 2πm).

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone)]
pub struct Spectral {
    pub nx: usize,
    pub m: u32,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("nx", &self.nx).field("m", &self.m).finish()
    }
}

impl Spectral {
    pub fn new(nx: usize, m: u32) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            m,
            forward: planner.plan_fft_forward(nx),
            inverse: planner.plan_fft_inverse(nx),
        }
    }

    /// Signed Fourier index of FFT slot `idx`; the Nyquist slot is reported as +nx/2.
    pub fn index(&self, idx: usize) -> i64 {
        if idx <= self.nx / 2 {
            idx as i64
        } else {
            idx as i64 - self.nx as i64
        }
    }

    /// FFT slot holding the signed index `n`.
    pub fn slot(&self, n: i64) -> usize {
        n.rem_euclid(self.nx as i64) as usize
    }

    /// Wavenumber λ = n/m of FFT slot `idx` (mode e^{iλx}).
    pub fn wavenumber(&self, idx: usize) -> f64 {
        self.index(idx) as f64 / self.m as f64
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.nx.is_multiple_of(2) && idx == self.nx / 2
    }

    /// Coefficients c_n with u(x) = Σ c_n e^{i n x/m}.
    pub fn forward(&self, row: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let s = 1.0 / self.nx as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    pub fn forward_complex(&self, row: &[Complex64]) -> Vec<Complex64> {
        let mut buf = row.to_vec();
        self.forward.process(&mut buf);
        let s = 1.0 / self.nx as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    pub fn inverse_complex(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        buf
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(coeffs).iter().map(|c| c.re).collect()
    }

    /// Spectral multiplier (iλ)^order, with the Nyquist slot zeroed for odd orders.
    pub fn multiplier(&self, idx: usize, order: u32) -> Complex64 {
        if order % 2 == 1 && self.is_nyquist(idx) {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.wavenumber(idx)).powu(order)
    }

    pub fn derivative(&self, row: &[f64], order: u32) -> Vec<f64> {
        let c = self.forward(row);
        let d: Vec<Complex64> =
            c.iter().enumerate().map(|(idx, v)| v * self.multiplier(idx, order)).collect();
        self.inverse(&d)
    }

    /// First and second x-derivatives from a single forward transform.
    pub fn d1_d2(&self, row: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = self.forward(row);
        let d1: Vec<Complex64> =
            c.iter().enumerate().map(|(idx, v)| v * self.multiplier(idx, 1)).collect();
        let d2: Vec<Complex64> =
            c.iter().enumerate().map(|(idx, v)| v * self.multiplier(idx, 2)).collect();
        (self.inverse(&d1), self.inverse(&d2))
    }

    /// Resample a row at x_i + shift (spectral translation).
    pub fn translate(&self, row: &[f64], shift: f64) -> Vec<f64> {
        let c = self.forward(row);
        let d: Vec<Complex64> = c
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let lam = if self.is_nyquist(idx) { 0.0 } else { self.wavenumber(idx) };
                v * Complex64::from_polar(1.0, lam * shift)
            })
            .collect();
        self.inverse(&d)
    }
}
