//! LU factorisation with partial pivoting for complex banded matrices.

use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    ab: Vec<Complex64>,
    lower: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandedLu {
    /// Entry (i, j) of the input must vanish unless i - kl ≤ j ≤ i + ku.
    /// `entry(i, j)` is only queried inside the band.
    pub fn factor<F>(n: usize, kl: usize, ku: usize, entry: F) -> Option<Self>
    where
        F: Fn(usize, usize) -> Complex64,
    {
        let width = 2 * kl + ku + 1;
        let mut ab = vec![Complex64::new(0.0, 0.0); n * width];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                ab[i * width + j + kl - i] = entry(i, j);
            }
        }
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            ab,
            lower: vec![Complex64::new(0.0, 0.0); n * kl.max(1)],
            piv: vec![0; n],
        };
        lu.eliminate()?;
        Some(lu)
    }

    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    fn eliminate(&mut self) -> Option<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for i in 0..n {
            let last = (i + kl).min(n - 1);
            let mut p = i;
            let mut best = self.ab[self.at(i, i)].norm();
            for r in i + 1..=last {
                let v = self.ab[self.at(r, i)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            self.piv[i] = p;
            let jmax = (i + kl + ku).min(n - 1);
            if p != i {
                for j in i..=jmax {
                    let (a, b) = (self.at(i, j), self.at(p, j));
                    self.ab.swap(a, b);
                }
            }
            let d = self.ab[self.at(i, i)];
            for r in i + 1..=last {
                let l = self.ab[self.at(r, i)] / d;
                self.lower[i * kl + (r - i - 1)] = l;
                let ri = self.at(r, i);
                self.ab[ri] = Complex64::new(0.0, 0.0);
                if l.norm() == 0.0 {
                    continue;
                }
                for j in i + 1..=jmax {
                    let u = self.ab[self.at(i, j)];
                    let idx = self.at(r, j);
                    self.ab[idx] -= l * u;
                }
            }
        }
        Some(())
    }

    pub fn solve(&self, b: &mut [Complex64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for i in 0..n {
            let p = self.piv[i];
            if p != i {
                b.swap(i, p);
            }
            let last = (i + kl).min(n - 1);
            let bi = b[i];
            for r in i + 1..=last {
                b[r] -= self.lower[i * kl + (r - i - 1)] * bi;
            }
        }
        for i in (0..n).rev() {
            let jmax = (i + kl + ku).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=jmax {
                s -= self.ab[self.at(i, j)] * b[j];
            }
            b[i] = s / self.ab[self.at(i, i)];
        }
    }
}
