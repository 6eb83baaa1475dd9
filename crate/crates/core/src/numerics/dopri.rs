//! Dormand–Prince 5(4) integrator with adaptive steps, stopping exactly at
//! requested output times (which may decrease).

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate y' = f(t, y) from `t0` through the monotone sequence `outputs`,
/// returning the state at each output time. Returns None when the step size
/// collapses or the state stops being finite.
pub fn integrate<F>(f: F, t0: f64, y0: &[f64], outputs: &[f64], tol: Tolerance) -> Option<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut res = Vec::with_capacity(outputs.len());
    let mut h: f64 = match outputs.first() {
        Some(t1) => (t1 - t0) * 1e-3,
        None => return Some(res),
    };
    if h == 0.0 {
        h = 1e-6;
    }
    for &target in outputs {
        let dir = (target - t).signum();
        if target == t {
            res.push(y.clone());
            continue;
        }
        h = h.abs().max(1e-12) * dir;
        let mut steps = 0usize;
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > 1_000_000 {
                return None;
            }
            let last = (t + h - target) * dir >= 0.0;
            let hs = if last { target - t } else { h };
            let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
            for s in 0..7 {
                let mut ys = y.clone();
                for (q, kq) in k.iter().enumerate() {
                    let a = A[s][q];
                    if a != 0.0 {
                        for i in 0..n {
                            ys[i] += hs * a * kq[i];
                        }
                    }
                }
                k.push(f(t + C[s] * hs, &ys));
            }
            let mut ynew = y.clone();
            let mut err = 0.0f64;
            for i in 0..n {
                let mut inc = 0.0;
                let mut e = 0.0;
                for s in 0..7 {
                    inc += B[s] * k[s][i];
                    e += E[s] * k[s][i];
                }
                ynew[i] += hs * inc;
                let sc = tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs());
                err = err.max((hs * e).abs() / sc);
            }
            if !ynew.iter().all(|v| v.is_finite()) {
                if hs.abs() < 1e-14 {
                    return None;
                }
                h = hs * 0.25;
                continue;
            }
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                y = ynew;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = hs * fac;
                }
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h.abs() < 1e-14 {
                    return None;
                }
            }
        }
        res.push(y.clone());
    }
    Some(res)
}
