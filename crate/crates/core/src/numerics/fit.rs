//! Small regression helpers for decay-rate estimation.

/// Least-squares line through (x, y): returns (slope, intercept, rms residual).
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, icpt, rms)
}

/// Decay exponent β of |f| ~ B e^{-β y} fitted on the samples with finite,
/// nonzero magnitude. Returns (β, rms residual of the log fit).
pub fn decay_exponent(y: &[f64], f: &[f64]) -> Option<(f64, f64)> {
    let (xs, ls): (Vec<f64>, Vec<f64>) = y
        .iter()
        .zip(f)
        .filter(|(_, v)| v.abs() > 0.0 && v.is_finite())
        .map(|(a, v)| (*a, v.abs().ln()))
        .unzip();
    if xs.len() < 3 {
        return None;
    }
    let (s, _, rms) = line_fit(&xs, &ls);
    Some((-s, rms))
}

/// Decay exponent fitted on the leading samples that stay above a noise floor.
///
/// The floor is `noise_factor` times the largest |f| over the upper half of the
/// y-range, where a decaying signal has reached its artifact level. Samples
/// are used from the start up to the first one below the floor.
pub fn decay_above_floor(y: &[f64], f: &[f64], noise_factor: f64) -> Option<(f64, f64)> {
    let n = y.len();
    if n < 3 {
        return None;
    }
    let mid = 0.5 * (y[0] + y[n - 1]);
    let floor = noise_factor * y.iter().zip(f).filter(|(a, _)| **a >= mid).map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let end = f.iter().position(|v| v.abs() <= floor).unwrap_or(n);
    decay_exponent(&y[..end], &f[..end])
}

/// Limit fit of f(y) = L + B e^{-β y} from equally spaced samples: β from the
/// log-slope of successive differences, L from geometric-tail extrapolation of
/// the last sample. Returns (L, β, rms of the log fit).
pub fn geometric_limit(y: &[f64], f: &[f64]) -> Option<(f64, f64, f64)> {
    if y.len() < 4 {
        return None;
    }
    let dy = y[1] - y[0];
    let d: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
    let mid: Vec<f64> = y.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let (beta, rms) = decay_exponent(&mid, &d)?;
    let q = (-beta * dy).exp();
    let last = *d.last().unwrap();
    let lim = f[f.len() - 1] + last * q / (1.0 - q);
    Some((lim, beta, rms))
}
