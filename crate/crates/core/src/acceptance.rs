//! The acceptance suite: one measured outcome per criterion, shared by the
//! `acceptance` integration test and the CLI self-test.

use crate::asymptotics::{build_semigroup, extract_series, radius_centroid, FitWindow};
use crate::darboux::{
    chart_equivariance_residual, contact_pullback_check, curvature_pack, frame_identity_residual, JetState,
};
use crate::endsolver::{
    intrinsic_curvature, jacobi_apply, jacobi_identity_residual, ode_radial_solve, residual_field,
};
use crate::error::Result;
use crate::fixtures::{asymmetric_end, picard_fixture, regression_end, solve_cached, Boundary};
use crate::functionals::{energy_renormalized, kappa_profile, ladder, length_profile, row_of, volume_profile, Flux, FluxProfile};
use crate::greens::{end_nonlinearity, green1d_dirichlet, picard_solve, GreenConfig};
use crate::grid::{EndFunction, EndGrid};
use crate::halfspace::BoundaryPoint;
use crate::numerics::stencil::UniformStencil;
use crate::steiner::{check_relations, closed_form_points, symmetric_examples, symplectic_check, Example};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Outcome {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!("{} {:>3}  {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.title, self.detail)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// Criterion number whose first measured error is inflated, to check the
    /// harness reports a failure.
    pub fault: Option<u32>,
    pub seed: u64,
}

struct Ctx {
    opts: Options,
    out: Vec<Outcome>,
}

impl Ctx {
    /// `err` is inflated by 1e6 (plus one) when the fault targets `n`.
    fn skew(&self, n: u32, err: f64) -> f64 {
        if self.opts.fault == Some(n) {
            err * 1e6 + 1.0
        } else {
            err
        }
    }

    fn push(&mut self, id: &str, title: &str, pass: bool, detail: String) {
        self.out.push(Outcome { id: id.into(), title: title.into(), pass, detail });
    }

    fn error(&mut self, id: &str, title: &str, e: crate::Error) {
        self.push(id, title, false, format!("error: {e}"));
    }

    fn rng(&self, n: u32) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.opts.seed.wrapping_add(n as u64))
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (p, q)| m.max((p - q).abs()))
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m: f64, p| m.max(p.abs()))
}

fn omega(k: f64) -> f64 {
    (4.0 - 3.0 * k).sqrt()
}

fn centroid_of(end: &EndFunction) -> Result<(f64, Complex64, Option<f64>)> {
    let sg = build_semigroup(end.grid.m, end.k, omega(end.k))?;
    let s = extract_series(end, &sg, FitWindow::default())?;
    let (r, c) = radius_centroid(&s)?;
    Ok((r, c, s.remainder_rate))
}

fn c1(ctx: &mut Ctx) {
    let mut ek: f64 = 0.0;
    let mut eh: f64 = 0.0;
    let mut geo: f64 = 0.0;
    for c in [0.25, 0.5, 1.0, 2.0, 4.0] {
        match curvature_pack(&JetState::constant(c, 0.3, 0.7)) {
            Ok(p) => {
                ek = ek.max((p.extrinsic - 1.0).abs());
                eh = eh.max((p.mean - (1.0 + 2.0 * c * c) / (c * (1.0 + c * c).sqrt())).abs());
                let r = c.asinh();
                geo = geo.max((r.tanh() * (1.0 / r.tanh()) - 1.0).abs()).max((r.tanh() + 1.0 / r.tanh() - p.mean).abs());
            }
            Err(e) => return ctx.error("1", "constant-end curvatures", e),
        }
    }
    let ek = ctx.skew(1, ek);
    let pass = ek < 1e-12 && eh < 1e-12 && geo < 1e-12;
    ctx.push("1", "constant-end curvatures", pass, format!("|K−1| {ek:.1e}, |H−H_c| {eh:.1e}, tube check {geo:.1e} (bar 1e-12)"));
}

fn c2(ctx: &mut Ctx) {
    let h = 1.0 / 64.0;
    let n = (20.0 / h) as usize + 1;
    let mut err: f64 = 0.0;
    for (a, w) in [(1.0, 2.0), (1.0, 3.0), (0.5, 1.5)] {
        let f: Vec<f64> = (0..n).map(|j| (-w * j as f64 * h).exp()).collect();
        match green1d_dirichlet(a, &f, h) {
            Ok(r) => {
                for j in 0..n {
                    let y = j as f64 * h;
                    let want = ((-w * y).exp() - (-a * y).exp()) / (w * w - a * a);
                    err = err.max((r.values[j] - want).abs());
                }
            }
            Err(e) => return ctx.error("2", "Green closed form", e),
        }
    }
    let err = ctx.skew(2, err);
    ctx.push("2", "Green closed form", err < 1e-9, format!("sup error {err:.1e} on [0, 20] (bar 1e-9)"));
}

fn c3(ctx: &mut Ctx) {
    let mut rng = ctx.rng(3);
    let h = 1.0 / 128.0;
    let n = (25.0 / h) as usize + 1;
    let st = UniformStencil::new(n, h, 6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = rng.gen_range(0.4..1.5);
        let terms: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-1.0..1.0), a + rng.gen_range(0.3..2.0))).collect();
        let f: Vec<f64> = (0..n).map(|j| terms.iter().map(|(c, w)| c * (-w * j as f64 * h).exp()).sum()).collect();
        let r = match green1d_dirichlet(a, &f, h) {
            Ok(r) => r,
            Err(e) => return ctx.error("3", "inverse property", e),
        };
        let d2 = st.d2(&r.values);
        let e = (1..n - 1).fold(0.0, |m: f64, j| m.max((d2[j] - a * a * r.values[j] - f[j]).abs()));
        worst = worst.max(e / sup(&f));
    }
    let worst = ctx.skew(3, worst);
    ctx.push("3", "inverse property", worst < 1e-7, format!("relative sup error {worst:.1e} over 20 inputs (bar 1e-7)"));
}

fn c4(ctx: &mut Ctx) {
    let k = 0.5;
    let title = "nonlinear solve";
    let main = match regression_end(k) {
        Ok(s) => s,
        Err(e) => return ctx.error("4", title, e),
    };
    let g = Arc::new(match EndGrid::default_for(k, 1) {
        Ok(g) => g,
        Err(e) => return ctx.error("4", title, e),
    });
    let radial = solve_cached(k, g.clone(), &Boundary::cosine(&[0.05])).and_then(|s| {
        let p = ode_radial_solve(k, 0.05, &g.ys())?;
        let want: Vec<f64> = (0..g.len()).map(|q| p.u[q / g.nx]).collect();
        Ok(sup_diff(&s.end.values, &want))
    });
    let diff = match radial {
        Ok(d) => d,
        Err(e) => return ctx.error("4", title, e),
    };
    let res = ctx.skew(4, main.report.final_residual);
    let its = main.report.iterations;
    let pass = main.report.converged && its <= 8 && res < 1e-10 && diff < 1e-8;
    ctx.push(
        "4",
        title,
        pass,
        format!("{its} Newton steps, residual {res:.1e} (bars ≤ 8, 1e-10); radial vs ODE oracle {diff:.1e} (bar 1e-8)"),
    );
}

fn c5(ctx: &mut Ctx) {
    let title = "Newton vs Picard";
    let mut worst: f64 = 0.0;
    for k in [0.3, 0.5, 0.75] {
        let r = EndGrid::default_for(k, 1).and_then(|g| {
            let g = Arc::new(g);
            let data = picard_fixture(k);
            let newton = solve_cached(k, g.clone(), &data)?;
            let v = data.sample(&g);
            let (pic, _) = picard_solve(&GreenConfig::end_operator(k, g.clone()), k, &v, end_nonlinearity(k), 1e-14, 60, None)?;
            Ok(sup_diff(&pic.values, &newton.end.values))
        });
        match r {
            Ok(d) => worst = worst.max(d),
            Err(e) => return ctx.error("5", title, e),
        }
    }
    let worst = ctx.skew(5, worst);
    ctx.push("5", title, worst < 1e-7, format!("sup difference {worst:.1e} over k = 0.3, 0.5, 0.75 (bar 1e-7)"));
}

fn tail_rate(end: &EndFunction, n: i64) -> Option<f64> {
    let g = &end.grid;
    let p = g.mode_profile(&end.values, g.spectral.slot(n));
    let ys = g.ys();
    let rows: Vec<usize> = (0..g.ny).filter(|&j| ys[j] >= 0.5 * g.y_max && ys[j] <= g.y_max - 1.0).collect();
    let y: Vec<f64> = rows.iter().map(|&j| ys[j]).collect();
    let f: Vec<f64> = rows.iter().map(|&j| p[j].norm()).collect();
    crate::numerics::fit::decay_exponent(&y, &f).map(|r| r.0)
}

fn c6(ctx: &mut Ctx) {
    let title = "decay rates";
    let mut worst_rel: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;
    for k in [0.3, 0.5, 0.75] {
        let r = regression_end(k).and_then(|s| {
            let end = &s.end;
            let a = (1.0 - k).sqrt();
            let rates = [tail_rate(end, 0).map(|b| b / a), tail_rate(end, 1), tail_rate(end, -1)];
            let (_, _, rem) = centroid_of(end)?;
            Ok((rates, rem))
        });
        match r {
            Ok((rates, rem)) => {
                for b in rates {
                    worst_rel = worst_rel.max(b.map_or(f64::INFINITY, |b| (b - 1.0).abs()));
                }
                worst_margin = worst_margin.min(rem.map_or(f64::NEG_INFINITY, |r| r - (omega(k) - 0.05)));
            }
            Err(e) => return ctx.error("6", title, e),
        }
    }
    let worst_rel = ctx.skew(6, worst_rel);
    let pass = worst_rel < 0.01 && worst_margin >= 0.0;
    ctx.push(
        "6",
        title,
        pass,
        format!("worst relative tail-rate error {worst_rel:.1e} (bar 0.01); remainder exponent margin {worst_margin:+.3} over √(4−3k) − 0.05"),
    );
}

fn c7(ctx: &mut Ctx) {
    let title = "flux-centroid identity";
    let k = 0.5;
    let bar = omega(k) - 1.0 - 0.05;
    let mut rng = ctx.rng(7);
    let dirs: Vec<(f64, f64)> = (0..5).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let r = asymmetric_end(k).and_then(|s| {
        let end = &s.end;
        let (_, c, _) = centroid_of(end)?;
        let mut lim_err: f64 = 0.0;
        let mut min_exp = f64::INFINITY;
        for &(a, b) in &dirs {
            let p = FluxProfile::slice(end, Flux::Conormal, a, b)?;
            let want = -4.0 * PI * end.grid.m as f64 * (a * c.re + b * c.im);
            lim_err = lim_err.max((p.limit - want).abs());
            min_exp = min_exp.min(p.exponent.unwrap_or(f64::NEG_INFINITY));
        }
        let mut companion = f64::INFINITY;
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8)] {
            for which in [Flux::Dnu, Flux::Alpha] {
                let p = FluxProfile::slice(end, which, a, b)?;
                companion = companion.min(p.exponent.unwrap_or(f64::NEG_INFINITY));
            }
            companion = companion.min(FluxProfile::normal(end, a, b)?.exponent.unwrap_or(f64::NEG_INFINITY));
        }
        Ok((lim_err, min_exp, companion))
    });
    match r {
        Ok((lim_err, min_exp, companion)) => {
            let lim_err = ctx.skew(7, lim_err);
            let pass = lim_err < 1e-4 && min_exp >= bar && companion >= bar;
            ctx.push(
                "7",
                title,
                pass,
                format!(
                    "limit error {lim_err:.1e} (bar 1e-4); exponents: conormal {min_exp:.3}, companions {companion:.3} (bar {bar:.3})"
                ),
            );
        }
        Err(e) => ctx.error("7", title, e),
    }
}

fn c8(ctx: &mut Ctx) {
    let title = "slice geometry";
    let mut kerr: f64 = 0.0;
    let mut lerr: f64 = 0.0;
    for k in [0.5, 0.75] {
        let r = regression_end(k).and_then(|s| {
            let end = &s.end;
            let g = &end.grid;
            let (r, _, _) = centroid_of(end)?;
            let y = g.y(row_of(g, ((g.y_max - 2.0) / g.hy).round() * g.hy)?);
            let a = (1.0 - k).sqrt();
            let ratio = length_profile(end, y)? / (2.0 * PI * g.m as f64 * r * (-a * y).exp());
            Ok(((kappa_profile(end, y)?.mean + a).abs(), (ratio - 1.0).abs()))
        });
        match r {
            Ok((a, b)) => {
                kerr = kerr.max(a);
                lerr = lerr.max(b);
            }
            Err(e) => return ctx.error("8", title, e),
        }
    }
    let kerr = ctx.skew(8, kerr);
    let pass = kerr < 1e-3 && lerr < 1e-3;
    ctx.push("8", title, pass, format!("|κ̄ + √(1−k)| {kerr:.1e}, |L/L₀ − 1| {lerr:.1e} at y = Y − 2 (bar 1e-3)"));
}

fn c9(ctx: &mut Ctx) {
    let title = "Gauss identity";
    let k = 0.5;
    let curv_err = |end: &EndFunction| -> Result<f64> {
        Ok(intrinsic_curvature(end)?.iter().fold(0.0, |m: f64, v| m.max((v - (end.k - 1.0)).abs())))
    };
    let r = (|| -> Result<(f64, f64)> {
        let mut worst: f64 = 0.0;
        for k in [0.3, 0.5, 0.75] {
            worst = worst.max(curv_err(&regression_end(k)?.end)?);
        }
        let mut errs = Vec::new();
        for per in [16usize, 32] {
            let g = Arc::new(EndGrid::new(1, 128, 16 * per + 1, 16.0)?);
            errs.push(curv_err(&solve_cached(k, g, &Boundary::cosine(&[0.05, 0.02]))?.end)?);
        }
        Ok((worst, (errs[0] / errs[1]).log2()))
    })();
    match r {
        Ok((worst, order)) => {
            let worst = ctx.skew(9, worst);
            let pass = worst < 1e-5 && order >= 1.8;
            ctx.push("9", title, pass, format!("sup |K_int − (k−1)| {worst:.1e} (bar 1e-5); observed order {order:.2} (bar 1.8)"));
        }
        Err(e) => ctx.error("9", title, e),
    }
}

fn points_match(kind: Example, n: u32, m0: u32, m1: u32, got: &[BoundaryPoint]) -> f64 {
    closed_form_points(kind, n, m0, m1).iter().zip(got).fold(0.0, |m: f64, (a, b)| match (a, b) {
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => m.max((a - b).norm()),
        (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => m,
        _ => f64::INFINITY,
    })
}

fn c10(ctx: &mut Ctx) {
    let mut cases: Vec<(Example, u32, u32, u32)> = Vec::new();
    for n in 3..=8 {
        cases.push((Example::I, n, 1, 1));
        cases.push((Example::II, n, 1, 1));
    }
    cases.extend([(Example::III, 2, 2, 4), (Example::III, 3, 2, 2)]);
    let mut rel: f64 = 0.0;
    let mut pts: f64 = 0.0;
    for &(kind, n, m0, m1) in &cases {
        match symmetric_examples(kind, n, m0, m1).and_then(|d| Ok((check_relations(&d, 1e-14)?, d))) {
            Ok((r, d)) => {
                rel = rel.max(r.sum_vectors).max(r.moment).max(r.reflected);
                let got: Vec<BoundaryPoint> = d.ends.iter().map(|e| e.zeta).collect();
                pts = pts.max(points_match(kind, n, m0, m1, &got));
            }
            Err(e) => return ctx.error("10a", "Steiner relations", e),
        }
    }
    let rel = ctx.skew(10, rel);
    ctx.push(
        "10a",
        "Steiner relations",
        rel < 1e-14 && pts < 1e-15,
        format!("I, II for n = 3..8, III at (2,2,4), (3,2,2): residuals {rel:.1e} (bar 1e-14), closed-form points {pts:.1e}"),
    );
    match symmetric_examples(Example::III, 5, 5, 5) {
        Ok(d) => match check_relations(&d, 1e-14) {
            Ok(r) => ctx.push("10b", "Steiner relations (5,5,5)", r.all_pass(), format!("residuals {:.1e}", r.sum_vectors.max(r.moment).max(r.reflected))),
            Err(e) => ctx.error("10b", "Steiner relations (5,5,5)", e),
        },
        Err(e) => ctx.push("10b", "Steiner relations (5,5,5)", false, format!("no such configuration: {e}")),
    }
}

fn c11(ctx: &mut Ctx) {
    let k: f64 = 0.5;
    let a = (1.0 - k).sqrt();
    let r = regression_end(k).and_then(|s| {
        let e = energy_renormalized(&s.end)?;
        let v = volume_profile(&s.end)?;
        let (_, _, vr, _, _) = ladder(&s.end.grid, &v);
        Ok((e, vr))
    });
    match r {
        Ok((e, vr)) => {
            let target = (-a).exp();
            let worst = e.cauchy_ratios.iter().fold(0.0, |m: f64, q| m.max((q / target - 1.0).abs()));
            let worst = ctx.skew(11, worst);
            let mean = e.cauchy_ratios.iter().sum::<f64>() / e.cauchy_ratios.len().max(1) as f64;
            ctx.push(
                "11a",
                "energy Cauchy ratios",
                worst < 0.1,
                format!("mean ratio {mean:.4} vs e^(−√(1−k)) = {target:.4}: worst deviation {:.0}% (bar 10%); e^(−2√(1−k)) = {:.4}", worst * 100.0, (-2.0 * a).exp()),
            );
            let class = vr.iter().zip(&e.cauchy_ratios).fold(0.0, |m: f64, (p, q)| m.max((p / q - 1.0).abs()));
            ctx.push("11b", "volume rate class", class < 0.1, format!("volume/energy ratio deviation {:.1e} (bar 0.1)", class));
        }
        Err(err) => ctx.error("11a", "energy Cauchy ratios", err),
    }
}

fn c12(ctx: &mut Ctx) {
    let title = "Jacobi linearisation";
    let k = 0.5;
    let r = regression_end(k).and_then(|s| {
        let end = &s.end;
        let g = end.grid.clone();
        let shape = g.sample(|x, y| (0.3 + 0.2 * x.sin() + 0.1 * (2.0 * x).cos()) * (-0.5 * y).exp() * (1.0 + 0.3 * y));
        let w: Vec<f64> = end.values.iter().zip(&shape).map(|(u, m)| u * m * 5.0).collect();
        let jets = end.jets();
        let phi: Vec<f64> = (0..g.len())
            .map(|q| {
                let t = jets.u[q] + jets.uy[q];
                w[q] / (1.0 + t * t).sqrt()
            })
            .collect();
        let jphi = jacobi_apply(end, &phi)?;
        let shifted = |t: f64| -> Result<Vec<f64>> {
            let vals: Vec<f64> = end.values.iter().zip(&w).map(|(a, b)| a + t * b).collect();
            residual_field(&EndFunction::new(k, g.clone(), vals)?)
        };
        // Central differences with one Richardson step: O(t⁴) truncation, so a
        // large step keeps the stencil roundoff small.
        let t = 1e-3;
        let d = |t: f64| -> Result<Vec<f64>> {
            let (p, m) = (shifted(t)?, shifted(-t)?);
            Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * t)).collect())
        };
        let (d1, d2) = (d(t)?, d(0.5 * t)?);
        let mut fd: f64 = 0.0;
        for q in 4 * g.nx..(g.ny - 4) * g.nx {
            let rich = (4.0 * d2[q] - d1[q]) / 3.0;
            let exact = k * jphi[q];
            fd = fd.max((rich - exact).abs() / (1.0 + exact.abs()));
        }
        let id = sup(&jacobi_identity_residual(end, &shape)?);
        Ok((fd, id))
    });
    match r {
        Ok((fd, id)) => {
            let fd = ctx.skew(12, fd);
            let pass = fd < 1e-6 && id < 1e-5;
            ctx.push("12", title, pass, format!("Richardson FD vs k·J(Cw) {fd:.1e} (bar 1e-6); Sasaki identity {id:.1e} (bar 1e-5)"));
        }
        Err(e) => ctx.error("12", title, e),
    }
}

fn c13(ctx: &mut Ctx) {
    let mut rng = ctx.rng(13);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let w = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI));
        match symplectic_check(z, w) {
            Ok(r) => worst = worst.max(r.residual),
            Err(e) => return ctx.error("13", "symplectic pullback", e),
        }
    }
    let worst = ctx.skew(13, worst);
    ctx.push("13", "symplectic pullback", worst < 1e-8, format!("Ψ*ω = −dz∧dw̄ residual {worst:.1e} at 100 points (bar 1e-8)"));
}

fn c14(ctx: &mut Ctx) {
    let mut rng = ctx.rng(14);
    let (mut contact, mut equi, mut frame): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let q: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        contact = contact.max(contact_pullback_check(q[0], q[1], q[2], q[3], q[4], 1e-3));
        let r = chart_equivariance_residual(
            q,
            rng.gen_range(-PI..PI),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        equi = equi.max(r[0]).max(r[1]).max(r[2]);
        let j = JetState {
            x: rng.gen_range(-3.0..3.0),
            y: rng.gen_range(-1.0..1.0),
            u: rng.gen_range(-1.0..1.0),
            ux: rng.gen_range(-1.0..1.0),
            uy: rng.gen_range(-1.0..1.0),
            uxx: rng.gen_range(-1.0..1.0),
            uxy: rng.gen_range(-1.0..1.0),
            uyy: rng.gen_range(-1.0..1.0),
        };
        frame = frame.max(frame_identity_residual(&j));
    }
    let contact = ctx.skew(14, contact);
    let pass = contact < 1e-10 && equi < 1e-10 && frame < 1e-10;
    ctx.push(
        "14",
        "structural identities",
        pass,
        format!("contact pullback {contact:.1e}, chart equivariance {equi:.1e}, frames {frame:.1e} at 10³ samples (bar 1e-10)"),
    );
}

/// Runs every criterion in order.
pub fn run(opts: Options) -> Vec<Outcome> {
    let mut ctx = Ctx { opts, out: Vec::new() };
    let all: [fn(&mut Ctx); 14] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13, c14];
    for c in all {
        c(&mut ctx);
    }
    ctx.out
}
