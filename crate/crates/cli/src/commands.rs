use kend::acceptance::{self, Outcome};
use kend::asymptotics::{build_semigroup, extract_series, radius_centroid, FitWindow};
use kend::endsolver::{newton_solve, ode_radial_solve, NewtonConfig};
use kend::functionals::{flux_normal_profile, slice_flux_rows, Flux, FluxProfile};
use kend::halfspace::BoundaryPoint;
use kend::steiner::{
    check_relations, steiner_geodesic, steiner_point, steiner_vector, symmetric_examples, EndRecord, Example,
    RelationReport, SteinerData,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::report::{hash_of, write_file, write_json, Envelope};
use crate::{artifact, CliError, Command, ExampleKind};

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::SolveEnd { config, out } => solve_end(&config, &out),
        Command::Expand { artifact, omega, out } => expand(&artifact, omega, out.as_deref()),
        Command::Steiner { artifact, example, n, m0, m1, tol, out } => match (artifact, example) {
            (Some(dir), None) => steiner_end(&dir, out.as_deref()),
            (None, Some(kind)) => steiner_example(kind, n, m0, m1, tol, out.as_deref()),
            _ => Err(CliError::Usage("give an artifact directory or --example".into())),
        },
        Command::Relations { config, tol, out } => relations(&config, tol, out.as_deref()),
        Command::Flux { artifact, a, b, out } => flux(&artifact, a, b, out.as_deref()),
        Command::OracleOde { config, out } => oracle_ode(&config, out.as_deref()),
        Command::Selftest { seed, inject_fault, out } => selftest(seed, inject_fault, out),
    }
}

/// Decimal string that parses back to the same f64.
fn dec(v: f64) -> String {
    format!("{v:?}")
}

fn solve_end(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let grid = cfg.grid()?;
    let v = cfg.boundary().sample(&grid);
    let mut nc = NewtonConfig::new(cfg.k);
    nc.tol = cfg.newton_tol;
    let (end, rep) = newton_solve(&nc, grid, &v)?;
    artifact::write(out, &cfg, &end, &rep)?;
    eprintln!("converged in {} Newton steps, residual {:e}", rep.iterations, rep.final_residual);
    Ok(())
}

#[derive(Serialize)]
struct TermOut {
    lambda: String,
    mu: String,
    re: String,
    im: String,
}

#[derive(Serialize)]
struct SeriesOut {
    cutoff: String,
    r: String,
    c: [String; 2],
    remainder_exponent: Option<String>,
    terms: Vec<TermOut>,
}

fn expand(dir: &Path, omega: Option<f64>, out: Option<&Path>) -> Result<(), CliError> {
    let (cfg, end) = artifact::read(dir)?;
    let cutoff = omega.unwrap_or((4.0 - 3.0 * cfg.k).sqrt());
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(CliError::Usage(format!("--omega {cutoff} must be positive")));
    }
    let sg = build_semigroup(cfg.m, cfg.k, cutoff)?;
    let s = extract_series(&end, &sg, FitWindow::default())?;
    let (r, c) = radius_centroid(&s)?;
    let body = SeriesOut {
        cutoff: dec(cutoff),
        r: dec(r),
        c: [dec(c.re), dec(c.im)],
        remainder_exponent: s.remainder_rate.map(dec),
        terms: s
            .terms
            .iter()
            .map(|t| TermOut {
                lambda: dec(t.index.lambda(cfg.m)),
                mu: dec(t.index.mu),
                re: dec(t.amplitude.re),
                im: dec(t.amplitude.im),
            })
            .collect(),
    };
    let hash = hash_of(&(cfg.hash(), dec(cutoff)));
    write_json(out, "series.json", &Envelope::new("expand", hash, body))
}

#[derive(Serialize)]
struct EndSteiner {
    radius: f64,
    /// Foot point c of the Steiner geodesic of the end at ∞.
    foot: Complex64,
    exponent: Option<f64>,
    /// Steiner point after conjugating the end to extremity 0.
    point_at_origin: BoundaryPoint,
    round_trip_error: f64,
}

fn steiner_end(dir: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (cfg, end) = artifact::read(dir)?;
    let geo = steiner_geodesic(&end)?;
    let zero = Complex64::new(0.0, 0.0);
    let point = steiner_point(zero, geo.foot);
    let back = steiner_vector(zero, point)?;
    let body = EndSteiner {
        radius: geo.radius,
        foot: geo.foot,
        exponent: geo.exponent,
        point_at_origin: point,
        round_trip_error: (back - geo.foot).norm(),
    };
    write_json(out, "steiner.json", &Envelope::new("steiner", cfg.hash(), body))
}

#[derive(Serialize)]
struct RelationsOut {
    data: SteinerData,
    relations: RelationReport,
}

fn steiner_example(kind: ExampleKind, n: u32, m0: u32, m1: u32, tol: f64, out: Option<&Path>) -> Result<(), CliError> {
    let ex = match kind {
        ExampleKind::I => Example::I,
        ExampleKind::II => Example::II,
        ExampleKind::III => Example::III,
    };
    let data = symmetric_examples(ex, n, m0, m1)?;
    let relations = check_relations(&data, tol)?;
    let hash = hash_of(&(kind, n, m0, m1, dec(tol)));
    write_json(out, "steiner.json", &Envelope::new("steiner", hash, RelationsOut { data, relations }))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndInput {
    m: u32,
    /// Extremity; null for ∞.
    z: Option<Complex64>,
    c: Complex64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationsInput {
    ends: Vec<EndInput>,
}

fn relations(path: &Path, tol: f64, out: Option<&Path>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let input: RelationsInput =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid {}: {e}", path.display())))?;
    let data = if input.ends.iter().all(|e| e.z.is_some()) {
        SteinerData::from_vectors(&input.ends.iter().map(|e| (e.m, e.z.unwrap(), e.c)).collect::<Vec<_>>())?
    } else {
        // Checked only so that the unsupported extremity is reported.
        SteinerData {
            ends: input
                .ends
                .iter()
                .map(|e| EndRecord {
                    m: e.m,
                    z: e.z.map_or(BoundaryPoint::Infinity, BoundaryPoint::Finite),
                    c: e.c,
                    zeta: e.z.map_or(BoundaryPoint::Infinity, |z| steiner_point(z, e.c)),
                })
                .collect(),
        }
    };
    let relations = check_relations(&data, tol)?;
    let hash = hash_of(&(&input, dec(tol)));
    write_json(out, "relations.json", &Envelope::new("relations", hash, RelationsOut { data, relations }))
}

#[derive(Serialize)]
struct FluxFit {
    limit: f64,
    exponent: Option<f64>,
}

#[derive(Serialize)]
struct FluxOut {
    a: f64,
    b: f64,
    conormal: FluxFit,
    dnu: FluxFit,
    alpha: FluxFit,
    normal: FluxFit,
}

fn flux(dir: &Path, a: f64, b: f64, out: Option<&Path>) -> Result<(), CliError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(CliError::Usage("--a and --b must be finite".into()));
    }
    let (cfg, end) = artifact::read(dir)?;
    let g = &end.grid;
    let rows = [
        slice_flux_rows(&end, Flux::Conormal, a, b)?,
        slice_flux_rows(&end, Flux::Dnu, a, b)?,
        slice_flux_rows(&end, Flux::Alpha, a, b)?,
        flux_normal_profile(&end, a, b)?,
    ];
    let mut csv = String::from("y,conormal,dnu,alpha,normal\n");
    for j in 0..g.ny {
        writeln!(csv, "{},{},{},{},{}", g.y(j), rows[0][j], rows[1][j], rows[2][j], rows[3][j]).unwrap();
    }
    let fit = |p: FluxProfile| FluxFit { limit: p.limit, exponent: p.exponent };
    let body = FluxOut {
        a,
        b,
        conormal: fit(FluxProfile::slice(&end, Flux::Conormal, a, b)?),
        dnu: fit(FluxProfile::slice(&end, Flux::Dnu, a, b)?),
        alpha: fit(FluxProfile::slice(&end, Flux::Alpha, a, b)?),
        normal: fit(FluxProfile::normal(&end, a, b)?),
    };
    let env = Envelope::new("flux", hash_of(&(cfg.hash(), dec(a), dec(b))), body);
    match out {
        Some(d) => {
            write_file(&d.join("flux.csv"), &csv)?;
            write_json(Some(d), "flux.json", &env)
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct OdeOut {
    k: f64,
    u0: f64,
    radius: f64,
}

fn oracle_ode(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    if cfg.boundary.cos.iter().skip(1).chain(&cfg.boundary.sin).any(|c| *c != 0.0) {
        return Err(CliError::Usage("the radial oracle needs constant boundary data".into()));
    }
    let u0 = cfg.boundary.cos.first().copied().unwrap_or(0.0);
    let grid = cfg.grid()?;
    let p = ode_radial_solve(cfg.k, u0, &grid.ys())?;
    let mut csv = String::from("y,u,uy\n");
    for j in 0..p.ys.len() {
        writeln!(csv, "{},{},{}", p.ys[j], p.u[j], p.uy[j]).unwrap();
    }
    let env = Envelope::new("oracle-ode", cfg.hash(), OdeOut { k: cfg.k, u0, radius: p.radius });
    match out {
        Some(d) => {
            write_file(&d.join("radial.csv"), &csv)?;
            write_json(Some(d), "radial.json", &env)
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn selftest(seed: u64, fault: Option<u32>, out: Option<PathBuf>) -> Result<(), CliError> {
    let outcomes: Vec<Outcome> = acceptance::run(acceptance::Options { fault, seed });
    for o in &outcomes {
        println!("{}", o.line());
    }
    if let Some(d) = out {
        write_json(Some(&d), "selftest.json", &Envelope::new("selftest", hash_of(&(seed, fault)), &outcomes))?;
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Selftest(format!("criteria {}", failed.join(", "))))
    }
}
