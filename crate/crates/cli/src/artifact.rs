//! End artifacts on disk: `end.csv` (x,y,u) and `solve_report.json`.

use kend::endsolver::SolveReport;
use kend::grid::EndFunction;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::config::RunConfig;
use crate::{report, CliError};

pub const GRID_FILE: &str = "end.csv";
pub const REPORT_FILE: &str = "solve_report.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveBody {
    pub config: RunConfig,
    pub report: SolveReport,
}

pub fn grid_csv(end: &EndFunction) -> String {
    let g = &end.grid;
    let mut s = String::from("x,y,u\n");
    for j in 0..g.ny {
        for i in 0..g.nx {
            writeln!(s, "{},{},{}", g.x(i), g.y(j), end.at(i, j)).unwrap();
        }
    }
    s
}

pub fn write(dir: &Path, cfg: &RunConfig, end: &EndFunction, rep: &SolveReport) -> Result<(), CliError> {
    report::write_file(&dir.join(GRID_FILE), &grid_csv(end))?;
    let body = SolveBody { config: cfg.clone(), report: rep.clone() };
    report::write_json(Some(dir), REPORT_FILE, &report::Envelope::new("solve-end", cfg.hash(), body))
}

/// Reads an artifact directory back into its configuration and end.
pub fn read(dir: &Path) -> Result<(RunConfig, EndFunction), CliError> {
    let usage = |m: String| CliError::Usage(m);
    let rpath = dir.join(REPORT_FILE);
    let text = std::fs::read_to_string(&rpath).map_err(|e| usage(format!("cannot read {}: {e}", rpath.display())))?;
    let env: report::Envelope<SolveBody> =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid {}: {e}", rpath.display())))?;
    let cfg = env.body.config;
    cfg.validate()?;
    let grid = cfg.grid()?;
    let gpath = dir.join(GRID_FILE);
    let csv = std::fs::read_to_string(&gpath).map_err(|e| usage(format!("cannot read {}: {e}", gpath.display())))?;
    let mut lines = csv.lines();
    if lines.next() != Some("x,y,u") {
        return Err(usage(format!("{}: missing x,y,u header", gpath.display())));
    }
    let values = lines
        .enumerate()
        .map(|(n, l)| {
            l.rsplit(',')
                .next()
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| usage(format!("{}: bad line {}", gpath.display(), n + 2)))
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    let end = EndFunction::new(cfg.k, grid, values).map_err(|e| usage(format!("{}: {e}", gpath.display())))?;
    Ok((cfg, end))
}
