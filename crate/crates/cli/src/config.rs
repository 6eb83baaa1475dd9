//! Run configuration: parsing, validation and hashing.

use kend::fixtures::Boundary;
use kend::grid::EndGrid;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub k: f64,
    #[serde(default = "one")]
    pub m: u32,
    #[serde(rename = "Nx", default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(rename = "Ny", default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    pub boundary: BoundarySpec,
    #[serde(default = "default_tol")]
    pub newton_tol: f64,
}

fn one() -> u32 {
    1
}

fn default_tol() -> f64 {
    1e-10
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.k > 0.0 && self.k < 1.0) {
            return bad(format!("k = {} must lie in (0, 1)", self.k));
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        let given = [self.nx.is_some(), self.ny.is_some(), self.y_max.is_some()];
        if given.iter().any(|&g| g) && !given.iter().all(|&g| g) {
            return bad("Nx, Ny and Y must be given together".into());
        }
        if let Some(y) = self.y_max {
            if !(y > 0.0 && y.is_finite()) {
                return bad(format!("Y = {y} must be positive"));
            }
        }
        let coeffs = self.boundary.cos.iter().chain(&self.boundary.sin);
        if coeffs.clone().any(|c| !c.is_finite()) {
            return bad("boundary coefficients must be finite".into());
        }
        if self.boundary.cos.is_empty() && self.boundary.sin.is_empty() {
            return bad("boundary has no coefficients".into());
        }
        if !(self.newton_tol > 0.0) {
            return bad(format!("newton_tol = {} must be positive", self.newton_tol));
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<EndGrid>, CliError> {
        let g = match (self.nx, self.ny, self.y_max) {
            (Some(nx), Some(ny), Some(y)) => EndGrid::new(self.m, nx, ny, y),
            _ => EndGrid::default_for(self.k, self.m),
        };
        g.map(Arc::new).map_err(|e| CliError::Usage(format!("invalid grid: {e}")))
    }

    pub fn boundary(&self) -> Boundary {
        Boundary { cos: self.boundary.cos.clone(), sin: self.boundary.sin.clone() }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        crate::report::hash_of(self)
    }
}
