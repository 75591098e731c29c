//! Numerical defaults shared by the library and the scenario runner.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub tol_flow: f64,
    pub tol_quad: f64,
    /// Bound for identities checked through finite-difference velocities.
    pub tol_identity: f64,
    pub steps: usize,
    pub osc_resolution: usize,
    /// Quadrature nodes per circle coordinate.
    pub quad_grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_flow: 1e-8,
            tol_quad: 1e-6,
            tol_identity: 1e-5,
            steps: 1024,
            osc_resolution: 256,
            quad_grid: 64,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol_flow > 0.0 && self.tol_quad > 0.0 && self.tol_identity > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if self.steps == 0 || self.quad_grid < 2 {
            return Err("steps and quad_grid must be positive".into());
        }
        if self.osc_resolution < 8 {
            return Err("osc_resolution must be at least 8".into());
        }
        Ok(())
    }
}
