use serde::{Deserialize, Serialize};

use crate::contour::SearchParams;
use crate::ode_core::IntegratorOptions;

/// Numerical tolerances shared by every stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Zeros closer than this in `ρ = √λ` are one eigenvalue.
    pub cluster: f64,
    /// Relative distance at which a perturbed eigenvalue is identified with `μ_n`.
    pub snap: f64,
    /// Relative threshold for declaring `a_n` or `b_n` zero.
    pub tol_zero: f64,
    pub cauchy_nodes: usize,
    pub winding_nodes: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            cluster: 1e-6,
            snap: 1e-6,
            tol_zero: 1e-7,
            cauchy_nodes: 64,
            winding_nodes: 16,
        }
    }
}

impl Tolerances {
    pub fn integrator(&self) -> IntegratorOptions {
        IntegratorOptions {
            rtol: self.rtol,
            atol: self.atol,
        }
    }

    pub fn search(&self) -> SearchParams {
        SearchParams {
            cluster_rho: self.cluster,
            winding_nodes: self.winding_nodes,
        }
    }
}
