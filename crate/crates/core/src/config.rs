//! Pipeline configuration: tolerances, budgets, grids and stage
//! selection. Defaults follow the global tolerance ladder (feasibility
//! 1e-9, optimality 1e-8, stationarity/duality 1e-7, margins 1e-6).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stages {
    pub first: bool,
    pub second: bool,
    pub jacobian: bool,
    pub oracle: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Stages {
            first: true,
            second: true,
            jacobian: true,
            oracle: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Activation tolerance; `None` scales with the constraint values.
    pub eps_act: Option<f64>,
    pub tol_stationarity: f64,
    pub tol_duality: f64,
    /// Threshold on the normalized dual directional value below which a
    /// direction counts as critical.
    pub critical_threshold: f64,
    /// Margin separating "necessary-consistent" from both "refuted" and
    /// "sufficient-certified" in the second-order quadratic tests.
    pub margin: f64,
    /// Direction budget per cone (extreme rays always included on top).
    pub budget: usize,
    /// Grid points per axis for the oracle stage.
    pub resolution: usize,
    /// Localization radii for the oracle stage.
    pub deltas: Vec<f64>,
    /// Calmness modulus for the oracle; `None` uses the certifier estimate.
    pub kappa: Option<f64>,
    /// Constraint feasibility tolerance for grid points.
    pub feas_tol: f64,
    pub rcrcq_samples: usize,
    pub rcrcq_radius: f64,
    pub seed: u64,
    pub format: OutputFormat,
    pub stages: Stages,
    pub fail_fast: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eps_act: None,
            tol_stationarity: 1e-7,
            tol_duality: 1e-7,
            critical_threshold: 1e-6,
            margin: 1e-6,
            budget: 64,
            resolution: 41,
            deltas: vec![0.2, 0.1, 0.05],
            kappa: None,
            feas_tol: 1e-9,
            rcrcq_samples: 16,
            rcrcq_radius: 1e-3,
            seed: 0,
            format: OutputFormat::Text,
            stages: Stages::default(),
            fail_fast: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("tol_stationarity", self.tol_stationarity),
            ("tol_duality", self.tol_duality),
            ("critical_threshold", self.critical_threshold),
            ("margin", self.margin),
            ("feas_tol", self.feas_tol),
        ] {
            if !(v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(e) = self.eps_act {
            if !(e >= 0.0) {
                return Err(format!("eps_act must be nonnegative, got {e}"));
            }
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0) {
                return Err(format!("kappa must be positive, got {k}"));
            }
        }
        if self.resolution < 3 {
            return Err(format!(
                "resolution must be at least 3, got {}",
                self.resolution
            ));
        }
        if self.deltas.iter().any(|d| !(*d > 0.0)) {
            return Err("all deltas must be positive".into());
        }
        if self.budget == 0 {
            return Err("direction budget must be positive".into());
        }
        Ok(())
    }
}
