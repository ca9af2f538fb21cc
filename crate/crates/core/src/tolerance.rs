use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every positivity verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative slack for PSD verdicts, scaled by `max(1, ‖x‖_F)`.
    pub psd_slack: f64,
    /// Off-diagonal mass at which the Jacobi sweep stops, relative to `‖x‖_F`.
    pub eig_offdiag: f64,
    /// Generic convergence / equality threshold.
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd_slack: 1e-9,
            eig_offdiag: 1e-12,
            convergence: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn new(psd_slack: f64, eig_offdiag: f64, convergence: f64) -> Result<Self> {
        let tol = Self {
            psd_slack,
            eig_offdiag,
            convergence,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("psd_slack", self.psd_slack),
            ("eig_offdiag", self.eig_offdiag),
            ("convergence", self.convergence),
        ] {
            if !(v > 0.0 && v < 1e-3) {
                return Err(Error::Tolerance(format!("{name} = {v} outside (0, 1e-3)")));
            }
        }
        Ok(())
    }

    pub fn with_psd_slack(mut self, psd_slack: f64) -> Result<Self> {
        self.psd_slack = psd_slack;
        self.validate()?;
        Ok(self)
    }

    /// Absolute PSD threshold for a matrix of Frobenius norm `norm`.
    pub fn psd_threshold(&self, norm: f64) -> f64 {
        self.psd_slack * norm.max(1.0)
    }
}
