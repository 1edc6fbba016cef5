//! Logistic (saturating) energy-harvesting model.
//!
//! The raw logistic curve `Psi(P) = Z / (1 + exp(-a (P - b)))` is shifted and
//! rescaled so that zero input yields zero output:
//!
//! ```text
//! Phi(P) = (Psi(P) - Z * Omega) / (1 - Omega),   Omega = 1 / (1 + exp(a b))
//! ```
//!
//! Algebraically this collapses to `Z (1 - exp(-a P)) / (1 + exp(a (b - P)))`,
//! which is what [`harvested_power`] evaluates; the subtraction form loses
//! digits at the microwatt input levels seen in practice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EhParams {
    /// Logistic steepness.
    pub a: f64,
    /// Logistic turning point, in watts.
    pub b: f64,
    /// Saturation power, in watts.
    pub z: f64,
}

impl Default for EhParams {
    fn default() -> Self {
        Self {
            a: 150.0,
            b: 0.014,
            z: 0.024,
        }
    }
}

impl EhParams {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("eh.a", self.a), ("eh.b", self.b), ("eh.z", self.z)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(key, format!("{v} must be strictly positive")));
            }
        }
        Ok(())
    }

    /// `Omega = 1 / (1 + exp(a b))`, the logistic output at zero input
    /// relative to saturation.
    pub fn omega(&self) -> f64 {
        1.0 / (1.0 + (self.a * self.b).exp())
    }
}

/// DC power harvested from `received_power_w` of RF input.
///
/// Zero at zero input, strictly increasing, saturating at `eh.z`.
pub fn harvested_power(received_power_w: f64, eh: &EhParams) -> f64 {
    debug_assert!(received_power_w >= 0.0);
    let p = received_power_w.max(0.0);
    let rise = -(-eh.a * p).exp_m1();
    let denom = 1.0 + (eh.a * (eh.b - p)).exp();
    (eh.z * rise / denom).clamp(0.0, eh.z)
}
