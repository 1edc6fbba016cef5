//! Time and power allocation for fixed antenna positions.
//!
//! Both protocols use every joule harvested during the power-transfer slot,
//! so each device's transmit power follows from its slot length:
//! `t_k (p_k + p_c) = t0 Phi_k` (TDMA) or `t1 (p_k + p_c) = t0 Phi_k` (NOMA).
//! What remains is a concave problem in the slot lengths alone.

mod noma;
pub mod search;
mod tdma;

use serde::{Deserialize, Serialize};

pub use noma::solve_noma;
pub use tdma::{solve_tdma, tdma_equal_snr_closed_form};

use crate::error::{Error, Result};
use crate::model::{noma_sum_rate, tdma_rates};

/// Search interval for the power-transfer slot is `[EDGE, 1 - EDGE]`.
pub const T0_EDGE: f64 = 1e-9;
/// Slack on `t0 + sum t <= 1`.
pub const TIME_SLACK: f64 = 1e-9;
/// Slack on the per-device energy constraint, in joules.
pub const ENERGY_SLACK_J: f64 = 1e-12;
/// Slot length used when the objective is flat in `t0`.
pub const FLAT_T0: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTolerance {
    /// Width of the final bracket on `t0`.
    pub t0: f64,
    /// Relative width of the final bracket on the slot multiplier.
    pub multiplier: f64,
}

impl Default for SolverTolerance {
    fn default() -> Self {
        Self {
            t0: 1e-9,
            multiplier: 1e-10,
        }
    }
}

impl SolverTolerance {
    fn validate(&self) -> Result<()> {
        if self.t0 > 0.0 && self.multiplier > 0.0 {
            Ok(())
        } else {
            Err(Error::Tolerance(format!("tolerances must be positive: {self:?}")))
        }
    }
}

/// Harvest-then-transmit TDMA schedule: power transfer for `t0`, then device
/// `k` alone for `t[k]` at power `p[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdmaAllocation {
    pub t0: f64,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub value_bits: f64,
}

/// Harvest-then-transmit NOMA schedule: power transfer for `t0`, then all
/// devices together for `t1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NomaAllocation {
    pub t0: f64,
    pub t1: f64,
    pub p: Vec<f64>,
    pub value_bits: f64,
}

impl TdmaAllocation {
    /// Checks time budget, nonnegativity and energy causality.
    pub fn check(&self, phi: &[f64], circuit_power_w: &[f64]) -> Result<()> {
        let total = self.t0 + self.t.iter().sum::<f64>();
        if total > 1.0 + TIME_SLACK {
            return Err(Error::infeasible(format!("slots sum to {total}"), None));
        }
        if self.t0 < 0.0 {
            return Err(Error::infeasible("negative power-transfer slot", None));
        }
        for k in 0..self.t.len() {
            if self.t[k] < 0.0 || self.p[k] < 0.0 {
                return Err(Error::infeasible("negative slot or power", Some(k)));
            }
            let spent = self.t[k] * (self.p[k] + circuit_power_w[k]);
            if spent > self.t0 * phi[k] + ENERGY_SLACK_J {
                return Err(Error::infeasible(
                    format!("spends {spent} J but harvests {} J", self.t0 * phi[k]),
                    Some(k),
                ));
            }
        }
        Ok(())
    }
}

impl NomaAllocation {
    pub fn check(&self, phi: &[f64], circuit_power_w: &[f64]) -> Result<()> {
        if self.t0 + self.t1 > 1.0 + TIME_SLACK {
            return Err(Error::infeasible(format!("slots sum to {}", self.t0 + self.t1), None));
        }
        if self.t0 < 0.0 || self.t1 < 0.0 {
            return Err(Error::infeasible("negative slot", None));
        }
        for k in 0..self.p.len() {
            if self.p[k] < 0.0 {
                return Err(Error::infeasible("negative power", Some(k)));
            }
            let spent = self.t1 * (self.p[k] + circuit_power_w[k]);
            if spent > self.t0 * phi[k] + ENERGY_SLACK_J {
                return Err(Error::infeasible(
                    format!("spends {spent} J but harvests {} J", self.t0 * phi[k]),
                    Some(k),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Tdma,
    Noma,
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::Tdma => "tdma",
            Protocol::Noma => "noma",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tdma" => Ok(Protocol::Tdma),
            "noma" => Ok(Protocol::Noma),
            other => Err(Error::invalid("protocol", format!("unknown protocol `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "lowercase")]
pub enum Allocation {
    Tdma(TdmaAllocation),
    Noma(NomaAllocation),
}

impl Allocation {
    pub fn protocol(&self) -> Protocol {
        match self {
            Allocation::Tdma(_) => Protocol::Tdma,
            Allocation::Noma(_) => Protocol::Noma,
        }
    }

    pub fn value_bits(&self) -> f64 {
        match self {
            Allocation::Tdma(a) => a.value_bits,
            Allocation::Noma(a) => a.value_bits,
        }
    }

    pub fn t0(&self) -> f64 {
        match self {
            Allocation::Tdma(a) => a.t0,
            Allocation::Noma(a) => a.t0,
        }
    }

    /// Sum rate of this schedule over channels with the given gains.
    pub fn sum_rate(&self, gains: &[f64], noise_w: f64) -> f64 {
        match self {
            Allocation::Tdma(a) => tdma_rates(a, gains, noise_w).iter().sum(),
            Allocation::Noma(a) => noma_sum_rate(a, gains, noise_w),
        }
    }

    pub fn check(&self, phi: &[f64], circuit_power_w: &[f64]) -> Result<()> {
        match self {
            Allocation::Tdma(a) => a.check(phi, circuit_power_w),
            Allocation::Noma(a) => a.check(phi, circuit_power_w),
        }
    }
}

/// Solves the allocation problem of `protocol`.
pub fn solve(
    protocol: Protocol,
    gains: &[f64],
    phi: &[f64],
    circuit_power_w: &[f64],
    noise_w: f64,
    tol: &SolverTolerance,
) -> Result<Allocation> {
    Ok(match protocol {
        Protocol::Tdma => Allocation::Tdma(solve_tdma(gains, phi, circuit_power_w, noise_w, tol)?),
        Protocol::Noma => Allocation::Noma(solve_noma(gains, phi, circuit_power_w, noise_w, tol)?),
    })
}

fn check_inputs(gains: &[f64], phi: &[f64], circuit_power_w: &[f64], noise_w: f64) -> Result<()> {
    let k = gains.len();
    if k == 0 || phi.len() != k || circuit_power_w.len() != k {
        return Err(Error::Domain(format!(
            "expected matching nonempty inputs, got {} gains, {} harvested powers, {} circuit powers",
            k,
            phi.len(),
            circuit_power_w.len()
        )));
    }
    if !(noise_w > 0.0) {
        return Err(Error::Domain(format!("noise power {noise_w} must be positive")));
    }
    for (name, xs) in [("gain", gains), ("harvested power", phi), ("circuit power", circuit_power_w)] {
        if let Some(v) = xs.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("{name} {v} must be finite and nonnegative")));
        }
    }
    if phi.iter().all(|&p| p <= 0.0) {
        return Err(Error::infeasible("no device harvests any energy", None));
    }
    Ok(())
}
