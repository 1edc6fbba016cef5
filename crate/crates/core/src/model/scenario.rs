use serde::{Deserialize, Serialize};

use super::harvest::EhParams;
use super::system::SystemConfig;
use crate::error::{Error, Result};

/// Slack allowed when checking spacing and span constraints, in metres.
///
/// Positions built as `x + spacing` can land one ulp short of the exact gap.
pub const POSITION_TOL_M: f64 = 1e-12;

/// Ground-level device position; the device is at height zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub x_m: f64,
    pub y_m: f64,
}

impl Device {
    pub fn new(x_m: f64, y_m: f64) -> Self {
        Self { x_m, y_m }
    }
}

/// One problem instance: antenna positions along the waveguide plus devices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub pa_positions_m: Vec<f64>,
    pub devices: Vec<Device>,
    pub eh: Vec<EhParams>,
    pub circuit_power_w: Vec<f64>,
}

impl Scenario {
    /// Builds a scenario where every device shares the same harvester and
    /// circuit power.
    pub fn uniform(
        pa_positions_m: Vec<f64>,
        devices: Vec<Device>,
        eh: EhParams,
        circuit_power_w: f64,
    ) -> Self {
        let k = devices.len();
        Self {
            pa_positions_m,
            devices,
            eh: vec![eh; k],
            circuit_power_w: vec![circuit_power_w; k],
        }
    }

    pub fn n_antennas(&self) -> usize {
        self.pa_positions_m.len()
    }

    pub fn k_devices(&self) -> usize {
        self.devices.len()
    }

    pub fn validate(&self, config: &SystemConfig) -> Result<()> {
        if self.pa_positions_m.is_empty() {
            return Err(Error::invalid("n_antennas", "at least one antenna is required"));
        }
        if self.devices.is_empty() {
            return Err(Error::invalid("k_devices", "at least one device is required"));
        }
        let k = self.devices.len();
        if self.eh.len() != k || self.circuit_power_w.len() != k {
            return Err(Error::invalid(
                "devices",
                "per-device harvester and circuit power lists must match the device count",
            ));
        }
        for eh in &self.eh {
            eh.validate()?;
        }
        if let Some(p) = self
            .circuit_power_w
            .iter()
            .find(|p| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::invalid("circuit_power_w", format!("{p} must be nonnegative")));
        }
        if self
            .devices
            .iter()
            .any(|d| !(d.x_m.is_finite() && d.y_m.is_finite()))
        {
            return Err(Error::invalid("devices", "device coordinates must be finite"));
        }
        check_positions(&self.pa_positions_m, config.waveguide_span_m, config.min_spacing_m)
    }
}

/// Checks the span and minimum-spacing constraints on an antenna layout.
pub fn check_positions(x: &[f64], span_m: f64, min_spacing_m: f64) -> Result<()> {
    for (n, &xn) in x.iter().enumerate() {
        if !(xn >= -POSITION_TOL_M && xn <= span_m + POSITION_TOL_M) {
            return Err(Error::invalid(
                "pa_positions_m",
                format!("antenna {n} at {xn} m lies outside [0, {span_m}]"),
            ));
        }
    }
    for (n, pair) in x.windows(2).enumerate() {
        if pair[1] - pair[0] < min_spacing_m - POSITION_TOL_M {
            return Err(Error::invalid(
                "pa_positions_m",
                format!(
                    "antennas {n} and {} are {} m apart, below the {min_spacing_m} m minimum",
                    n + 1,
                    pair[1] - pair[0]
                ),
            ));
        }
    }
    Ok(())
}

pub fn is_feasible(x: &[f64], span_m: f64, min_spacing_m: f64) -> bool {
    check_positions(x, span_m, min_spacing_m).is_ok()
}

/// Evenly spread layout, antenna `n` at `(n + 1/2) * span / N`.
pub fn uniform_spread(n_antennas: usize, span_m: f64) -> Vec<f64> {
    let step = span_m / n_antennas as f64;
    (0..n_antennas).map(|n| (n as f64 + 0.5) * step).collect()
}
