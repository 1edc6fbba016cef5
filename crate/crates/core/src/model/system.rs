use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Converts a dBm figure to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Physical and protocol constants shared by every scenario.
///
/// Powers are in watts. The waveguide runs along the x axis at height
/// `waveguide_height_m`; the feed point sits at `(feed_x_m, 0, height)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub carrier_frequency_hz: f64,
    /// Effective refractive index of the dielectric waveguide.
    pub effective_index: f64,
    /// Power distribution factor, `sin(coupling * length)`.
    pub delta: f64,
    /// Guided-wave attenuation.
    pub mu_db_per_m: f64,
    pub hap_power_w: f64,
    pub noise_power_w: f64,
    pub min_spacing_m: f64,
    pub waveguide_span_m: f64,
    pub waveguide_height_m: f64,
    pub feed_x_m: f64,
    pub period_s: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let carrier_frequency_hz = 28e9;
        Self {
            carrier_frequency_hz,
            effective_index: 1.4,
            delta: 0.6,
            mu_db_per_m: 0.2,
            hap_power_w: dbm_to_watts(40.0),
            noise_power_w: dbm_to_watts(-120.0),
            min_spacing_m: SPEED_OF_LIGHT_M_PER_S / carrier_frequency_hz / 2.0,
            waveguide_span_m: 10.0,
            waveguide_height_m: 3.0,
            feed_x_m: 0.0,
            period_s: 1.0,
        }
    }
}

impl SystemConfig {
    /// Free-space wavelength.
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_PER_S / self.carrier_frequency_hz
    }

    /// Wavelength inside the waveguide.
    pub fn guided_wavelength_m(&self) -> f64 {
        self.wavelength_m() / self.effective_index
    }

    /// Square root of the free-space path-gain constant, `c / (4 pi f_c)`.
    pub fn eta_sqrt(&self) -> f64 {
        SPEED_OF_LIGHT_M_PER_S / (4.0 * std::f64::consts::PI * self.carrier_frequency_hz)
    }

    pub fn validate(&self) -> Result<()> {
        positive("carrier_frequency_hz", self.carrier_frequency_hz)?;
        positive("effective_index", self.effective_index)?;
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::invalid("delta", format!("{} is outside [0, 1]", self.delta)));
        }
        if !(self.mu_db_per_m >= 0.0 && self.mu_db_per_m.is_finite()) {
            return Err(Error::invalid(
                "mu_db_per_m",
                format!("{} must be a nonnegative finite number", self.mu_db_per_m),
            ));
        }
        positive("hap_power_w", self.hap_power_w)?;
        positive("noise_power_w", self.noise_power_w)?;
        positive("min_spacing_m", self.min_spacing_m)?;
        positive("waveguide_span_m", self.waveguide_span_m)?;
        positive("waveguide_height_m", self.waveguide_height_m)?;
        positive("period_s", self.period_s)?;
        if !self.feed_x_m.is_finite() {
            return Err(Error::invalid("feed_x_m", "must be finite"));
        }
        Ok(())
    }

    /// Largest number of antennas that fit on the waveguide at minimum spacing.
    pub fn max_antennas(&self) -> usize {
        (self.waveguide_span_m / self.min_spacing_m).floor() as usize
    }
}

pub(crate) fn positive(key: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("{value} must be strictly positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        assert!((cfg.hap_power_w - 10.0).abs() < 1e-12);
        assert!((cfg.noise_power_w - 1e-15).abs() < 1e-27);
        assert!((cfg.min_spacing_m - cfg.wavelength_m() / 2.0).abs() < 1e-15);
        assert!((cfg.guided_wavelength_m() * 1.4 - cfg.wavelength_m()).abs() < 1e-15);
    }

    #[test]
    fn dbm_roundtrip() {
        for dbm in [-120.0, -30.0, 0.0, 40.0] {
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-9);
        }
        assert_eq!(dbm_to_watts(30.0), 1.0);
    }

    #[test]
    fn rejects_bad_delta() {
        let cfg = SystemConfig {
            delta: 1.2,
            ..Default::default()
        };
        match cfg.validate() {
            Err(Error::InvalidConfig { key, .. }) => assert_eq!(key, "delta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_nonpositive_power() {
        let cfg = SystemConfig {
            hap_power_w: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
