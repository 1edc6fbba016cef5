//! Line-of-sight channels between pinching antennas and ground devices.
//!
//! Antenna `n` (zero-based here) radiates a share
//! `beta_n = delta^2 (1 - delta^2)^n` of the power that reaches it, after
//! guided-wave attenuation `10^(-mu l / 10)` over the length `l` from the
//! feed. Its channel to device `k` is the free-space spherical-wave term
//! times the amplitude of that share and the guided-wave phase.

use num_complex::Complex64;

use super::scenario::{Device, Scenario};
use super::system::SystemConfig;
use crate::error::{Error, Result};

/// Radiated power share of antenna `n` (zero-based) under the proportional
/// power model.
pub fn power_share(delta: f64, n: usize) -> f64 {
    let d2 = delta * delta;
    d2 * (1.0 - d2).powi(n as i32)
}

/// Precomputed constants for evaluating antenna channels quickly.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    eta_sqrt: f64,
    free_space_wavenumber: f64,
    guided_wavenumber: f64,
    /// Amplitude attenuation in nepers per metre, `mu ln(10) / 20`.
    amplitude_loss_per_m: f64,
    height_m: f64,
    feed_x_m: f64,
    share_amplitude: Vec<f64>,
}

impl ChannelModel {
    pub fn new(config: &SystemConfig, n_antennas: usize) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            eta_sqrt: config.eta_sqrt(),
            free_space_wavenumber: two_pi / config.wavelength_m(),
            guided_wavenumber: two_pi / config.guided_wavelength_m(),
            amplitude_loss_per_m: config.mu_db_per_m * std::f64::consts::LN_10 / 20.0,
            height_m: config.waveguide_height_m,
            feed_x_m: config.feed_x_m,
            share_amplitude: (0..n_antennas)
                .map(|n| power_share(config.delta, n).sqrt())
                .collect(),
        }
    }

    pub fn n_antennas(&self) -> usize {
        self.share_amplitude.len()
    }

    fn distance(&self, x_pa: f64, device: &Device) -> f64 {
        let dx = device.x_m - x_pa;
        (dx * dx + device.y_m * device.y_m + self.height_m * self.height_m).sqrt()
    }

    /// Channel from antenna `n` placed at `x_pa` to `device`.
    ///
    /// Returns a degenerate-geometry error when the device coincides with
    /// the antenna.
    pub fn coefficient(&self, n: usize, x_pa: f64, device: &Device, k: usize) -> Result<Complex64> {
        if self.distance(x_pa, device) == 0.0 {
            return Err(Error::DegenerateGeometry { antenna: n, device: k });
        }
        Ok(self.coefficient_unchecked(n, x_pa, device))
    }

    #[inline]
    pub(crate) fn coefficient_unchecked(&self, n: usize, x_pa: f64, device: &Device) -> Complex64 {
        let r = self.distance(x_pa, device);
        let guided = (x_pa - self.feed_x_m).abs();
        let amplitude = self.eta_sqrt * self.share_amplitude[n]
            * (-self.amplitude_loss_per_m * guided).exp()
            / r;
        let phase = -(self.free_space_wavenumber * r + self.guided_wavenumber * guided);
        Complex64::from_polar(amplitude, phase)
    }
}

/// Channel from antenna `n` of `scenario` to device `k` (both zero-based).
pub fn pa_channel(scenario: &Scenario, config: &SystemConfig, n: usize, k: usize) -> Result<Complex64> {
    let model = ChannelModel::new(config, scenario.n_antennas());
    model.coefficient(n, scenario.pa_positions_m[n], &scenario.devices[k], k)
}

/// Free-space channel from a conventional antenna at `(x, 0, height)`, with
/// no power split, attenuation or guided phase.
pub fn free_space_channel(config: &SystemConfig, antenna_x_m: f64, device: &Device) -> Result<Complex64> {
    let h = config.waveguide_height_m;
    let dx = device.x_m - antenna_x_m;
    let r = (dx * dx + device.y_m * device.y_m + h * h).sqrt();
    if r == 0.0 {
        return Err(Error::DegenerateGeometry { antenna: 0, device: 0 });
    }
    let k0 = 2.0 * std::f64::consts::PI / config.wavelength_m();
    Ok(Complex64::from_polar(config.eta_sqrt() / r, -k0 * r))
}

/// Per-antenna and aggregate channels for every device.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// `per_pa[n][k]`: antenna `n` to device `k`.
    pub per_pa: Vec<Vec<Complex64>>,
    pub aggregate: Vec<Complex64>,
    /// `|aggregate[k]|^2`.
    pub gain: Vec<f64>,
}

impl ChannelState {
    pub fn compute(scenario: &Scenario, config: &SystemConfig) -> Result<Self> {
        let model = ChannelModel::new(config, scenario.n_antennas());
        Self::with_model(&model, &scenario.pa_positions_m, &scenario.devices)
    }

    pub fn with_model(model: &ChannelModel, positions: &[f64], devices: &[Device]) -> Result<Self> {
        let per_pa = positions
            .iter()
            .enumerate()
            .map(|(n, &x)| {
                devices
                    .iter()
                    .enumerate()
                    .map(|(k, d)| model.coefficient(n, x, d, k))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_per_pa(per_pa, devices.len()))
    }

    /// Builds the state from explicit per-antenna channels.
    pub fn from_per_pa(per_pa: Vec<Vec<Complex64>>, k_devices: usize) -> Self {
        let mut aggregate = vec![Complex64::new(0.0, 0.0); k_devices];
        for row in &per_pa {
            for (acc, h) in aggregate.iter_mut().zip(row) {
                *acc += h;
            }
        }
        let gain = aggregate.iter().map(|h| h.norm_sqr()).collect();
        Self {
            per_pa,
            aggregate,
            gain,
        }
    }

    /// Moves antenna `n` to `x_pa`, updating only its row and the aggregates.
    pub fn move_pa(&mut self, model: &ChannelModel, devices: &[Device], n: usize, x_pa: f64) -> Result<()> {
        for (k, d) in devices.iter().enumerate() {
            let new = model.coefficient(n, x_pa, d, k)?;
            let old = std::mem::replace(&mut self.per_pa[n][k], new);
            self.aggregate[k] += new - old;
            self.gain[k] = self.aggregate[k].norm_sqr();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::harvest::EhParams;
    use std::f64::consts::PI;

    fn single(delta: f64, x: f64, dev: Device) -> (Scenario, SystemConfig) {
        let cfg = SystemConfig {
            delta,
            ..Default::default()
        };
        (Scenario::uniform(vec![x], vec![dev], EhParams::default(), 0.0), cfg)
    }

    #[test]
    fn zero_delta_kills_channel() {
        let (sc, cfg) = single(0.0, 2.0, Device::new(4.0, 1.0));
        let h = pa_channel(&sc, &cfg, 0, 0).unwrap();
        assert_eq!(h, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn antenna_at_feed_above_device() {
        let (sc, cfg) = single(0.6, 0.0, Device::new(0.0, 0.0));
        let h = pa_channel(&sc, &cfg, 0, 0).unwrap();
        // c / (4 pi 28 GHz) = 8.52024e-4 with c = 299792458 m/s.
        let expected = 299_792_458.0 / (4.0 * PI * 28e9) * 0.6 / 3.0;
        assert!((h.norm() - expected).abs() < 1e-15);
        assert!((h.norm() - 1.70405e-4).abs() < 1e-9);
        let lambda = 299_792_458.0 / 28e9;
        let want = (-2.0 * PI * 3.0 / lambda).rem_euclid(2.0 * PI);
        let got = h.arg().rem_euclid(2.0 * PI);
        let diff = (want - got).abs();
        assert!(diff.min(2.0 * PI - diff) < 1e-9);
    }

    #[test]
    fn second_antenna_share() {
        assert!((power_share(0.6, 1) - 0.2304).abs() < 1e-15);
        let cfg = SystemConfig {
            mu_db_per_m: 0.0,
            ..Default::default()
        };
        let model = ChannelModel::new(&cfg, 2);
        let dev = Device::new(1.0, 0.5);
        let h0 = model.coefficient(0, 1.0, &dev, 0).unwrap();
        let h1 = model.coefficient(1, 1.0, &dev, 0).unwrap();
        assert!((h1.norm() / h0.norm() - 0.48 / 0.6).abs() < 1e-12);
    }

    #[test]
    fn guided_loss_in_db_per_metre() {
        let cfg = SystemConfig {
            mu_db_per_m: 0.2,
            ..Default::default()
        };
        let model = ChannelModel::new(&cfg, 1);
        let dev = Device::new(5.0, 0.0);
        let lossless = ChannelModel::new(
            &SystemConfig {
                mu_db_per_m: 0.0,
                ..cfg.clone()
            },
            1,
        );
        let ratio = model.coefficient(0, 5.0, &dev, 0).unwrap().norm_sqr()
            / lossless.coefficient(0, 5.0, &dev, 0).unwrap().norm_sqr();
        // 5 m at 0.2 dB/m is 1 dB.
        assert!((ratio - 10f64.powf(-0.1)).abs() < 1e-12);
    }

    #[test]
    fn single_antenna_aggregate_is_the_row() {
        let cfg = SystemConfig::default();
        let sc = Scenario::uniform(
            vec![3.0],
            vec![Device::new(1.0, 2.0), Device::new(7.0, -1.0)],
            EhParams::default(),
            0.0,
        );
        let st = ChannelState::compute(&sc, &cfg).unwrap();
        assert_eq!(st.aggregate, st.per_pa[0]);
    }

    #[test]
    fn coherent_and_destructive_sums() {
        let h = Complex64::new(1e-4, -2e-4);
        let st = ChannelState::from_per_pa(vec![vec![h], vec![h]], 1);
        assert!((st.gain[0] - 4.0 * h.norm_sqr()).abs() < 1e-24);
        let st = ChannelState::from_per_pa(vec![vec![h], vec![-h]], 1);
        assert_eq!(st.gain[0], 0.0);
    }

    #[test]
    fn degenerate_geometry_detected() {
        let cfg = SystemConfig {
            waveguide_height_m: 1e-300,
            ..Default::default()
        };
        let model = ChannelModel::new(&cfg, 1);
        let err = model.coefficient(0, 2.0, &Device::new(2.0, 0.0), 3).unwrap_err();
        assert_eq!(err, Error::DegenerateGeometry { antenna: 0, device: 3 });
    }

    #[test]
    fn free_space_under_antenna() {
        let cfg = SystemConfig::default();
        let h = free_space_channel(&cfg, 0.0, &Device::new(0.0, 0.0)).unwrap();
        let eta = cfg.eta_sqrt().powi(2);
        assert!((h.norm_sqr() - eta / 9.0).abs() < 1e-20);
    }
}
