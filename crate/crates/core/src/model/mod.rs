//! Geometry, channels, energy harvesting and rate expressions.

pub mod channel;
pub mod harvest;
pub mod rates;
pub mod scenario;
pub mod system;

pub use channel::{free_space_channel, pa_channel, power_share, ChannelModel, ChannelState};
pub use harvest::{harvested_power, EhParams};
pub use rates::{descending_gain_order, noma_rates, noma_sum_rate, tdma_rates};
pub use scenario::{check_positions, is_feasible, uniform_spread, Device, Scenario, POSITION_TOL_M};
pub use system::{dbm_to_watts, watts_to_dbm, SystemConfig, SPEED_OF_LIGHT_M_PER_S};

/// Harvested DC power per device at the given channel gains.
pub fn harvested_powers(gains: &[f64], scenario: &Scenario, config: &SystemConfig) -> Vec<f64> {
    gains
        .iter()
        .zip(&scenario.eh)
        .map(|(g, eh)| harvested_power(config.hap_power_w * g, eh))
        .collect()
}
