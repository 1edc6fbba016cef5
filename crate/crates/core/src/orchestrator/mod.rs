//! Alternating optimisation of allocation and antenna placement, the
//! fixed-antenna baseline, and seeded parameter sweeps.

mod fitness;
pub mod output;
mod sweep;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use fitness::{PlacementObjective, RateFitness};
pub use sweep::{run_sweep, RowStatus, SweepAxis, SweepResult, SweepRow, SweepSpec};

use crate::allocator::{self, Allocation, Protocol, SolverTolerance};
use crate::error::{Error, Result};
use crate::model::{
    free_space_channel, harvested_powers, uniform_spread, ChannelModel, ChannelState, Device, EhParams, Scenario,
    SystemConfig,
};
use crate::placement::{ew_optimize, spde_optimize, EwConfig, PlacementProblem, SpdeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Element-wise grid search placement.
    Ew,
    /// Stochastic-parameter differential evolution placement.
    Spde,
    /// One conventional antenna at the feed point; no placement.
    Conv,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Ew => "ew",
            Algorithm::Spde => "spde",
            Algorithm::Conv => "conv",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ew" => Ok(Algorithm::Ew),
            "spde" => Ok(Algorithm::Spde),
            "conv" => Ok(Algorithm::Conv),
            other => Err(Error::invalid("algo", format!("unknown algorithm `{other}`"))),
        }
    }
}

/// How scenarios are drawn: devices uniform over `[0, area_x] x
/// [-area_y / 2, area_y / 2]`, antennas evenly spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTemplate {
    pub n_antennas: usize,
    pub k_devices: usize,
    pub area_x_m: f64,
    pub area_y_m: f64,
    pub eh: EhParams,
    pub circuit_power_w: f64,
}

impl Default for ScenarioTemplate {
    fn default() -> Self {
        Self {
            n_antennas: 6,
            k_devices: 10,
            area_x_m: 10.0,
            area_y_m: 6.0,
            eh: EhParams::default(),
            circuit_power_w: 1e-7,
        }
    }
}

/// Draws a scenario. Devices are sampled before anything else, so the same
/// seed gives the same devices whatever the antenna count.
pub fn generate_scenario(seed: u64, template: &ScenarioTemplate, config: &SystemConfig) -> Result<Scenario> {
    if template.k_devices == 0 || template.n_antennas == 0 {
        return Err(Error::invalid("k_devices", "device and antenna counts must be at least 1"));
    }
    if !(template.area_x_m >= 0.0 && template.area_y_m >= 0.0) {
        return Err(Error::invalid("area_x_m", "deployment area must be nonnegative"));
    }
    if template.n_antennas as f64 * config.min_spacing_m > config.waveguide_span_m {
        return Err(Error::InfeasibleGeometry {
            n_antennas: template.n_antennas,
            min_spacing_m: config.min_spacing_m,
            span_m: config.waveguide_span_m,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_y = template.area_y_m / 2.0;
    let devices = (0..template.k_devices)
        .map(|_| {
            let x = rng.gen::<f64>() * template.area_x_m;
            let y = (rng.gen::<f64>() - 0.5) * 2.0 * half_y;
            Device::new(x, y)
        })
        .collect();
    Ok(Scenario::uniform(
        uniform_spread(template.n_antennas, config.waveguide_span_m),
        devices,
        template.eh,
        template.circuit_power_w,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoSettings {
    pub ew: EwConfig,
    pub spde: SpdeConfig,
    pub objective: PlacementObjective,
    pub max_ao_iters: usize,
    /// Relative improvement at or below which the alternation stops.
    pub tol: f64,
    #[serde(skip)]
    pub solver: SolverTolerance,
}

impl Default for AoSettings {
    fn default() -> Self {
        Self {
            ew: EwConfig::default(),
            spde: SpdeConfig::default(),
            objective: PlacementObjective::default(),
            max_ao_iters: 30,
            tol: 1e-4,
            solver: SolverTolerance::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AoReport {
    pub protocol: Protocol,
    pub algorithm: Algorithm,
    /// Sum rate (bits per Hz over one period) after the initial allocation
    /// and after each alternation.
    pub objective_trace: Vec<f64>,
    pub final_positions: Vec<f64>,
    /// Slot lengths here are fractions of the period.
    pub final_allocation: Allocation,
    pub final_gains: Vec<f64>,
    pub ao_iterations: usize,
    pub fitness_evaluations: usize,
    pub wall_time_s: f64,
}

impl AoReport {
    pub fn sum_rate_bits(&self) -> f64 {
        *self.objective_trace.last().expect("trace always holds the initial value")
    }
}

struct Evaluated {
    state: ChannelState,
    allocation: Allocation,
}

fn allocate_at(
    model: &ChannelModel,
    scenario: &Scenario,
    config: &SystemConfig,
    positions: &[f64],
    protocol: Protocol,
    tol: &SolverTolerance,
) -> Result<Evaluated> {
    let state = ChannelState::with_model(model, positions, &scenario.devices)?;
    let phi = harvested_powers(&state.gain, scenario, config);
    let allocation = allocator::solve(protocol, &state.gain, &phi, &scenario.circuit_power_w, config.noise_power_w, tol)?;
    Ok(Evaluated { state, allocation })
}

fn mix_seed(base: u64, salt: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Alternates allocation (antennas fixed) and placement (schedule fixed),
/// starting from the scenario's antenna positions.
///
/// A placement step whose re-solved allocation does not beat the current
/// sum rate is discarded and ends the alternation, so the trace never
/// decreases. The reported allocation is always solved at the reported
/// positions.
pub fn ao_solve(
    scenario: &Scenario,
    config: &SystemConfig,
    protocol: Protocol,
    algorithm: Algorithm,
    settings: &AoSettings,
) -> Result<AoReport> {
    if algorithm == Algorithm::Conv {
        return baseline_fixed_antenna(scenario, config, protocol, settings);
    }
    let started = Instant::now();
    config.validate()?;
    scenario.validate(config)?;
    let model = ChannelModel::new(config, scenario.n_antennas());
    let mut positions = scenario.pa_positions_m.clone();
    let mut current = allocate_at(&model, scenario, config, &positions, protocol, &settings.solver)?;
    let mut value = current.allocation.value_bits();
    let mut trace = vec![value];
    let mut evaluations = 0;
    let mut iterations = 0;

    while iterations < settings.max_ao_iters {
        iterations += 1;
        let fitness = RateFitness {
            model: &model,
            scenario,
            allocation: &current.allocation,
            hap_power_w: config.hap_power_w,
            noise_w: config.noise_power_w,
            objective: settings.objective,
            solver: settings.solver,
        };
        let problem = PlacementProblem::new(
            &fitness,
            config.waveguide_span_m,
            config.min_spacing_m,
            scenario.n_antennas(),
        );
        let candidate = match algorithm {
            Algorithm::Ew => {
                let out = ew_optimize(&problem, &settings.ew, &positions)?;
                evaluations += out.evaluations;
                out.positions
            }
            Algorithm::Spde => {
                let spde = SpdeConfig {
                    rng_seed: mix_seed(settings.spde.rng_seed, iterations as u64),
                    ..settings.spde.clone()
                };
                let out = spde_optimize(&problem, &spde)?;
                evaluations += out.evaluations;
                out.positions
            }
            Algorithm::Conv => unreachable!(),
        };

        let next = match allocate_at(&model, scenario, config, &candidate, protocol, &settings.solver) {
            Ok(next) if next.allocation.value_bits() > value => next,
            _ => {
                trace.push(value);
                break;
            }
        };
        let new_value = next.allocation.value_bits();
        let gain = (new_value - value) / value.abs().max(f64::MIN_POSITIVE);
        positions = candidate;
        current = next;
        value = new_value;
        trace.push(value);
        if gain <= settings.tol {
            break;
        }
    }

    Ok(AoReport {
        protocol,
        algorithm,
        objective_trace: trace,
        final_positions: positions,
        final_allocation: current.allocation,
        final_gains: current.state.gain,
        ao_iterations: iterations,
        fitness_evaluations: evaluations,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Gains from one conventional antenna at the feed point.
pub fn baseline_gains(scenario: &Scenario, config: &SystemConfig) -> Result<Vec<f64>> {
    scenario
        .devices
        .iter()
        .map(|d| free_space_channel(config, config.feed_x_m, d).map(|h| h.norm_sqr()))
        .collect()
}

/// Conventional fixed-antenna network: one antenna at the feed point with a
/// plain free-space channel, then allocation only.
pub fn baseline_fixed_antenna(
    scenario: &Scenario,
    config: &SystemConfig,
    protocol: Protocol,
    settings: &AoSettings,
) -> Result<AoReport> {
    let started = Instant::now();
    config.validate()?;
    scenario.validate(config)?;
    let gains = baseline_gains(scenario, config)?;
    let phi = harvested_powers(&gains, scenario, config);
    let allocation = allocator::solve(
        protocol,
        &gains,
        &phi,
        &scenario.circuit_power_w,
        config.noise_power_w,
        &settings.solver,
    )?;
    Ok(AoReport {
        protocol,
        algorithm: Algorithm::Conv,
        objective_trace: vec![allocation.value_bits()],
        final_positions: vec![config.feed_x_m],
        final_allocation: allocation,
        final_gains: gains,
        ao_iterations: 0,
        fitness_evaluations: 0,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}
