use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::allocator::{self, Allocation, Protocol, SolverTolerance};
use crate::model::{harvested_power, ChannelModel, Scenario};
use crate::placement::Fitness;

/// What the placement step scores a candidate layout by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementObjective {
    /// `FixedSchedule` for TDMA, `Reallocated` for NOMA.
    #[default]
    Auto,
    /// Sum rate with slot lengths and transmit powers held at the current
    /// allocation. Energy causality is restored by the next allocation solve.
    FixedSchedule,
    /// Optimal allocation value at the candidate layout. Cheap for NOMA,
    /// whose allocation is a scalar search over sums across devices; for
    /// TDMA every evaluation runs the full nested solver.
    Reallocated,
}

impl PlacementObjective {
    pub fn resolve(self, protocol: Protocol) -> Self {
        match (self, protocol) {
            (PlacementObjective::Auto, Protocol::Tdma) => PlacementObjective::FixedSchedule,
            (PlacementObjective::Auto, Protocol::Noma) => PlacementObjective::Reallocated,
            (other, _) => other,
        }
    }
}

/// Sum rate as a function of antenna positions, for the placement step.
pub struct RateFitness<'a> {
    pub model: &'a ChannelModel,
    pub scenario: &'a Scenario,
    /// Current allocation; also fixes the protocol.
    pub allocation: &'a Allocation,
    pub hap_power_w: f64,
    pub noise_w: f64,
    pub objective: PlacementObjective,
    pub solver: SolverTolerance,
}

impl RateFitness<'_> {
    fn fixed_schedule_rate(&self, aggregate: &[Complex64]) -> f64 {
        match self.allocation {
            Allocation::Tdma(a) => {
                let mut total = 0.0;
                for (k, h) in aggregate.iter().enumerate() {
                    if a.t[k] > 0.0 {
                        total += a.t[k] * (a.p[k] * h.norm_sqr() / self.noise_w).ln_1p();
                    }
                }
                total / std::f64::consts::LN_2
            }
            Allocation::Noma(a) => {
                let rx: f64 = aggregate.iter().zip(&a.p).map(|(h, p)| p * h.norm_sqr()).sum();
                a.t1 * (rx / self.noise_w).ln_1p() / std::f64::consts::LN_2
            }
        }
    }

    fn reallocated_rate(&self, aggregate: &[Complex64]) -> f64 {
        let gains: Vec<f64> = aggregate.iter().map(|h| h.norm_sqr()).collect();
        let phi: Vec<f64> = gains
            .iter()
            .zip(&self.scenario.eh)
            .map(|(g, eh)| harvested_power(self.hap_power_w * g, eh))
            .collect();
        allocator::solve(
            self.allocation.protocol(),
            &gains,
            &phi,
            &self.scenario.circuit_power_w,
            self.noise_w,
            &self.solver,
        )
        .map_or(f64::NEG_INFINITY, |a| a.value_bits())
    }

    fn rate_from_aggregate(&self, aggregate: &[Complex64]) -> f64 {
        match self.objective.resolve(self.allocation.protocol()) {
            PlacementObjective::Reallocated => self.reallocated_rate(aggregate),
            _ => self.fixed_schedule_rate(aggregate),
        }
    }

    fn aggregate(&self, x: &[f64], skip: Option<usize>) -> Vec<Complex64> {
        let devices = &self.scenario.devices;
        let mut agg = vec![Complex64::new(0.0, 0.0); devices.len()];
        for (n, &xn) in x.iter().enumerate() {
            if Some(n) == skip {
                continue;
            }
            for (k, d) in devices.iter().enumerate() {
                agg[k] += self.model.coefficient_unchecked(n, xn, d);
            }
        }
        agg
    }
}

impl Fitness for RateFitness<'_> {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.rate_from_aggregate(&self.aggregate(x, None))
    }

    fn scan_coordinate(&self, x: &[f64], n: usize, candidates: &[f64]) -> Vec<f64> {
        let rest = self.aggregate(x, Some(n));
        let mut agg = rest.clone();
        candidates
            .iter()
            .map(|&c| {
                for (k, d) in self.scenario.devices.iter().enumerate() {
                    agg[k] = rest[k] + self.model.coefficient_unchecked(n, c, d);
                }
                self.rate_from_aggregate(&agg)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::solve;
    use crate::model::{harvested_powers, uniform_spread, ChannelState, Device, EhParams, SystemConfig};

    fn setup(pc: f64) -> (SystemConfig, Scenario) {
        let cfg = SystemConfig::default();
        let devices = vec![Device::new(2.0, 1.0), Device::new(6.5, -2.0), Device::new(9.0, 0.5)];
        (cfg, Scenario::uniform(uniform_spread(3, 10.0), devices, EhParams::default(), pc))
    }

    fn fitness<'a>(
        model: &'a ChannelModel,
        sc: &'a Scenario,
        alloc: &'a Allocation,
        cfg: &SystemConfig,
        objective: PlacementObjective,
    ) -> RateFitness<'a> {
        RateFitness {
            model,
            scenario: sc,
            allocation: alloc,
            hap_power_w: cfg.hap_power_w,
            noise_w: cfg.noise_power_w,
            objective,
            solver: SolverTolerance::default(),
        }
    }

    #[test]
    fn auto_picks_per_protocol() {
        assert_eq!(PlacementObjective::Auto.resolve(Protocol::Tdma), PlacementObjective::FixedSchedule);
        assert_eq!(PlacementObjective::Auto.resolve(Protocol::Noma), PlacementObjective::Reallocated);
        assert_eq!(PlacementObjective::FixedSchedule.resolve(Protocol::Noma), PlacementObjective::FixedSchedule);
    }

    #[test]
    fn objectives_reproduce_the_allocated_value() {
        for protocol in [Protocol::Tdma, Protocol::Noma] {
            for pc in [0.0, 1e-8] {
                let (cfg, sc) = setup(pc);
                let st = ChannelState::compute(&sc, &cfg).unwrap();
                let phi = harvested_powers(&st.gain, &sc, &cfg);
                let alloc = solve(protocol, &st.gain, &phi, &sc.circuit_power_w, cfg.noise_power_w, &Default::default())
                    .unwrap();
                let model = ChannelModel::new(&cfg, 3);
                for objective in [PlacementObjective::FixedSchedule, PlacementObjective::Reallocated] {
                    let v = fitness(&model, &sc, &alloc, &cfg, objective).evaluate(&sc.pa_positions_m);
                    assert!((v - alloc.value_bits()).abs() <= 1e-9 * alloc.value_bits(), "{objective:?} {v}");
                }
            }
        }
    }

    #[test]
    fn scan_matches_full_evaluation() {
        let (cfg, sc) = setup(1e-8);
        let st = ChannelState::compute(&sc, &cfg).unwrap();
        let phi = harvested_powers(&st.gain, &sc, &cfg);
        for protocol in [Protocol::Tdma, Protocol::Noma] {
            let alloc = solve(protocol, &st.gain, &phi, &sc.circuit_power_w, cfg.noise_power_w, &Default::default())
                .unwrap();
            let model = ChannelModel::new(&cfg, 3);
            let f = fitness(&model, &sc, &alloc, &cfg, PlacementObjective::Auto);
            let candidates = [3.4, 4.0, 4.61, 5.0];
            let scanned = f.scan_coordinate(&sc.pa_positions_m, 1, &candidates);
            for (c, s) in candidates.iter().zip(scanned) {
                let mut x = sc.pa_positions_m.clone();
                x[1] = *c;
                let full = f.evaluate(&x);
                assert!((s - full).abs() <= 1e-9 * full.abs(), "{protocol}: {s} vs {full}");
            }
        }
    }

    #[test]
    fn reallocation_never_trails_a_feasible_fixed_schedule() {
        let (cfg, sc) = setup(0.0);
        let st = ChannelState::compute(&sc, &cfg).unwrap();
        let phi = harvested_powers(&st.gain, &sc, &cfg);
        let model = ChannelModel::new(&cfg, 3);
        for protocol in [Protocol::Tdma, Protocol::Noma] {
            // Half power leaves energy to spare, so nearby layouts keep the
            // schedule feasible.
            let mut alloc = solve(protocol, &st.gain, &phi, &sc.circuit_power_w, cfg.noise_power_w, &Default::default())
                .unwrap();
            match &mut alloc {
                Allocation::Tdma(a) => a.p.iter_mut().for_each(|p| *p *= 0.5),
                Allocation::Noma(a) => a.p.iter_mut().for_each(|p| *p *= 0.5),
            }
            let mut checked = 0;
            for shift in [-5e-5, -2e-5, -1e-5, 1e-5, 2e-5, 5e-5] {
                let x: Vec<f64> = sc.pa_positions_m.iter().map(|v| v + shift).collect();
                let moved = Scenario {
                    pa_positions_m: x.clone(),
                    ..sc.clone()
                };
                let g = ChannelState::compute(&moved, &cfg).unwrap().gain;
                if alloc.check(&harvested_powers(&g, &sc, &cfg), &sc.circuit_power_w).is_err() {
                    continue;
                }
                checked += 1;
                let fixed = fitness(&model, &sc, &alloc, &cfg, PlacementObjective::FixedSchedule).evaluate(&x);
                let exact = fitness(&model, &sc, &alloc, &cfg, PlacementObjective::Reallocated).evaluate(&x);
                assert!(exact >= fixed * (1.0 - 1e-9), "{protocol} shift {shift}: {exact} < {fixed}");
            }
            assert!(checked > 0);
        }
    }
}
