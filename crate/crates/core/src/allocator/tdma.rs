//! TDMA slot allocation.
//!
//! With `c_k = g_k / noise`, `d_k = p_c c_k` and energy `e_k = t0 Phi_k`,
//! device `k` contributes `t_k ln(1 - d_k + c_k e_k / t_k)` nats. Writing
//! `w_k = 1 + p_k c_k` for its post-detection SNR term, stationarity in
//! `t_k` with multiplier `mu` on `sum t_k <= 1 - t0` reads
//!
//! ```text
//! ln w_k + (1 - d_k) / w_k = 1 + mu
//! ```
//!
//! which has one root `w_k >= 1` for every `mu >= 0`. The slot is then
//! `t_k = c_k e_k / (w_k - 1 + d_k)`, decreasing in `mu`, so the multiplier
//! is found by bisection on the time budget. The outer problem in `t0` is
//! concave (partial maximisation of a jointly concave function).

use super::search::{golden_section_max, newton_bracketed};
use super::{check_inputs, solve_noma, SolverTolerance, TdmaAllocation, FLAT_T0, T0_EDGE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Active {
    index: usize,
    /// Gain over noise.
    c: f64,
    /// Circuit power over the equivalent noise power, `p_c * c`.
    d: f64,
    phi: f64,
}

impl Active {
    /// `u = ln w` solving `u + (1 - d) exp(-u) = 1 + mu`.
    fn log_snr(&self, mu: f64) -> f64 {
        let a = 1.0 - self.d;
        let target = 1.0 + mu;
        let g = |u: f64| {
            let e = (-u).exp();
            (u + a * e - target, 1.0 - a * e)
        };
        let hi = target + a.abs();
        // Convex in u when a > 0 (approach from above), concave otherwise.
        let start = if a > 0.0 { hi } else { 0.0 };
        newton_bracketed(g, 0.0, hi, start)
    }

    /// Slot per unit of power-transfer time at multiplier `mu`.
    fn slot_per_t0(&self, u: f64) -> f64 {
        self.c * self.phi / (u.exp_m1() + self.d)
    }
}

struct Inner {
    slots: Vec<f64>,
    log_snr: Vec<f64>,
    value_nats: f64,
}

fn solve_slots(active: &[Active], t0: f64, tol: &SolverTolerance) -> Result<Inner> {
    let budget = 1.0 - t0;
    let eval = |mu: f64| -> (Vec<f64>, Vec<f64>, f64) {
        let u: Vec<f64> = active.iter().map(|a| a.log_snr(mu)).collect();
        let s: Vec<f64> = active
            .iter()
            .zip(&u)
            .map(|(a, &u)| t0 * a.slot_per_t0(u))
            .collect();
        let total = s.iter().sum();
        (u, s, total)
    };

    // With circuit power every device has a finite best slot; if those fit,
    // the time constraint is slack.
    let mu = if active.iter().all(|a| a.d > 0.0) && eval(0.0).2 <= budget {
        0.0
    } else {
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut doublings = 0;
        while eval(hi).2 > budget {
            lo = hi;
            hi *= 2.0;
            doublings += 1;
            if doublings > 1100 || !hi.is_finite() {
                return Err(Error::Tolerance(format!(
                    "could not bracket the slot multiplier for t0 = {t0}"
                )));
            }
        }
        for _ in 0..400 {
            if hi - lo <= tol.multiplier * hi.max(f64::MIN_POSITIVE) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if eval(mid).2 > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Upper end keeps the slots within budget.
        hi
    };
    let (u, slots, _) = eval(mu);
    let value_nats = slots.iter().zip(&u).map(|(t, u)| t * u).sum();
    Ok(Inner {
        slots,
        log_snr: u,
        value_nats,
    })
}

fn active_devices(gains: &[f64], phi: &[f64], circuit_power_w: &[f64], noise_w: f64) -> Vec<Active> {
    (0..gains.len())
        .filter(|&k| gains[k] > 0.0 && phi[k] > 0.0)
        .map(|k| {
            let c = gains[k] / noise_w;
            Active {
                index: k,
                c,
                d: circuit_power_w[k] * c,
                phi: phi[k],
            }
        })
        .collect()
}

/// Maximises the TDMA sum rate over `t0`, the device slots and powers.
///
/// Devices with zero gain or zero harvested power are left silent.
pub fn solve_tdma(
    gains: &[f64],
    phi: &[f64],
    circuit_power_w: &[f64],
    noise_w: f64,
    tol: &SolverTolerance,
) -> Result<TdmaAllocation> {
    check_inputs(gains, phi, circuit_power_w, noise_w)?;
    tol.validate()?;
    let k = gains.len();
    let active = active_devices(gains, phi, circuit_power_w, noise_w);
    if active.is_empty() {
        return Ok(TdmaAllocation {
            t0: FLAT_T0,
            t: vec![0.0; k],
            p: vec![0.0; k],
            value_bits: 0.0,
        });
    }

    let (t0, _) = golden_section_max(
        |t0| Ok(solve_slots(&active, t0, tol)?.value_nats),
        T0_EDGE,
        1.0 - T0_EDGE,
        tol.t0,
    )?;
    let inner = solve_slots(&active, t0, tol)?;
    let mut t = vec![0.0; k];
    let mut p = vec![0.0; k];
    for (i, a) in active.iter().enumerate() {
        t[a.index] = inner.slots[i];
        p[a.index] = inner.log_snr[i].exp_m1() / a.c;
    }
    let value_bits = inner.value_nats / std::f64::consts::LN_2;
    Ok(TdmaAllocation { t0, t, p, value_bits })
}

/// Equal-SNR TDMA schedule, optimal when no device draws circuit power.
///
/// Slots are proportional to `Phi_k g_k`, which equalises the received SNR
/// across devices; `t0` comes from the equivalent single-slot problem.
pub fn tdma_equal_snr_closed_form(
    gains: &[f64],
    phi: &[f64],
    circuit_power_w: &[f64],
    noise_w: f64,
    tol: &SolverTolerance,
) -> Result<TdmaAllocation> {
    if let Some(k) = circuit_power_w.iter().position(|&p| p != 0.0) {
        return Err(Error::Domain(format!(
            "equal-SNR schedule needs zero circuit power, device {k} draws {} W",
            circuit_power_w[k]
        )));
    }
    let noma = solve_noma(gains, phi, circuit_power_w, noise_w, tol)?;
    let t0 = noma.t0;
    let weights: Vec<f64> = gains.iter().zip(phi).map(|(g, f)| g * f).collect();
    let total: f64 = weights.iter().sum();
    let k = gains.len();
    let (mut t, mut p) = (vec![0.0; k], vec![0.0; k]);
    if total > 0.0 {
        for j in 0..k {
            if weights[j] > 0.0 {
                t[j] = (1.0 - t0) * weights[j] / total;
                p[j] = t0 * phi[j] / t[j];
            }
        }
    }
    let mut alloc = TdmaAllocation {
        t0,
        t,
        p,
        value_bits: 0.0,
    };
    alloc.value_bits = crate::model::tdma_rates(&alloc, gains, noise_w).iter().sum();
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tdma_rates;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const NOISE: f64 = 1e-15;

    fn random_instance(rng: &mut ChaCha8Rng, k: usize) -> (Vec<f64>, Vec<f64>) {
        let gains: Vec<f64> = (0..k).map(|_| rng.gen_range(2e-9..2e-7)).collect();
        let phi: Vec<f64> = gains.iter().map(|g| 0.39 * 10.0 * g).collect();
        (gains, phi)
    }

    #[test]
    fn single_device_matches_grid_scan() {
        for &(g, f) in &[(3e-8, 1.1e-7), (1e-7, 4e-7), (5e-9, 2e-8)] {
            let c = f * g / NOISE;
            let alloc = solve_tdma(&[g], &[f], &[0.0], NOISE, &SolverTolerance::default()).unwrap();
            let m = 1_000_000;
            let best = (1..m)
                .map(|i| {
                    let t0 = i as f64 / m as f64;
                    (1.0 - t0) * (1.0 + c * t0 / (1.0 - t0)).log2()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (alloc.value_bits - best).abs() <= 1e-6 * best,
                "{} vs {best}",
                alloc.value_bits
            );
            assert!(alloc.value_bits >= best * (1.0 - 1e-9));
        }
    }

    #[test]
    fn no_harvest_is_infeasible() {
        let err = solve_tdma(&[1e-8, 2e-8], &[0.0, 0.0], &[0.0, 0.0], NOISE, &Default::default()).unwrap_err();
        assert!(err.is_infeasible());
    }

    #[test]
    fn jensen_equality_at_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (gains, phi) = random_instance(&mut rng, 3);
        let a = solve_tdma(&gains, &phi, &[0.0; 3], NOISE, &Default::default()).unwrap();
        let snr: Vec<f64> = (0..3).map(|k| a.t0 * phi[k] * gains[k] / (a.t[k] * NOISE)).collect();
        for s in &snr[1..] {
            assert!((s - snr[0]).abs() <= 1e-6 * snr[0], "{snr:?}");
        }
        // Bound from concavity of log, tight at this allocation.
        let total: f64 = gains.iter().zip(&phi).map(|(g, f)| a.t0 * f * g).sum();
        let bound = (1.0 - a.t0) * (1.0 + total / ((1.0 - a.t0) * NOISE)).log2();
        assert!(a.value_bits <= bound * (1.0 + 1e-9));
        assert!((a.value_bits - bound).abs() <= 1e-6 * bound);
    }

    #[test]
    fn allocation_is_feasible_with_circuit_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let k = rng.gen_range(1..8);
            let (gains, phi) = random_instance(&mut rng, k);
            let pc = vec![1e-7; k];
            let a = solve_tdma(&gains, &phi, &pc, NOISE, &Default::default()).unwrap();
            a.check(&phi, &pc).unwrap();
            let direct: f64 = tdma_rates(&a, &gains, NOISE).iter().sum();
            assert!((direct - a.value_bits).abs() <= 1e-9 * a.value_bits.max(1.0));
        }
    }

    #[test]
    fn silent_devices_get_no_slot() {
        let a = solve_tdma(&[0.0, 3e-8], &[1e-7, 1e-7], &[0.0, 0.0], NOISE, &Default::default()).unwrap();
        assert_eq!(a.t[0], 0.0);
        assert_eq!(a.p[0], 0.0);
        assert!(a.t[1] > 0.0);
    }

    #[test]
    fn all_gains_zero_is_flat() {
        let a = solve_tdma(&[0.0, 0.0], &[1e-7, 1e-7], &[0.0, 0.0], NOISE, &Default::default()).unwrap();
        assert_eq!(a.value_bits, 0.0);
        assert_eq!(a.t0, FLAT_T0);
    }

    #[test]
    fn closed_form_symmetric_slots() {
        let a = tdma_equal_snr_closed_form(&[2e-8, 4e-8], &[2e-7, 1e-7], &[0.0, 0.0], NOISE, &Default::default())
            .unwrap();
        assert!((a.t[0] - (1.0 - a.t0) / 2.0).abs() < 1e-15);
        assert!((a.t[1] - (1.0 - a.t0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_both_solvers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let k = rng.gen_range(1..11);
            let (gains, phi) = random_instance(&mut rng, k);
            let pc = vec![0.0; k];
            let tol = SolverTolerance::default();
            let cf = tdma_equal_snr_closed_form(&gains, &phi, &pc, NOISE, &tol).unwrap();
            let td = solve_tdma(&gains, &phi, &pc, NOISE, &tol).unwrap();
            let no = solve_noma(&gains, &phi, &pc, NOISE, &tol).unwrap();
            assert!((cf.value_bits - td.value_bits).abs() <= 1e-6 * td.value_bits);
            assert!((cf.value_bits - no.value_bits).abs() <= 1e-6 * no.value_bits);
        }
    }

    #[test]
    fn closed_form_rejects_circuit_power() {
        let err = tdma_equal_snr_closed_form(&[1e-8], &[1e-7], &[1e-7], NOISE, &Default::default()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn snr_scale_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (gains, phi) = random_instance(&mut rng, 4);
        let base = solve_tdma(&gains, &phi, &[0.0; 4], NOISE, &Default::default()).unwrap();
        let scaled: Vec<f64> = gains.iter().map(|g| g * 37.0).collect();
        let s = solve_tdma(&scaled, &phi, &[0.0; 4], NOISE * 37.0, &Default::default()).unwrap();
        assert!((base.value_bits - s.value_bits).abs() <= 1e-9 * base.value_bits);
    }
}
