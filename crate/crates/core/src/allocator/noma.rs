use super::search::golden_section_max;
use super::{check_inputs, NomaAllocation, SolverTolerance, FLAT_T0, T0_EDGE};
use crate::error::{Error, Result};

/// Maximises the NOMA sum rate `t1 log2(1 + sum_k p_k g_k / noise)` over
/// the split `t0 + t1 = 1`.
///
/// Every device transmits during `t1`, so each must harvest at least its
/// circuit energy: `t0 Phi_k >= t1 p_c`. That bounds `t0` from below.
pub fn solve_noma(
    gains: &[f64],
    phi: &[f64],
    circuit_power_w: &[f64],
    noise_w: f64,
    tol: &SolverTolerance,
) -> Result<NomaAllocation> {
    check_inputs(gains, phi, circuit_power_w, noise_w)?;
    tol.validate()?;
    let k = gains.len();

    // Lower bound on t0 / t1 from the circuit-energy requirement.
    let mut ratio_min: f64 = 0.0;
    for j in 0..k {
        if circuit_power_w[j] > 0.0 {
            if phi[j] <= 0.0 {
                return Err(Error::infeasible(
                    "cannot power its circuit while transmitting: no harvested energy",
                    Some(j),
                ));
            }
            ratio_min = ratio_min.max(circuit_power_w[j] / phi[j]);
        }
    }
    let t0_min = (ratio_min / (1.0 + ratio_min)).max(T0_EDGE);
    if t0_min > 1.0 - T0_EDGE {
        return Err(Error::infeasible(
            "circuit energy exceeds what any power-transfer slot can harvest",
            None,
        ));
    }

    let c: Vec<f64> = gains.iter().map(|g| g / noise_w).collect();
    let energy_snr: f64 = c.iter().zip(phi).map(|(c, f)| c * f).sum();
    let circuit_snr: f64 = c.iter().zip(circuit_power_w).map(|(c, p)| c * p).sum();

    let t0 = if energy_snr <= 0.0 {
        FLAT_T0.max(t0_min)
    } else {
        let objective = |t0: f64| {
            let t1 = 1.0 - t0;
            // 1 + sum c_k p_k with p_k = t0 Phi_k / t1 - p_c.
            let arg = 1.0 - circuit_snr + t0 * energy_snr / t1;
            Ok(if arg > 0.0 { t1 * arg.ln() } else { f64::NEG_INFINITY })
        };
        golden_section_max(objective, t0_min, 1.0 - T0_EDGE, tol.t0)?.0
    };
    let t1 = 1.0 - t0;
    let p: Vec<f64> = (0..k)
        .map(|j| (t0 * phi[j] / t1 - circuit_power_w[j]).max(0.0))
        .collect();
    let received: f64 = p.iter().zip(&c).map(|(p, c)| p * c).sum();
    let value_bits = t1 * received.ln_1p() / std::f64::consts::LN_2;
    Ok(NomaAllocation {
        t0,
        t1,
        p,
        value_bits,
    })
}
