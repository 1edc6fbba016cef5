//! Uplink achievable rates, in bits per unit bandwidth over one period.

use crate::allocator::{NomaAllocation, TdmaAllocation};

/// Per-device TDMA rates `t_k log2(1 + p_k g_k / noise)`.
pub fn tdma_rates(alloc: &TdmaAllocation, gains: &[f64], noise_w: f64) -> Vec<f64> {
    alloc
        .t
        .iter()
        .zip(&alloc.p)
        .zip(gains)
        .map(|((&t, &p), &g)| {
            if t == 0.0 {
                0.0
            } else {
                t * (p * g / noise_w).ln_1p() / std::f64::consts::LN_2
            }
        })
        .collect()
}

/// Per-device NOMA rates under successive interference cancellation.
///
/// `decode_order[i]` is the device decoded at step `i`; each device sees
/// interference from every device decoded after it. Rates are returned
/// indexed by device, not by decoding position.
pub fn noma_rates(alloc: &NomaAllocation, gains: &[f64], noise_w: f64, decode_order: &[usize]) -> Vec<f64> {
    let k = gains.len();
    debug_assert_eq!(decode_order.len(), k);
    let received: Vec<f64> = alloc.p.iter().zip(gains).map(|(p, g)| p * g).collect();
    let mut rates = vec![0.0; k];
    // Walk from the last-decoded device back so the interference sum is a
    // running total.
    let mut interference = 0.0;
    for &dev in decode_order.iter().rev() {
        let sinr = received[dev] / (interference + noise_w);
        rates[dev] = alloc.t1 * sinr.ln_1p() / std::f64::consts::LN_2;
        interference += received[dev];
    }
    rates
}

/// NOMA sum rate `t1 log2(1 + sum_k p_k g_k / noise)`, which does not
/// depend on the decoding order.
pub fn noma_sum_rate(alloc: &NomaAllocation, gains: &[f64], noise_w: f64) -> f64 {
    let received: f64 = alloc.p.iter().zip(gains).map(|(p, g)| p * g).sum();
    alloc.t1 * (received / noise_w).ln_1p() / std::f64::consts::LN_2
}

/// Devices sorted by descending channel gain, ties by index.
pub fn descending_gain_order(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tdma(t: Vec<f64>, p: Vec<f64>) -> TdmaAllocation {
        TdmaAllocation {
            t0: 0.0,
            t,
            p,
            value_bits: 0.0,
        }
    }

    fn noma(t1: f64, p: Vec<f64>) -> NomaAllocation {
        NomaAllocation {
            t0: 1.0 - t1,
            t1,
            p,
            value_bits: 0.0,
        }
    }

    #[test]
    fn tdma_spot_values() {
        let r = tdma_rates(&tdma(vec![0.0, 1.0, 0.5], vec![5.0, 1.0, 3.0]), &[1.0, 1.0, 1.0], 1.0);
        assert_eq!(r[0], 0.0);
        assert!((r[1] - 1.0).abs() < 1e-15);
        assert!((r[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noma_single_device_matches_tdma() {
        let g = [2e-8];
        let a = noma(0.6, vec![3e-7]);
        let r = noma_rates(&a, &g, 1e-15, &[0]);
        let t = tdma_rates(&tdma(vec![0.6], vec![3e-7]), &g, 1e-15);
        assert!((r[0] - t[0]).abs() < 1e-12);
    }

    #[test]
    fn noma_zero_power() {
        let r = noma_rates(&noma(0.5, vec![0.0; 3]), &[1.0, 2.0, 3.0], 1.0, &[2, 1, 0]);
        assert!(r.iter().all(|&x| x == 0.0));
        assert_eq!(noma_sum_rate(&noma(0.5, vec![0.0; 3]), &[1.0, 2.0, 3.0], 1.0), 0.0);
    }

    #[test]
    fn noma_two_devices_equal_received_power() {
        let t1 = 0.7;
        let a = noma(t1, vec![1.0, 1.0]);
        let r = noma_rates(&a, &[1.0, 1.0], 1.0, &[0, 1]);
        assert!((r[0] - t1 * 1.5f64.log2()).abs() < 1e-15);
        assert!((r[1] - t1).abs() < 1e-15);
        assert!((r[0] + r[1] - t1 * 3f64.log2()).abs() < 1e-14);
        assert!((noma_sum_rate(&a, &[1.0, 1.0], 1.0) - t1 * 3f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn descending_order() {
        assert_eq!(descending_gain_order(&[1.0, 3.0, 2.0, 3.0]), vec![1, 3, 2, 0]);
    }
}
