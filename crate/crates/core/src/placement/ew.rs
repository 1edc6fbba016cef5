use serde::{Deserialize, Serialize};

use super::{Fitness, PlacementProblem};
use crate::error::{Error, Result};
use crate::model::{check_positions, POSITION_TOL_M};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EwConfig {
    /// Points of the search lattice spread evenly over the whole waveguide,
    /// ends included. Each antenna scans the lattice points inside the gap
    /// left by its neighbours. A single point means the gap midpoint.
    pub grid_points: usize,
    pub max_sweeps: usize,
    /// A sweep that gains no more than this ends the search.
    pub improvement_tol: f64,
}

impl Default for EwConfig {
    fn default() -> Self {
        Self {
            grid_points: 2000,
            max_sweeps: 10,
            improvement_tol: 1e-9,
        }
    }
}

impl EwConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points == 0 {
            return Err(Error::invalid("ew_grid_points", "must be at least 1"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::invalid("ew_max_sweeps", "must be at least 1"));
        }
        if !(self.improvement_tol >= 0.0) {
            return Err(Error::invalid("ew_improvement_tol", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EwOutcome {
    pub positions: Vec<f64>,
    pub value: f64,
    pub sweeps: usize,
    pub evaluations: usize,
    /// Fitness after each sweep, starting with the initial point.
    pub trace: Vec<f64>,
}

/// Points of the waveguide-wide lattice `i * span / (points - 1)` that fall
/// inside `[lo, hi]`. A single point means the midpoint of `[lo, hi]`.
fn candidates(lo: f64, hi: f64, span: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.5 * (lo + hi)];
    }
    if hi < lo {
        return Vec::new();
    }
    let step = span / (points - 1) as f64;
    let first = ((lo - POSITION_TOL_M) / step).ceil().max(0.0) as usize;
    let last = (((hi + POSITION_TOL_M) / step).floor() as usize).min(points - 1);
    (first..=last)
        .map(|i| {
            let c = if i + 1 == points { span } else { step * i as f64 };
            c.clamp(lo, hi)
        })
        .collect()
}

/// Element-wise search: for each antenna in turn, scan the lattice points in
/// the gap left by its neighbours and keep the best one; repeat sweeps
/// until one gains no more than `improvement_tol`.
///
/// An antenna only moves on strict improvement, so the value never drops
/// below `fitness(x_init)`.
pub fn ew_optimize<F: Fitness>(problem: &PlacementProblem<F>, config: &EwConfig, x_init: &[f64]) -> Result<EwOutcome> {
    problem.check_geometry()?;
    config.validate()?;
    if x_init.len() != problem.n_antennas {
        return Err(Error::Domain(format!(
            "initial layout has {} antennas, expected {}",
            x_init.len(),
            problem.n_antennas
        )));
    }
    check_positions(x_init, problem.span_m, problem.min_spacing_m)?;

    let n_ant = problem.n_antennas;
    let spacing = problem.min_spacing_m;
    let mut x = x_init.to_vec();
    let mut value = problem.fitness.evaluate(&x);
    let mut evaluations = 1;
    let mut trace = vec![value];
    let mut sweeps = 0;

    while sweeps < config.max_sweeps {
        let start = value;
        for n in 0..n_ant {
            let lo = if n == 0 { 0.0 } else { x[n - 1] + spacing };
            let hi = if n + 1 == n_ant { problem.span_m } else { x[n + 1] - spacing };
            let candidates = candidates(lo, hi, problem.span_m, config.grid_points);
            let values = problem.fitness.scan_coordinate(&x, n, &candidates);
            evaluations += candidates.len();
            let mut best = None;
            for (&c, &v) in candidates.iter().zip(&values) {
                if v > best.map_or(value, |(_, bv)| bv) {
                    best = Some((c, v));
                }
            }
            if let Some((c, v)) = best {
                x[n] = c;
                value = v;
            }
        }
        sweeps += 1;
        trace.push(value);
        if value - start <= config.improvement_tol {
            break;
        }
    }
    Ok(EwOutcome {
        positions: x,
        value,
        sweeps,
        evaluations,
        trace,
    })
}
