//! Antenna position optimisers for a fixed resource allocation.
//!
//! Two searches are provided over the feasible set
//! `{x : 0 <= x_1, x_n - x_{n-1} >= spacing, x_N <= span}`:
//!
//! * [`ew_optimize`]: cyclic coordinate search, one antenna at a time on a
//!   uniform grid between its neighbours.
//! * [`spde_optimize`]: differential evolution with the scale factor and
//!   crossover rate redrawn uniformly for every mutant and trial.

mod ew;
mod spde;

pub use ew::{ew_optimize, EwConfig, EwOutcome};
pub use spde::{spde_optimize, SpdeConfig, SpdeOutcome};

use crate::error::{Error, Result};
use crate::model::POSITION_TOL_M;

/// Objective over antenna position vectors, to be maximised.
pub trait Fitness: Sync {
    fn evaluate(&self, x: &[f64]) -> f64;

    /// Values of `x` with coordinate `n` replaced by each candidate.
    ///
    /// Implementations can override this to reuse work shared by the
    /// candidates.
    fn scan_coordinate(&self, x: &[f64], n: usize, candidates: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        candidates
            .iter()
            .map(|&c| {
                y[n] = c;
                self.evaluate(&y)
            })
            .collect()
    }
}

impl<T: Fitness + ?Sized> Fitness for &T {
    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }

    fn scan_coordinate(&self, x: &[f64], n: usize, candidates: &[f64]) -> Vec<f64> {
        (**self).scan_coordinate(x, n, candidates)
    }
}

/// Adapts a closure into a [`Fitness`].
pub struct FnFitness<F>(pub F);

impl<F> Fitness for FnFitness<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

#[derive(Debug, Clone)]
pub struct PlacementProblem<F> {
    pub fitness: F,
    pub span_m: f64,
    pub min_spacing_m: f64,
    pub n_antennas: usize,
}

impl<F> PlacementProblem<F> {
    pub fn new(fitness: F, span_m: f64, min_spacing_m: f64, n_antennas: usize) -> Self {
        Self {
            fitness,
            span_m,
            min_spacing_m,
            n_antennas,
        }
    }

    pub fn check_geometry(&self) -> Result<()> {
        check_geometry(self.n_antennas, self.span_m, self.min_spacing_m)
    }

    pub fn repair(&self, x: &[f64]) -> Result<Vec<f64>> {
        repair(x, self.span_m, self.min_spacing_m)
    }
}

fn check_geometry(n_antennas: usize, span_m: f64, min_spacing_m: f64) -> Result<()> {
    // N antennas occupy (N - 1) gaps; the stricter N * spacing bound keeps
    // one spacing of headroom at the far end.
    if n_antennas == 0 || n_antennas as f64 * min_spacing_m > span_m {
        return Err(Error::InfeasibleGeometry {
            n_antennas,
            min_spacing_m,
            span_m,
        });
    }
    Ok(())
}

/// Projects a position vector onto the feasible set.
///
/// Coordinates are clamped into `[0, span]`; then, left to right, any
/// antenna closer than `spacing` to its predecessor is pushed to
/// `x_{n-1} + spacing`; finally, right to left, predecessors are pulled back
/// so the last antenna stays on the waveguide. Feasible inputs are returned
/// unchanged.
pub fn repair(x: &[f64], span_m: f64, min_spacing_m: f64) -> Result<Vec<f64>> {
    check_geometry(x.len(), span_m, min_spacing_m)?;
    let mut y: Vec<f64> = x
        .iter()
        .map(|&v| if v.is_nan() { 0.0 } else { v.clamp(0.0, span_m) })
        .collect();
    for n in 1..y.len() {
        if y[n] - y[n - 1] < min_spacing_m - POSITION_TOL_M {
            y[n] = y[n - 1] + min_spacing_m;
        }
    }
    let last = y.len() - 1;
    if y[last] > span_m {
        y[last] = span_m;
    }
    for n in (1..y.len()).rev() {
        if y[n] - y[n - 1] < min_spacing_m - POSITION_TOL_M {
            y[n - 1] = y[n] - min_spacing_m;
        }
    }
    Ok(y)
}
