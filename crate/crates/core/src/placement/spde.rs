use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Fitness, PlacementProblem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdeConfig {
    pub population: usize,
    pub max_generations: usize,
    pub rng_seed: u64,
}

impl Default for SpdeConfig {
    fn default() -> Self {
        Self {
            population: 30,
            max_generations: 200,
            rng_seed: 0,
        }
    }
}

impl SpdeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::invalid(
                "spde_population",
                format!("{} is too small, mutation needs at least 4 individuals", self.population),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpdeOutcome {
    pub positions: Vec<f64>,
    pub value: f64,
    pub generations: usize,
    pub evaluations: usize,
    /// Best population fitness after initialisation and after each generation.
    pub best_trace: Vec<f64>,
}

fn best_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Differential evolution with per-mutant scale factor and per-trial
/// crossover rate, both drawn from `Uniform(0, 1)`.
///
/// The initial population is sampled uniformly in `[0, span]^N`, sorted and
/// repaired. Each generation builds one trial per individual from
/// `x_r1 + F (x_r2 - x_r3)` with binomial crossover, repairs it, and keeps
/// it when its fitness is at least the target's. All random draws for a
/// generation happen before its fitness evaluations, which may run in
/// parallel; the result depends only on `rng_seed`.
pub fn spde_optimize<F: Fitness>(problem: &PlacementProblem<F>, config: &SpdeConfig) -> Result<SpdeOutcome> {
    problem.check_geometry()?;
    config.validate()?;
    let q = config.population;
    let n = problem.n_antennas;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let mut population = Vec::with_capacity(q);
    for _ in 0..q {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=problem.span_m)).collect();
        x.sort_by(f64::total_cmp);
        population.push(problem.repair(&x)?);
    }
    let mut fitness: Vec<f64> = population.par_iter().map(|x| problem.fitness.evaluate(x)).collect();
    let mut evaluations = q;
    let mut best_trace = vec![fitness[best_index(&fitness)]];

    for _ in 0..config.max_generations {
        let mut trials = Vec::with_capacity(q);
        for i in 0..q {
            // Three distinct indices, none equal to i.
            let picks = index::sample(&mut rng, q - 1, 3);
            let skip = |j: usize| if j >= i { j + 1 } else { j };
            let (r1, r2, r3) = (skip(picks.index(0)), skip(picks.index(1)), skip(picks.index(2)));
            let scale: f64 = rng.gen();
            let crossover: f64 = rng.gen();
            let forced = rng.gen_range(0..n);
            let target = &population[i];
            let trial: Vec<f64> = (0..n)
                .map(|j| {
                    let take_mutant = rng.gen::<f64>() <= crossover || j == forced;
                    if take_mutant {
                        population[r1][j] + scale * (population[r2][j] - population[r3][j])
                    } else {
                        target[j]
                    }
                })
                .collect();
            trials.push(problem.repair(&trial)?);
        }
        let trial_fitness: Vec<f64> = trials.par_iter().map(|x| problem.fitness.evaluate(x)).collect();
        evaluations += q;
        for (i, (trial, value)) in trials.into_iter().zip(trial_fitness).enumerate() {
            if value >= fitness[i] {
                population[i] = trial;
                fitness[i] = value;
            }
        }
        best_trace.push(fitness[best_index(&fitness)]);
    }

    let best = best_index(&fitness);
    Ok(SpdeOutcome {
        positions: population.swap_remove(best),
        value: fitness[best],
        generations: config.max_generations,
        evaluations,
        best_trace,
    })
}
