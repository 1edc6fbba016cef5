use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{ao_solve, generate_scenario, mix_seed, Algorithm, AoSettings, ScenarioTemplate};
use crate::allocator::Protocol;
use crate::error::{Error, Result};
use crate::model::{dbm_to_watts, SystemConfig};

/// The parameter a sweep varies. `Single` runs the base configuration once.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Single,
    NAntennas(Vec<usize>),
    KDevices(Vec<usize>),
    Delta(Vec<f64>),
    Mu(Vec<f64>),
    CircuitPower(Vec<f64>),
    HapPowerDbm(Vec<f64>),
    Protocol(Vec<Protocol>),
    Algorithm(Vec<Algorithm>),
}

impl SweepAxis {
    pub const KEYS: [&'static str; 8] = [
        "n_antennas",
        "k_devices",
        "delta",
        "mu_db_per_m",
        "circuit_power_w",
        "hap_power_dbm",
        "protocol",
        "algo",
    ];

    pub fn key(&self) -> &'static str {
        match self {
            SweepAxis::Single => "none",
            SweepAxis::NAntennas(_) => "n_antennas",
            SweepAxis::KDevices(_) => "k_devices",
            SweepAxis::Delta(_) => "delta",
            SweepAxis::Mu(_) => "mu_db_per_m",
            SweepAxis::CircuitPower(_) => "circuit_power_w",
            SweepAxis::HapPowerDbm(_) => "hap_power_dbm",
            SweepAxis::Protocol(_) => "protocol",
            SweepAxis::Algorithm(_) => "algo",
        }
    }

    pub fn labels(&self) -> Vec<String> {
        fn show<T: ToString>(v: &[T]) -> Vec<String> {
            v.iter().map(ToString::to_string).collect()
        }
        match self {
            SweepAxis::Single => vec![String::new()],
            SweepAxis::NAntennas(v) | SweepAxis::KDevices(v) => show(v),
            SweepAxis::Delta(v) | SweepAxis::Mu(v) | SweepAxis::CircuitPower(v) | SweepAxis::HapPowerDbm(v) => show(v),
            SweepAxis::Protocol(v) => show(v),
            SweepAxis::Algorithm(v) => show(v),
        }
    }

    fn apply(&self, i: usize, point: &mut Point) {
        match self {
            SweepAxis::Single => {}
            SweepAxis::NAntennas(v) => point.template.n_antennas = v[i],
            SweepAxis::KDevices(v) => point.template.k_devices = v[i],
            SweepAxis::Delta(v) => point.config.delta = v[i],
            SweepAxis::Mu(v) => point.config.mu_db_per_m = v[i],
            SweepAxis::CircuitPower(v) => point.template.circuit_power_w = v[i],
            SweepAxis::HapPowerDbm(v) => point.config.hap_power_w = dbm_to_watts(v[i]),
            SweepAxis::Protocol(v) => point.protocols = vec![v[i]],
            SweepAxis::Algorithm(v) => point.algorithms = vec![v[i]],
        }
    }
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse()
                .map_err(|_| Error::invalid(format!("sweep.{key}"), format!("cannot parse `{s}`")))
        })
        .collect()
}

impl FromStr for SweepAxis {
    type Err = Error;

    /// Parses `KEY=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| Error::invalid("sweep", format!("expected KEY=v1,v2,... in `{s}`")))?;
        let key = key.trim();
        if raw.trim().is_empty() {
            return Err(Error::invalid(format!("sweep.{key}"), "no values given"));
        }
        Ok(match key {
            "n_antennas" => SweepAxis::NAntennas(parse_list(key, raw)?),
            "k_devices" => SweepAxis::KDevices(parse_list(key, raw)?),
            "delta" => SweepAxis::Delta(parse_list(key, raw)?),
            "mu_db_per_m" => SweepAxis::Mu(parse_list(key, raw)?),
            "circuit_power_w" => SweepAxis::CircuitPower(parse_list(key, raw)?),
            "hap_power_dbm" => SweepAxis::HapPowerDbm(parse_list(key, raw)?),
            "protocol" => SweepAxis::Protocol(parse_list(key, raw)?),
            "algo" => SweepAxis::Algorithm(parse_list(key, raw)?),
            other => {
                return Err(Error::invalid(
                    "sweep",
                    format!("unknown key `{other}`, expected one of {}", SweepAxis::KEYS.join(", ")),
                ))
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub seeds: Vec<u64>,
    pub protocols: Vec<Protocol>,
    pub algorithms: Vec<Algorithm>,
    pub config: SystemConfig,
    pub template: ScenarioTemplate,
    pub settings: AoSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Infeasible,
    Invalid,
    Failed,
}

impl RowStatus {
    fn of(err: &Error) -> Self {
        match err {
            e if e.is_infeasible() => RowStatus::Infeasible,
            Error::InvalidConfig { .. } => RowStatus::Invalid,
            _ => RowStatus::Failed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub run_id: usize,
    pub parameter: String,
    pub value: String,
    pub seed: u64,
    pub protocol: Protocol,
    pub algo: Algorithm,
    pub n_antennas: usize,
    pub k_devices: usize,
    pub delta: f64,
    pub circuit_power_w: f64,
    pub status: RowStatus,
    /// Bits per Hz delivered over one period of `period_s` seconds.
    pub sum_rate_bits: Option<f64>,
    pub ao_iterations: usize,
    pub fitness_evaluations: usize,
    #[serde(skip)]
    pub message: Option<String>,
    #[serde(skip)]
    pub wall_time_s: f64,
    #[serde(skip)]
    pub trace: Vec<f64>,
    #[serde(skip)]
    pub final_positions: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub wall_time_s: f64,
}

impl SweepResult {
    pub fn n_ok(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::Ok).count()
    }
}

#[derive(Debug, Clone)]
struct Point {
    config: SystemConfig,
    template: ScenarioTemplate,
    protocols: Vec<Protocol>,
    algorithms: Vec<Algorithm>,
}

struct Job {
    label: String,
    seed: u64,
    protocol: Protocol,
    algo: Algorithm,
    config: SystemConfig,
    template: ScenarioTemplate,
}

/// Runs every (value, seed, protocol, algorithm) combination in that
/// nesting order. Rows run in parallel on the current rayon pool, but each
/// row depends only on its own inputs, so the output does not depend on the
/// number of threads. A failing row is recorded and the rest carry on.
pub fn run_sweep(spec: &SweepSpec) -> SweepResult {
    let started = Instant::now();
    let mut jobs = Vec::new();
    for (i, label) in spec.axis.labels().into_iter().enumerate() {
        let mut point = Point {
            config: spec.config.clone(),
            template: spec.template.clone(),
            protocols: spec.protocols.clone(),
            algorithms: spec.algorithms.clone(),
        };
        spec.axis.apply(i, &mut point);
        for &seed in &spec.seeds {
            for &protocol in &point.protocols {
                for &algo in &point.algorithms {
                    jobs.push(Job {
                        label: label.clone(),
                        seed,
                        protocol,
                        algo,
                        config: point.config.clone(),
                        template: point.template.clone(),
                    });
                }
            }
        }
    }

    let rows = jobs
        .par_iter()
        .enumerate()
        .map(|(run_id, job)| run_row(run_id, job, spec))
        .collect();
    SweepResult {
        rows,
        wall_time_s: started.elapsed().as_secs_f64(),
    }
}

fn run_row(run_id: usize, job: &Job, spec: &SweepSpec) -> SweepRow {
    let started = Instant::now();
    let mut settings = spec.settings.clone();
    settings.spde.rng_seed = mix_seed(spec.settings.spde.rng_seed, job.seed);
    let outcome = job
        .config
        .validate()
        .and_then(|_| generate_scenario(job.seed, &job.template, &job.config))
        .and_then(|sc| ao_solve(&sc, &job.config, job.protocol, job.algo, &settings));

    let mut row = SweepRow {
        run_id,
        parameter: spec.axis.key().to_string(),
        value: job.label.clone(),
        seed: job.seed,
        protocol: job.protocol,
        algo: job.algo,
        n_antennas: if job.algo == Algorithm::Conv { 1 } else { job.template.n_antennas },
        k_devices: job.template.k_devices,
        delta: job.config.delta,
        circuit_power_w: job.template.circuit_power_w,
        status: RowStatus::Ok,
        sum_rate_bits: None,
        ao_iterations: 0,
        fitness_evaluations: 0,
        message: None,
        wall_time_s: 0.0,
        trace: Vec::new(),
        final_positions: Vec::new(),
    };
    match outcome {
        Ok(report) => {
            let period = job.config.period_s;
            row.sum_rate_bits = Some(report.sum_rate_bits() * period);
            row.ao_iterations = report.ao_iterations;
            row.fitness_evaluations = report.fitness_evaluations;
            row.trace = report.objective_trace.iter().map(|v| v * period).collect();
            row.final_positions = report.final_positions;
        }
        Err(e) => {
            row.status = RowStatus::of(&e);
            row.message = Some(e.to_string());
        }
    }
    row.wall_time_s = started.elapsed().as_secs_f64();
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::{EwConfig, SpdeConfig};

    fn quick_spec(axis: SweepAxis) -> SweepSpec {
        SweepSpec {
            axis,
            seeds: vec![1, 2],
            protocols: vec![Protocol::Tdma, Protocol::Noma],
            algorithms: vec![Algorithm::Ew],
            config: SystemConfig::default(),
            template: ScenarioTemplate {
                n_antennas: 3,
                k_devices: 4,
                ..Default::default()
            },
            settings: AoSettings {
                ew: EwConfig {
                    grid_points: 50,
                    ..Default::default()
                },
                spde: SpdeConfig {
                    population: 8,
                    max_generations: 5,
                    rng_seed: 0,
                },
                max_ao_iters: 3,
                ..Default::default()
            },
        }
    }

    #[test]
    fn parses_axes() {
        assert_eq!(
            "delta=0.1, 0.2".parse::<SweepAxis>().unwrap(),
            SweepAxis::Delta(vec![0.1, 0.2])
        );
        assert_eq!(
            "protocol=tdma,noma".parse::<SweepAxis>().unwrap(),
            SweepAxis::Protocol(vec![Protocol::Tdma, Protocol::Noma])
        );
        assert!("n_antennas=2,x".parse::<SweepAxis>().is_err());
        assert!("bogus=1".parse::<SweepAxis>().is_err());
        assert!("delta".parse::<SweepAxis>().is_err());
        assert!("delta=".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn rows_follow_nesting_order() {
        let res = run_sweep(&quick_spec(SweepAxis::NAntennas(vec![1, 2])));
        let keys: Vec<(String, u64, Protocol)> =
            res.rows.iter().map(|r| (r.value.clone(), r.seed, r.protocol)).collect();
        assert_eq!(keys.len(), 8);
        assert_eq!(keys[0], ("1".into(), 1, Protocol::Tdma));
        assert_eq!(keys[1], ("1".into(), 1, Protocol::Noma));
        assert_eq!(keys[2], ("1".into(), 2, Protocol::Tdma));
        assert_eq!(keys[4], ("2".into(), 1, Protocol::Tdma));
        assert!(res.rows.iter().enumerate().all(|(i, r)| r.run_id == i));
        assert_eq!(res.n_ok(), 8);
    }

    #[test]
    fn zero_delta_rows_fail_without_stopping_the_sweep() {
        let res = run_sweep(&quick_spec(SweepAxis::Delta(vec![0.0, 0.5])));
        for r in &res.rows {
            if r.value == "0" {
                assert_eq!(r.status, RowStatus::Infeasible);
                assert!(r.sum_rate_bits.is_none());
                assert!(r.message.is_some());
            } else {
                assert_eq!(r.status, RowStatus::Ok);
            }
        }
    }

    #[test]
    fn protocol_axis_replaces_protocol_list() {
        let res = run_sweep(&quick_spec(SweepAxis::Protocol(vec![Protocol::Noma])));
        assert_eq!(res.rows.len(), 2);
        assert!(res.rows.iter().all(|r| r.protocol == Protocol::Noma && r.parameter == "protocol"));
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let mut spec = quick_spec(SweepAxis::Single);
        spec.algorithms = vec![Algorithm::Ew, Algorithm::Spde, Algorithm::Conv];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_sweep(&spec))
        };
        let a = run(1);
        let b = run(3);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.sum_rate_bits, y.sum_rate_bits);
            assert_eq!(x.trace, y.trace);
            assert_eq!(x.final_positions, y.final_positions);
        }
    }
}
