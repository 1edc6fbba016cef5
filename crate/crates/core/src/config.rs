//! JSON run configuration. Units are part of the key names; dBm figures are
//! converted to watts here and nowhere else.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dbm_to_watts, EhParams, SystemConfig, SPEED_OF_LIGHT_M_PER_S};
use crate::orchestrator::{AoSettings, PlacementObjective, ScenarioTemplate};
use crate::placement::{EwConfig, SpdeConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub carrier_frequency_hz: f64,
    pub effective_index: f64,
    pub delta: f64,
    pub mu_db_per_m: f64,
    pub hap_power_dbm: f64,
    pub noise_dbm: f64,
    /// Defaults to half a free-space wavelength.
    pub min_spacing_m: Option<f64>,
    pub waveguide_span_m: f64,
    pub waveguide_height_m: f64,
    pub feed_x_m: f64,
    pub period_s: f64,

    pub n_antennas: usize,
    pub k_devices: usize,
    pub area_x_m: f64,
    pub area_y_m: f64,
    pub eh_a: f64,
    pub eh_b_w: f64,
    pub eh_z_w: f64,
    pub circuit_power_w: f64,

    pub ew_grid_points: usize,
    pub ew_max_sweeps: usize,
    pub ew_improvement_tol: f64,
    pub spde_population: usize,
    pub spde_generations: usize,
    pub spde_seed: u64,
    pub placement_objective: PlacementObjective,
    pub max_ao_iters: usize,
    pub ao_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sys = SystemConfig::default();
        let template = ScenarioTemplate::default();
        let ao = AoSettings::default();
        Self {
            carrier_frequency_hz: sys.carrier_frequency_hz,
            effective_index: sys.effective_index,
            delta: sys.delta,
            mu_db_per_m: sys.mu_db_per_m,
            hap_power_dbm: 40.0,
            noise_dbm: -120.0,
            min_spacing_m: None,
            waveguide_span_m: sys.waveguide_span_m,
            waveguide_height_m: sys.waveguide_height_m,
            feed_x_m: sys.feed_x_m,
            period_s: sys.period_s,
            n_antennas: template.n_antennas,
            k_devices: template.k_devices,
            area_x_m: template.area_x_m,
            area_y_m: template.area_y_m,
            eh_a: template.eh.a,
            eh_b_w: template.eh.b,
            eh_z_w: template.eh.z,
            circuit_power_w: template.circuit_power_w,
            ew_grid_points: ao.ew.grid_points,
            ew_max_sweeps: ao.ew.max_sweeps,
            ew_improvement_tol: ao.ew.improvement_tol,
            spde_population: ao.spde.population,
            spde_generations: ao.spde.max_generations,
            spde_seed: ao.spde.rng_seed,
            placement_objective: ao.objective,
            max_ao_iters: ao.max_ao_iters,
            ao_tol: ao.tol,
        }
    }
}

fn finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("{v} is not finite")))
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("{v} must be strictly positive")))
    }
}

fn nonnegative(key: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("{v} must be nonnegative")))
    }
}

impl RunConfig {
    /// Parses and validates. Errors name the offending key.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let key = if path == "." { "config".to_string() } else { path };
            Error::invalid(key, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::load(Some(path), &[])
    }

    /// Reads `path` (or starts from the defaults when `None`) and applies
    /// `KEY=VALUE` overrides before validating. Values are read as JSON,
    /// falling back to a plain string.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::invalid("config", format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::invalid("config", format!("{} is not valid JSON: {e}", p.display())))?
            }
            None => serde_json::Value::Object(Default::default()),
        };
        let Some(map) = doc.as_object_mut() else {
            return Err(Error::invalid("config", "top level must be a JSON object"));
        };
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid("set", format!("expected KEY=VALUE, got `{item}`")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            map.insert(key.trim().to_string(), value);
        }
        Self::from_json_str(&doc.to_string())
    }

    pub fn validate(&self) -> Result<()> {
        finite("hap_power_dbm", self.hap_power_dbm)?;
        finite("noise_dbm", self.noise_dbm)?;
        if let Some(s) = self.min_spacing_m {
            positive("min_spacing_m", s)?;
        }
        if self.n_antennas == 0 {
            return Err(Error::invalid("n_antennas", "must be at least 1"));
        }
        if self.k_devices == 0 {
            return Err(Error::invalid("k_devices", "must be at least 1"));
        }
        nonnegative("area_x_m", self.area_x_m)?;
        nonnegative("area_y_m", self.area_y_m)?;
        positive("eh_a", self.eh_a)?;
        positive("eh_b_w", self.eh_b_w)?;
        positive("eh_z_w", self.eh_z_w)?;
        nonnegative("circuit_power_w", self.circuit_power_w)?;
        nonnegative("ao_tol", self.ao_tol)?;
        let system = self.system();
        system.validate()?;
        if self.n_antennas as f64 * system.min_spacing_m > system.waveguide_span_m {
            return Err(Error::invalid(
                "n_antennas",
                format!(
                    "{} antennas at {} m spacing do not fit on {} m of waveguide",
                    self.n_antennas, system.min_spacing_m, system.waveguide_span_m
                ),
            ));
        }
        let ao = self.settings();
        ao.ew.validate()?;
        ao.spde.validate()
    }

    pub fn system(&self) -> SystemConfig {
        SystemConfig {
            carrier_frequency_hz: self.carrier_frequency_hz,
            effective_index: self.effective_index,
            delta: self.delta,
            mu_db_per_m: self.mu_db_per_m,
            hap_power_w: dbm_to_watts(self.hap_power_dbm),
            noise_power_w: dbm_to_watts(self.noise_dbm),
            min_spacing_m: self
                .min_spacing_m
                .unwrap_or(SPEED_OF_LIGHT_M_PER_S / self.carrier_frequency_hz / 2.0),
            waveguide_span_m: self.waveguide_span_m,
            waveguide_height_m: self.waveguide_height_m,
            feed_x_m: self.feed_x_m,
            period_s: self.period_s,
        }
    }

    pub fn template(&self) -> ScenarioTemplate {
        ScenarioTemplate {
            n_antennas: self.n_antennas,
            k_devices: self.k_devices,
            area_x_m: self.area_x_m,
            area_y_m: self.area_y_m,
            eh: EhParams {
                a: self.eh_a,
                b: self.eh_b_w,
                z: self.eh_z_w,
            },
            circuit_power_w: self.circuit_power_w,
        }
    }

    pub fn settings(&self) -> AoSettings {
        AoSettings {
            ew: EwConfig {
                grid_points: self.ew_grid_points,
                max_sweeps: self.ew_max_sweeps,
                improvement_tol: self.ew_improvement_tol,
            },
            spde: SpdeConfig {
                population: self.spde_population,
                max_generations: self.spde_generations,
                rng_seed: self.spde_seed,
            },
            objective: self.placement_objective,
            max_ao_iters: self.max_ao_iters,
            tol: self.ao_tol,
            ..Default::default()
        }
    }

    /// Snapshot for run manifests.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = RunConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let sys = cfg.system();
        assert_eq!(sys, SystemConfig::default());
        assert!((sys.hap_power_w - 10.0).abs() < 1e-12);
        assert!((sys.noise_power_w - 1e-15).abs() < 1e-27);
        assert_eq!(cfg.template(), ScenarioTemplate::default());
        assert_eq!(cfg.settings(), AoSettings::default());
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = RunConfig::from_json_str(r#"{"n_antenas": 3}"#).unwrap_err();
        assert!(err.to_string().contains("n_antenas"), "{err}");
    }

    #[test]
    fn type_errors_name_the_key() {
        let err = RunConfig::from_json_str(r#"{"delta": "big"}"#).unwrap_err();
        match err {
            Error::InvalidConfig { key, .. } => assert_eq!(key, "delta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_errors_name_the_key() {
        for (text, key) in [
            (r#"{"delta": 1.5}"#, "delta"),
            (r#"{"k_devices": 0}"#, "k_devices"),
            (r#"{"eh_z_w": -1}"#, "eh_z_w"),
            (r#"{"spde_population": 3}"#, "spde_population"),
            (r#"{"n_antennas": 5000}"#, "n_antennas"),
        ] {
            match RunConfig::from_json_str(text).unwrap_err() {
                Error::InvalidConfig { key: k, .. } => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn snapshot_round_trips() {
        let cfg = RunConfig {
            n_antennas: 2,
            min_spacing_m: Some(0.01),
            ..Default::default()
        };
        let back: RunConfig = serde_json::from_value(cfg.to_json_value()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn overrides_apply_on_top_of_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"n_antennas": 2, "delta": 0.5}"#).unwrap();
        let cfg = RunConfig::load(Some(&path), &["delta=0.55".into(), "placement_objective=reallocated".into()]).unwrap();
        assert_eq!(cfg.n_antennas, 2);
        assert_eq!(cfg.delta, 0.55);
        assert_eq!(cfg.placement_objective, PlacementObjective::Reallocated);
        let err = RunConfig::load(None, &["k_devices=many".into()]).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref key, .. } if key == "k_devices"), "{err:?}");
        assert!(RunConfig::load(None, &["delta".into()]).is_err());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = RunConfig::from_path(Path::new("/nonexistent/run.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/run.json"));
    }
}
