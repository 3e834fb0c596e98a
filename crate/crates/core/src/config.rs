//! Run configuration and its TOML file format.
//!
//! Refinement settings are flat top-level keys named after the fields of
//! [`SlrConfig`]; simulator settings live in an optional `[sim]` table.
//! Missing keys take their defaults and unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SlrError};

/// How refined soft labels become hard labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hardening {
    /// HDBSCAN over the soft-label rows.
    Hdbscan,
    /// Per-row argmax.
    Max,
}

/// Which previous-epoch labels seed the projection matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionSource {
    Refined,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlrConfig {
    /// Weight of the current one-hot label in the soft mix.
    pub alpha: f64,
    /// HDBSCAN minimum cluster size for hardening.
    pub min_cluster_size: usize,
    /// DBSCAN radius; `None` derives it from the first epoch's
    /// nearest-neighbor distances.
    pub dbscan_eps: Option<f64>,
    pub dbscan_min_pts: usize,
    /// Multiplier on the median nearest-neighbor distance when
    /// `dbscan_eps` is unset.
    pub eps_nn_factor: f64,
    pub lambda_c: f64,
    pub lambda_sc: f64,
    pub lambda_st: f64,
    pub ema_momentum: f64,
    pub rng_seed: u64,
    pub hardening: Hardening,
    pub projection_source: ProjectionSource,
}

impl Default for SlrConfig {
    fn default() -> Self {
        Self {
            alpha: 0.90,
            min_cluster_size: 7,
            dbscan_eps: None,
            dbscan_min_pts: 7,
            eps_nn_factor: 0.5,
            lambda_c: 0.5,
            lambda_sc: 0.5,
            lambda_st: 1.0,
            ema_momentum: 0.999,
            rng_seed: 0,
            hardening: Hardening::Hdbscan,
            projection_source: ProjectionSource::Refined,
        }
    }
}

fn unit_interval(name: &str, v: f64, problems: &mut Vec<String>) {
    if !(0.0..=1.0).contains(&v) {
        problems.push(format!("{name} = {v} must lie in [0, 1]"));
    }
}

fn non_negative(name: &str, v: f64, problems: &mut Vec<String>) {
    if !(v.is_finite() && v >= 0.0) {
        problems.push(format!("{name} = {v} must be a finite value >= 0"));
    }
}

fn finish(problems: Vec<String>) -> Result<()> {
    if problems.is_empty() {
        Ok(())
    } else {
        Err(SlrError::Config(problems.join("; ")))
    }
}

impl SlrConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        unit_interval("alpha", self.alpha, &mut problems);
        unit_interval("ema_momentum", self.ema_momentum, &mut problems);
        if self.min_cluster_size < 2 {
            problems.push(format!(
                "min_cluster_size = {} must be >= 2",
                self.min_cluster_size
            ));
        }
        if let Some(eps) = self.dbscan_eps {
            if !(eps.is_finite() && eps > 0.0) {
                problems.push(format!("dbscan_eps = {eps} must be > 0"));
            }
        }
        if self.dbscan_min_pts < 1 {
            problems.push("dbscan_min_pts must be >= 1".into());
        }
        if !(self.eps_nn_factor.is_finite() && self.eps_nn_factor > 0.0) {
            problems.push(format!(
                "eps_nn_factor = {} must be > 0",
                self.eps_nn_factor
            ));
        }
        non_negative("lambda_c", self.lambda_c, &mut problems);
        non_negative("lambda_sc", self.lambda_sc, &mut problems);
        non_negative("lambda_st", self.lambda_st, &mut problems);
        finish(problems)
    }
}

/// Parameters of the synthetic epoch stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_identities: usize,
    pub samples_per_identity: usize,
    pub dim: usize,
    pub initial_noise_sigma: f64,
    pub final_noise_sigma: f64,
    /// Standard deviation of the per-epoch centroid jitter.
    pub drift_sigma: f64,
    pub n_epochs: usize,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_identities: 5,
            samples_per_identity: 40,
            dim: 16,
            initial_noise_sigma: 1.2,
            final_noise_sigma: 0.3,
            drift_sigma: 0.05,
            n_epochs: 10,
            rng_seed: 0,
        }
    }
}

impl SimConfig {
    pub fn n_samples(&self) -> usize {
        self.n_identities * self.samples_per_identity
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("n_identities", self.n_identities),
            ("samples_per_identity", self.samples_per_identity),
            ("dim", self.dim),
            ("n_epochs", self.n_epochs),
        ] {
            if v == 0 {
                problems.push(format!("sim.{name} must be >= 1"));
            }
        }
        if !(self.initial_noise_sigma.is_finite() && self.initial_noise_sigma > 0.0) {
            problems.push(format!(
                "sim.initial_noise_sigma = {} must be > 0",
                self.initial_noise_sigma
            ));
        }
        non_negative(
            "sim.final_noise_sigma",
            self.final_noise_sigma,
            &mut problems,
        );
        non_negative("sim.drift_sigma", self.drift_sigma, &mut problems);
        if self.final_noise_sigma > self.initial_noise_sigma {
            problems.push(format!(
                "sim.final_noise_sigma = {} must not exceed sim.initial_noise_sigma = {}",
                self.final_noise_sigma, self.initial_noise_sigma
            ));
        }
        finish(problems)
    }
}

/// Contents of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub slr: SlrConfig,
    pub sim: SimConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| SlrError::Config(e.to_string()))?;
        let sim = match table.remove("sim") {
            Some(toml::Value::Table(t)) => {
                SimConfig::deserialize(t).map_err(|e| SlrError::Config(format!("[sim]: {e}")))?
            }
            Some(_) => return Err(SlrError::Config("`sim` must be a table".into())),
            None => SimConfig::default(),
        };
        let slr = SlrConfig::deserialize(table).map_err(|e| SlrError::Config(e.to_string()))?;
        let cfg = Self { slr, sim };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SlrError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.slr.validate();
        let b = self.sim.validate();
        match (a, b) {
            (Ok(()), Ok(())) => Ok(()),
            (Err(e), Ok(())) | (Ok(()), Err(e)) => Err(e),
            (Err(SlrError::Config(x)), Err(SlrError::Config(y))) => {
                Err(SlrError::Config(format!("{x}; {y}")))
            }
            (Err(e), Err(_)) => Err(e),
        }
    }

    pub fn to_toml_string(&self) -> String {
        let mut table = toml::Table::try_from(&self.slr).expect("config serializes");
        table.insert(
            "sim".into(),
            toml::Value::try_from(&self.sim).expect("config serializes"),
        );
        toml::to_string(&table).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_settings() {
        let c = SlrConfig::default();
        assert_eq!(c.alpha, 0.90);
        assert_eq!(c.min_cluster_size, 7);
        assert_eq!((c.lambda_c, c.lambda_sc, c.lambda_st), (0.5, 0.5, 1.0));
        c.validate().unwrap();
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_flat_keys_and_sim_table() {
        let cfg = RunConfig::from_toml_str(
            "alpha = 0.8\nhardening = \"max\"\ndbscan_eps = 0.4\n[sim]\nn_epochs = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.slr.alpha, 0.8);
        assert_eq!(cfg.slr.hardening, Hardening::Max);
        assert_eq!(cfg.slr.dbscan_eps, Some(0.4));
        assert_eq!(cfg.sim.n_epochs, 3);
    }

    #[test]
    fn rejects_out_of_range_and_unknown() {
        let err = RunConfig::from_toml_str("alpha = 1.5\n[sim]\nfinal_noise_sigma = 9.0")
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("alpha") && err.contains("final_noise_sigma"),
            "{err}"
        );
        assert!(RunConfig::from_toml_str("alpah = 0.5").is_err());
        assert!(RunConfig::from_toml_str("[sim]\nbogus = 1").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.slr.dbscan_eps = Some(0.25);
        cfg.sim.n_epochs = 4;
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
