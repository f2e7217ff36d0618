//! Experiment configuration file (TOML).

use std::path::{Path, PathBuf};

use anyhow::Context;
use hambreak::empirical::{BpdSide, EventSpec};
use hambreak::montecarlo::RunConfig;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    /// The thirteen single-element setups.
    #[serde(rename = "paper13")]
    #[value(name = "paper13")]
    Standard,
    /// Fundamentalist, stochastic, combination and memory families.
    Extensions,
    /// The thirteen setups over the default beta and intensity grid.
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// Named setup list; ignored when `grid` is set.
    pub setups: Vec<String>,
    pub grid: Option<Grid>,
    /// Beta axis; defaults to `run.market.beta`.
    pub betas: Vec<f64>,
    /// Intensity levels in `(0, 1]`.
    pub levels: Vec<f64>,
    pub write_samples: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            setups: Vec::new(),
            grid: None,
            betas: Vec::new(),
            levels: vec![1.0],
            write_samples: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmpiricalSection {
    /// Long-format price CSV (`date,ticker,close`).
    pub data: Option<PathBuf>,
    /// Events file with `[[event]]` tables; used when `events` is empty.
    pub events_file: Option<PathBuf>,
    pub events: Vec<EventSpec>,
    pub bpd_side: BpdSide,
    pub window_days: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Master simulation seed.
    pub seed: u64,
    /// Seed for the permutation tests.
    pub perm_seed: u64,
    pub n_perm: usize,
    pub out_dir: Option<PathBuf>,
    pub run: RunConfig,
    pub simulate: SimulateSection,
    pub empirical: EmpiricalSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            perm_seed: 7,
            n_perm: 999,
            out_dir: None,
            run: RunConfig::default(),
            simulate: SimulateSection::default(),
            empirical: EmpiricalSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::Invalid)?;
        let mut cfg: ExperimentConfig = toml::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))
            .map_err(Failure::Invalid)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let e = &mut cfg.empirical;
        for p in [&mut e.data, &mut e.events_file].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::Invalid(anyhow::anyhow!(m)));
        if self.n_perm < 99 {
            return bad(format!("n_perm must be >= 99, got {}", self.n_perm));
        }
        for &l in &self.simulate.levels {
            if !(l > 0.0 && l <= 1.0) {
                return bad(format!("intensity level must be in (0, 1], got {l}"));
            }
        }
        for &b in &self.simulate.betas {
            if !(b.is_finite() && b >= 0.0) {
                return bad(format!("beta must be finite and >= 0, got {b}"));
            }
        }
        if !self.run.breaks.is_empty() {
            return bad("set breaks through simulate.setups, not run.breaks".into());
        }
        if self.simulate.levels.is_empty() {
            return bad("simulate.levels must not be empty".into());
        }
        self.run
            .validate()
            .context("invalid [run] section")
            .map_err(Failure::Invalid)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventsFile {
    event: Vec<EventSpec>,
}

pub fn load_events(path: &Path) -> Result<Vec<EventSpec>, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Invalid)?;
    let file: EventsFile = toml::from_str(&text)
        .with_context(|| format!("invalid events file {}", path.display()))
        .map_err(Failure::Invalid)?;
    if file.event.is_empty() {
        return Err(Failure::Invalid(anyhow::anyhow!(
            "{}: no events",
            path.display()
        )));
    }
    Ok(file.event)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("seeds = 1").is_err());
        assert!(toml::from_str::<ExperimentConfig>("[run]\nperiod = 10").is_err());
        let c: ExperimentConfig = toml::from_str("seed = 3\n[run]\nn_runs = 5").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.run.n_runs, 5);
        assert_eq!(c.n_perm, 999);
    }

    #[test]
    fn shipped_configs_parse() {
        let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let c = ExperimentConfig::load(&root.join("experiment.toml")).unwrap();
        c.validate().unwrap();
        assert_eq!(
            load_events(&root.join("djia_events.toml")).unwrap().len(),
            5
        );
        assert_eq!(
            load_events(&root.join("djia_events_stable.toml"))
                .unwrap()
                .len(),
            5
        );
    }
}
