//! Experiment configuration read from a TOML document.
//!
//! Every section is optional and unknown keys are rejected. Figure commands fill in
//! their own default grids and channel sets for anything left out.

use std::path::{Path, PathBuf};

use cogjam_core::{AttackStrategy, GilbertElliotParams, JamEffect};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub channels: ChannelSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { id: None, seed: default_seed() }
    }
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSet {
    Baseline,
    Table1,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// Channel set; each command has its own default when absent.
    #[serde(default)]
    pub set: Option<ChannelSet>,
    /// Copies of the baseline channel (`set = "baseline"` only).
    #[serde(default)]
    pub count: Option<usize>,
    /// Rows for `set = "explicit"`.
    #[serde(default)]
    pub rows: Vec<GilbertElliotParams>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    #[serde(default)]
    pub tau: Option<Vec<f64>>,
    #[serde(default)]
    pub q: Option<Vec<f64>>,
    #[serde(default)]
    pub n: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_warmup")]
    pub warmup: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub jam_effect: JamEffect,
    /// Defender temperature for the Boltzmann curves.
    #[serde(default = "default_tau")]
    pub defender_tau: f64,
    /// Temperature of the Ω attack strategy.
    #[serde(default = "default_tau")]
    pub attacker_tau: f64,
    /// Attacker used by `sweep`.
    #[serde(default = "default_attacker")]
    pub attacker: AttackStrategy,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            warmup: default_warmup(),
            replications: default_replications(),
            jam_effect: JamEffect::default(),
            defender_tau: default_tau(),
            attacker_tau: default_tau(),
            attacker: default_attacker(),
        }
    }
}

fn default_horizon() -> u64 {
    50_000
}

fn default_warmup() -> u64 {
    5_000
}

fn default_replications() -> usize {
    24
}

fn default_tau() -> f64 {
    2.0
}

fn default_attacker() -> AttackStrategy {
    AttackStrategy::Greedy
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_plots")]
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), plots: default_plots() }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_plots() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let unit = |name: &str, grid: &Option<Vec<f64>>| -> Result<(), CliError> {
            match grid {
                Some(g) if g.is_empty() => bad(format!("sweep.{name} is empty")),
                Some(g) if g.iter().any(|v| !(0.0..=1.0).contains(v)) => bad(format!("sweep.{name} values must lie in [0, 1]")),
                _ => Ok(()),
            }
        };
        unit("alpha", &self.sweep.alpha)?;
        unit("q", &self.sweep.q)?;
        if let Some(tau) = &self.sweep.tau {
            if tau.is_empty() || tau.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                return bad("sweep.tau must be a nonempty list of positive temperatures".into());
            }
        }
        if let Some(n) = &self.sweep.n {
            if n.is_empty() || n.iter().any(|&k| k < 2) {
                return bad("sweep.n must be a nonempty list of channel counts of at least 2".into());
            }
        }
        if let Some(q) = &self.sweep.q {
            if q.iter().any(|&v| v < 0.5) {
                return bad("sweep.q values must lie in [0.5, 1]".into());
            }
        }
        match (self.channels.set, self.channels.rows.is_empty(), self.channels.count) {
            (Some(ChannelSet::Explicit), true, _) => return bad("channels.set = \"explicit\" needs channels.rows".into()),
            (Some(ChannelSet::Explicit), false, Some(_)) => return bad("channels.count applies to the baseline set only".into()),
            (Some(ChannelSet::Baseline) | Some(ChannelSet::Table1) | None, false, _) => {
                return bad("channels.rows requires channels.set = \"explicit\"".into())
            }
            (Some(ChannelSet::Table1), _, Some(_)) => return bad("channels.count applies to the baseline set only".into()),
            _ => {}
        }
        if self.channels.count.is_some_and(|c| c < 2) {
            return bad("channels.count must be at least 2".into());
        }
        let sim = &self.sim;
        if sim.horizon == 0 || sim.warmup >= sim.horizon {
            return bad(format!("sim.warmup ({}) must be below sim.horizon ({})", sim.warmup, sim.horizon));
        }
        if sim.replications == 0 {
            return bad("sim.replications must be positive".into());
        }
        for (name, t) in [("defender_tau", sim.defender_tau), ("attacker_tau", sim.attacker_tau)] {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("sim.{name} must be a positive temperature"));
            }
        }
        sim.attacker.validate().map_err(|e| CliError::Config(format!("sim.attacker: {e}")))?;
        Ok(())
    }

    /// Channels of the configured set, or of `default` when none is configured.
    pub fn channels_or(&self, default: ChannelSet) -> Vec<GilbertElliotParams> {
        match self.channels.set.unwrap_or(default) {
            ChannelSet::Baseline => vec![GilbertElliotParams::baseline(); self.channels.count.unwrap_or(4)],
            ChannelSet::Table1 => GilbertElliotParams::table1(),
            ChannelSet::Explicit => self.channels.rows.clone(),
        }
    }

    /// Hex SHA-256 of the resolved configuration in canonical TOML form.
    /// The output section is left out: where results go does not change them.
    pub fn sha256(&self) -> String {
        let content = Self { output: OutputSection::default(), ..self.clone() };
        let canonical = toml::to_string(&content).expect("configuration serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step).round() as usize;
    // Rounded to 1e-12 so that printed grid values stay short.
    (0..=count).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
}
