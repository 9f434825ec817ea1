use std::path::Path;

use serde::Deserialize;

use crate::ahs::{ScheduleConfig, ATOM_CAP, DEFAULT_SHOTS};
use crate::anneal::AnnealOverrides;
use crate::partition::DEFAULT_BOX_FACTOR;
use crate::portfolio::DEFAULT_RISK_AVERSION;
use crate::{Error, Result};

pub const DEFAULT_REPEATS: usize = 5;
pub const DEFAULT_DENSITY: f64 = 0.3;

/// Every knob of the hybrid pipeline and of the benchmark protocol.
///
/// Read from a TOML file; absent keys keep their defaults and unknown keys
/// are rejected. Schedule and annealing settings live in the `[schedule]`
/// and `[sa]` tables.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub blockade_radius: f64,
    /// Defaults to `2.5 · blockade_radius`.
    pub box_side: Option<f64>,
    /// Conflict threshold; defaults to a tenth of the largest coupling.
    pub theta: Option<f64>,
    pub schedule: ScheduleConfig,
    pub shots: usize,
    /// Largest register that is simulated; larger boxes are quadrisected.
    pub atom_cap: usize,
    pub sa: AnnealOverrides,
    pub repeats: usize,
    pub global_seed: u64,
    /// Risk aversion of portfolio instances.
    pub gamma: f64,
    /// Off-diagonal density of random instances.
    pub density: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            blockade_radius: 1.0,
            box_side: None,
            theta: None,
            schedule: ScheduleConfig::default(),
            shots: DEFAULT_SHOTS,
            atom_cap: ATOM_CAP,
            sa: AnnealOverrides::default(),
            repeats: DEFAULT_REPEATS,
            global_seed: 0,
            gamma: DEFAULT_RISK_AVERSION,
            density: DEFAULT_DENSITY,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn box_side(&self) -> f64 {
        self.box_side
            .unwrap_or(DEFAULT_BOX_FACTOR * self.blockade_radius)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let r = self.blockade_radius;
        if !(r.is_finite() && r > 0.0) {
            return bad(format!("blockade_radius must be positive, got {r}"));
        }
        if self.box_side().is_nan() || self.box_side() <= 2.0 * r {
            return bad(format!(
                "box_side {} must exceed twice the blockade radius {r}",
                self.box_side()
            ));
        }
        if let Some(t) = self.theta {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("theta must be positive, got {t}"));
            }
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.shots == 0 {
            return bad("shots must be at least 1".into());
        }
        if self.atom_cap == 0 || self.atom_cap > ATOM_CAP {
            return bad(format!(
                "atom_cap must lie in 1..={ATOM_CAP}, got {}",
                self.atom_cap
            ));
        }
        if self.schedule.time_steps < 100 {
            return bad(format!(
                "schedule.time_steps must be at least 100, got {}",
                self.schedule.time_steps
            ));
        }
        self.schedule.schedule_for([1.0])?;
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad(format!("gamma must be non-negative, got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return bad(format!("density must lie in [0, 1], got {}", self.density));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.box_side(), 2.5);
        assert_eq!(PipelineConfig::from_toml_str("").unwrap(), cfg);
    }

    #[test]
    fn parses_nested_tables() {
        let cfg = PipelineConfig::from_toml_str(
            "blockade_radius = 2.0\nrepeats = 3\nglobal_seed = 9\n\
             [schedule]\ntotal_time = 2.0\n[sa]\nsweeps = 10\n",
        )
        .unwrap();
        assert_eq!(cfg.box_side(), 5.0);
        assert_eq!(cfg.repeats, 3);
        assert_eq!(cfg.schedule.total_time, 2.0);
        assert_eq!(cfg.schedule.time_steps, 400);
        assert_eq!(cfg.sa.sweeps, Some(10));
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "box_side = 2.0",
            "repeats = 0",
            "bogus = 1",
            "blockade_radius = -1.0",
            "[schedule]\ntime_steps = 50",
            "[schedule]\ndelta_global = 1.0",
            "gamma = -0.1",
            "atom_cap = 15",
            "repeats = ",
        ] {
            assert!(PipelineConfig::from_toml_str(text).is_err(), "{text}");
        }
    }
}
