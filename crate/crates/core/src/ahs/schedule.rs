use std::f64::consts::PI;

use serde::Deserialize;

use crate::{Error, Result};

pub const DEFAULT_TIME_STEPS: usize = 400;

/// Piecewise-linear drive waveforms of one adiabatic run.
///
/// * `Ω(t)`: trapezoid, 0 → `omega_max` over `ramp_fraction·T`, hold,
///   then back to 0 over the last `ramp_fraction·T`.
/// * `Δ_local(t)`: 0 → `delta_local_final` linearly over the whole run;
///   atom `i` sees `Δ_local(t)·w_i`.
/// * `Δ_global`: constant and negative.
///
/// Times in µs, frequencies in rad/µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSchedule {
    pub total_time: f64,
    pub omega_max: f64,
    pub delta_global: f64,
    pub delta_local_final: f64,
    pub ramp_fraction: f64,
}

impl DriveSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return bad(format!(
                "total time must be positive, got {}",
                self.total_time
            ));
        }
        if !(self.omega_max.is_finite() && self.omega_max > 0.0) {
            return bad(format!(
                "peak Rabi frequency must be positive, got {}",
                self.omega_max
            ));
        }
        if !(self.delta_global.is_finite() && self.delta_global < 0.0) {
            return bad(format!(
                "global detuning must be negative, got {}",
                self.delta_global
            ));
        }
        if !(self.delta_local_final.is_finite() && self.delta_local_final > 0.0) {
            return bad(format!(
                "final local detuning must be positive, got {}",
                self.delta_local_final
            ));
        }
        if !(self.ramp_fraction > 0.0 && self.ramp_fraction < 0.5) {
            return bad(format!(
                "ramp fraction must lie in (0, 0.5), got {}",
                self.ramp_fraction
            ));
        }
        Ok(())
    }

    pub fn omega(&self, t: f64) -> f64 {
        let ramp = self.ramp_fraction * self.total_time;
        if t <= 0.0 || t >= self.total_time {
            0.0
        } else if t < ramp {
            self.omega_max * t / ramp
        } else if t > self.total_time - ramp {
            self.omega_max * (self.total_time - t) / ramp
        } else {
            self.omega_max
        }
    }

    pub fn delta_local(&self, t: f64) -> f64 {
        self.delta_local_final * (t / self.total_time).clamp(0.0, 1.0)
    }
}

/// Instance-independent schedule settings. The local detuning scale is
/// fixed per register so that its lightest atom ends at
/// `local_detuning_at_min_weight`, unless that would push the heaviest atom
/// past `max_local_detuning`. The cap keeps the sweep of heavy atoms slow
/// enough to stay adiabatic when weights span orders of magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub total_time: f64,
    pub omega_max: f64,
    pub delta_global: f64,
    pub local_detuning_at_min_weight: f64,
    pub max_local_detuning: f64,
    pub ramp_fraction: f64,
    pub time_steps: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            total_time: 4.0,
            omega_max: 2.0 * PI * 1.2,
            delta_global: -2.0 * PI,
            local_detuning_at_min_weight: 2.0 * PI * 2.0,
            max_local_detuning: 2.0 * PI * 6.0,
            ramp_fraction: 0.15,
            time_steps: DEFAULT_TIME_STEPS,
        }
    }
}

impl ScheduleConfig {
    pub fn schedule_for(&self, weights: impl IntoIterator<Item = f64>) -> Result<DriveSchedule> {
        let (min_weight, max_weight) = weights
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
                (lo.min(w), hi.max(w))
            });
        let (min_weight, max_weight) = if min_weight.is_finite() {
            (min_weight, max_weight)
        } else {
            (1.0, 1.0)
        };
        if min_weight <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "register weights must be positive, smallest is {min_weight}"
            )));
        }
        let sched = DriveSchedule {
            total_time: self.total_time,
            omega_max: self.omega_max,
            delta_global: self.delta_global,
            delta_local_final: (self.local_detuning_at_min_weight / min_weight)
                .min(self.max_local_detuning / max_weight),
            ramp_fraction: self.ramp_fraction,
        };
        sched.validate()?;
        Ok(sched)
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.time_steps.max(1) as f64
    }
}
