use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid scenario: {0}")]
pub struct ConfigError(pub String);

/// Illuminance from `from` (minutes) until the next step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IlluminanceStep {
    pub from: f64,
    pub lux: f64,
}

/// A fault injected into one sensor instance. Times are in minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorFault {
    pub sensor_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail_at: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
}

/// Inputs of one crossing scenario. Rates are vehicles per minute,
/// `t_dispatch` and `duration` minutes, everything else seconds, meters
/// and lux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub lambda_north: f64,
    pub lambda_south: f64,
    pub highway_length: f64,
    pub free_speed: f64,
    pub t_dispatch: f64,
    pub t_close: f64,
    pub t_open: f64,
    pub train_pass_time: f64,
    pub warn_lead_time: f64,
    /// Vehicles per second leaving a gate queue while the gate is open.
    pub discharge_rate: f64,
    pub duration: f64,
    pub seed: u64,
    pub illuminance_profile: Vec<IlluminanceStep>,
    pub sensor_faults: Vec<SensorFault>,
    pub p_time_threshold: f64,
    pub n_limit: f64,
    pub p_min: f64,
    /// Flow sensors per entrance; slots `f_1..f_k` watch the north
    /// entrance and `f_{k+1}..f_{2k}` the south one.
    pub sensors_per_direction: usize,
    pub light_sensors: usize,
    pub standby_per_slot: usize,
    /// Seconds between recorded trace rows.
    pub sample_period: f64,
    /// Minutes simulated when predicting the effect of a configuration.
    pub verify_horizon: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "scenario".into(),
            lambda_north: 15.0,
            lambda_south: 18.0,
            highway_length: 3000.0,
            free_speed: 15.0,
            t_dispatch: 5.0,
            t_close: 4.0,
            t_open: 4.0,
            train_pass_time: 150.0,
            warn_lead_time: 10.0,
            discharge_rate: 0.67,
            duration: 120.0,
            seed: 1,
            illuminance_profile: vec![IlluminanceStep {
                from: 0.0,
                lux: 50.0,
            }],
            sensor_faults: Vec::new(),
            p_time_threshold: 400.0,
            n_limit: 350.0,
            p_min: 0.5,
            sensors_per_direction: 5,
            light_sensors: 3,
            standby_per_slot: 1,
            sample_period: 10.0,
            verify_horizon: 240.0,
        }
    }
}

pub fn t_close_in_domain(t: f64) -> bool {
    t > 1.0 && t <= 4.0
}

pub fn t_open_in_domain(t: f64) -> bool {
    (4.0..7.0).contains(&t)
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Seconds the gate stays down around one train with the given
    /// timings: from closing until reopening.
    pub fn closed_duration(&self, t_close: f64, t_open: f64) -> f64 {
        (self.warn_lead_time - t_close) + self.train_pass_time + t_open
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        let finite_nonneg = [
            ("lambda_north", self.lambda_north),
            ("lambda_south", self.lambda_south),
            ("train_pass_time", self.train_pass_time),
        ];
        for (name, v) in finite_nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        let positive = [
            ("highway_length", self.highway_length),
            ("free_speed", self.free_speed),
            ("t_dispatch", self.t_dispatch),
            ("warn_lead_time", self.warn_lead_time),
            ("discharge_rate", self.discharge_rate),
            ("duration", self.duration),
            ("p_time_threshold", self.p_time_threshold),
            ("n_limit", self.n_limit),
            ("sample_period", self.sample_period),
            ("verify_horizon", self.verify_horizon),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.p_min) {
            return fail(format!("p_min must lie in [0, 1], got {}", self.p_min));
        }
        if !t_close_in_domain(self.t_close) {
            return fail(format!("t_close must lie in (1, 4], got {}", self.t_close));
        }
        if !t_open_in_domain(self.t_open) {
            return fail(format!("t_open must lie in [4, 7), got {}", self.t_open));
        }
        if self.t_close >= self.warn_lead_time {
            return fail("t_close must be shorter than warn_lead_time".into());
        }
        let closed = self.closed_duration(self.t_close, self.t_open);
        if self.t_dispatch * 60.0 <= closed {
            return fail(format!(
                "a train every {} min leaves no open window: the gate is down {closed} s per train",
                self.t_dispatch
            ));
        }
        if self.sensors_per_direction == 0 || self.light_sensors == 0 {
            return fail("at least one flow sensor per entrance and one light sensor".into());
        }
        if self.illuminance_profile.is_empty() {
            return fail("illuminance_profile needs at least one step".into());
        }
        for w in self.illuminance_profile.windows(2) {
            if !(w[1].from > w[0].from) {
                return fail("illuminance_profile steps must have increasing `from`".into());
            }
        }
        if self.illuminance_profile.iter().any(|s| !(s.lux >= 0.0)) {
            return fail("illuminance must be non-negative".into());
        }
        for f in &self.sensor_faults {
            if f.fail_at.is_none() && f.noise_from.is_none() {
                return fail(format!("fault on `{}` sets neither fail_at nor noise_from", f.sensor_id));
            }
            if f.noise_from.is_some() && !f.noise_sigma.is_some_and(|s| s >= 0.0) {
                return fail(format!("noise on `{}` needs a non-negative noise_sigma", f.sensor_id));
            }
        }
        Ok(())
    }

    /// Illuminance at `t` seconds.
    pub fn illuminance_at(&self, t: f64) -> f64 {
        let minutes = t / 60.0;
        self.illuminance_profile
            .iter()
            .rev()
            .find(|s| s.from <= minutes)
            .or(self.illuminance_profile.first())
            .map_or(0.0, |s| s.lux)
    }

    /// Seconds from an entrance to the gate at free speed.
    pub fn half_travel_time(&self) -> f64 {
        self.highway_length / 2.0 / self.free_speed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn gate_cycle_must_exceed_closure() {
        let cfg = ScenarioConfig {
            t_dispatch: 2.0,
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().unwrap_err().0.contains("open window"));
    }

    #[test]
    fn timing_domains() {
        for (c, o, ok) in [(1.0, 4.0, false), (1.5, 6.5, true), (4.0, 7.0, false), (4.5, 4.0, false)] {
            let cfg = ScenarioConfig {
                t_close: c,
                t_open: o,
                ..ScenarioConfig::default()
            };
            assert_eq!(cfg.validate().is_ok(), ok, "({c}, {o})");
        }
    }

    #[test]
    fn illuminance_profile_lookup() {
        let cfg = ScenarioConfig {
            illuminance_profile: vec![
                IlluminanceStep { from: 0.0, lux: 50.0 },
                IlluminanceStep { from: 10.0, lux: 10.0 },
            ],
            ..ScenarioConfig::default()
        };
        assert_eq!(cfg.illuminance_at(0.0), 50.0);
        assert_eq!(cfg.illuminance_at(599.0), 50.0);
        assert_eq!(cfg.illuminance_at(600.0), 10.0);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ScenarioConfig::from_json(r#"{"lambda_nort": 3}"#).is_err());
        let cfg = ScenarioConfig::from_json(r#"{"lambda_north": 3}"#).unwrap();
        assert_eq!(cfg.lambda_north, 3.0);
    }
}
