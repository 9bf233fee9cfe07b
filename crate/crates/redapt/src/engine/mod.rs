//! The monitor, analyze, plan and execute stages, driven by a parsed
//! specification and run against any [`ManagedSystem`].

mod analyze;
mod cycle;
mod execute;
mod monitor;
mod plan;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec::{EvalError, Trace};

pub use analyze::{diagnose, diagnose_goal, GoalDiagnosis, Observation, Predictor};
pub use cycle::{CycleReport, Decision, MapeEngine};
pub use execute::execute;
pub use monitor::{detect_noise, monitor_step, sample_std, window_is_noisy};
pub use plan::{plan, Candidate, PlanOutcome};

/// One gauged value. `value` is `None` when the sensor returned nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reading {
    pub sensor_id: String,
    pub variable: String,
    pub value: Option<f64>,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationType {
    None,
    #[serde(rename = "ConU_FR")]
    ConUFr,
    #[serde(rename = "ConU_NFR")]
    ConUNfr,
    #[serde(rename = "ComU_FR")]
    ComUFr,
    #[serde(rename = "ComU_NFR")]
    ComUNfr,
}

impl fmt::Display for ViolationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationType::None => "None",
            ViolationType::ConUFr => "ConU_FR",
            ViolationType::ConUNfr => "ConU_NFR",
            ViolationType::ComUFr => "ComU_FR",
            ViolationType::ComUNfr => "ComU_NFR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Reconfiguration {
    NoChange,
    /// New values for the plan's parameters.
    Parametric { values: BTreeMap<String, f64> },
    Structural { slot: String, replacement: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Softgoal name to the lowest acceptable utility.
    pub desired_utilities: BTreeMap<String, f64>,
    /// Parameter name to the signed step the planner applies per iteration.
    pub param_step: BTreeMap<String, f64>,
    pub max_plan_iterations: u32,
    pub noise_window: usize,
    pub noise_std_threshold: f64,
    /// Simulation seconds between cycles.
    pub cycle_period: f64,
}

pub const DEFAULT_DESIRED_UTILITY: f64 = 0.7;

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            desired_utilities: BTreeMap::from([(
                "Maintain Safety Efficiency".to_string(),
                DEFAULT_DESIRED_UTILITY,
            )]),
            param_step: BTreeMap::from([
                ("t_dispatch".to_string(), 1.0),
                ("t_close".to_string(), -0.5),
                ("t_open".to_string(), 0.5),
            ]),
            max_plan_iterations: 32,
            noise_window: 5,
            noise_std_threshold: 3.0,
            cycle_period: 60.0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        for (name, u) in &self.desired_utilities {
            if !(0.0..=1.0).contains(u) {
                return bad(format!("desired utility for `{name}` must lie in [0, 1], got {u}"));
            }
        }
        for (name, s) in &self.param_step {
            if !s.is_finite() || *s == 0.0 {
                return bad(format!("step for `{name}` must be finite and non-zero"));
            }
        }
        if self.max_plan_iterations < 1 {
            return bad("max_plan_iterations must be at least 1".into());
        }
        if self.noise_window < 2 {
            return bad("noise_window must be at least 2".into());
        }
        if !(self.noise_std_threshold > 0.0) {
            return bad("noise_std_threshold must be positive".into());
        }
        if !(self.cycle_period > 0.0) {
            return bad("cycle_period must be positive".into());
        }
        Ok(())
    }

    pub fn desired_utility(&self, softgoal: &str) -> f64 {
        self.desired_utilities
            .get(softgoal)
            .copied()
            .unwrap_or(DEFAULT_DESIRED_UTILITY)
    }
}

/// Which instance fills each component slot, and the spares per slot.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComponentPool {
    pub active: BTreeMap<String, String>,
    pub standby: BTreeMap<String, Vec<String>>,
}

impl ComponentPool {
    /// Every instance, active or spare, sorted.
    pub fn instances(&self) -> Vec<String> {
        let mut all: Vec<String> = self
            .active
            .values()
            .chain(self.standby.values().flatten())
            .cloned()
            .collect();
        all.sort();
        all
    }

    /// Puts `replacement` into `slot`; the displaced instance joins the
    /// back of that slot's standby list.
    pub fn swapped(&self, slot: &str, replacement: &str) -> Result<ComponentPool, EngineError> {
        let mut next = self.clone();
        let spares = next
            .standby
            .get_mut(slot)
            .ok_or_else(|| EngineError::EffectorRejected(format!("no standby list for `{slot}`")))?;
        let at = spares.iter().position(|s| s == replacement).ok_or_else(|| {
            EngineError::EffectorRejected(format!("`{replacement}` is not a spare for `{slot}`"))
        })?;
        spares.remove(at);
        let old = next
            .active
            .insert(slot.to_string(), replacement.to_string())
            .ok_or_else(|| EngineError::EffectorRejected(format!("unknown slot `{slot}`")))?;
        next.standby.get_mut(slot).expect("checked above").push(old);
        Ok(next)
    }
}

/// The admissible range of a tunable parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDomain {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl ParamDomain {
    pub fn closed(lo: f64, hi: f64) -> Self {
        ParamDomain {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below
    }
}

/// What a managed system offers the engine.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProbeEffectorContract {
    /// `(instance, variable)` pairs the system can gauge.
    pub probes: BTreeSet<(String, String)>,
    pub parameters: BTreeSet<String>,
    pub slots: BTreeSet<String>,
}

/// The probe/effector surface of a system under adaptation.
pub trait ManagedSystem {
    fn contract(&self) -> ProbeEffectorContract;

    /// Current simulation time in seconds.
    fn now(&self) -> f64;

    fn gauge(&mut self, instance: &str, variable: &str) -> Result<Option<f64>, EngineError>;

    fn parameters(&self) -> BTreeMap<String, f64>;

    fn parameter_domain(&self, name: &str) -> Option<ParamDomain>;

    fn set_parameter(&mut self, name: &str, value: f64) -> Result<(), String>;

    fn rebind(&mut self, slot: &str, instance: &str) -> Result<(), String>;

    fn component_pool(&self) -> ComponentPool;

    /// A trace predicting the system's behavior under `params`, given what
    /// was just monitored. Requirement invariants are checked against it.
    fn verification_trace(
        &mut self,
        params: &BTreeMap<String, f64>,
        readings: &[Reading],
    ) -> Result<Trace, EngineError>;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("`{0}` is not an adaptive goal of the specification")]
    UnknownAdaptiveGoal(String),
    #[error("planning for `{goal}` failed: {reason}")]
    PlanFailed { goal: String, reason: String },
    #[error("effector rejected the change: {0}")]
    EffectorRejected(String),
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
    #[error("managed system error: {0}")]
    Target(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Orders slot names so that `f_2` sorts before `f_10`.
pub(crate) fn slot_key(slot: &str) -> (String, u64, String) {
    match slot.rsplit_once('_') {
        Some((family, idx)) if !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) => {
            (family.to_string(), idx.parse().unwrap_or(u64::MAX), String::new())
        }
        _ => (slot.to_string(), 0, slot.to_string()),
    }
}
