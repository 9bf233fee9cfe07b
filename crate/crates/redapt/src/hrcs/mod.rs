//! The highway-rail crossing: a simulator of the managed system, its
//! utilities, its probes and effectors, and the runner that couples it to
//! the adaptation engine.

mod config;
pub mod export;
mod metrics;
mod runner;
mod sensors;
mod sim;
mod target;
mod utility;

pub use config::{ConfigError, IlluminanceStep, ScenarioConfig, SensorFault};
pub use metrics::{compute_metrics, cumulative_p, n_peak, p_of, spec_trace, Metrics};
pub use runner::{round_json, run_adaptive, write_artifacts, RunError, RunOutput, RunSummary};
pub use sensors::{
    flow_slots, initial_pool, light_slots, slot_direction, SensorBank, SensorStatus, FLOW_CLASS,
    LIGHT_CLASS,
};
pub use sim::{
    simulate, Direction, EffectorCommand, EffectorError, GateParams, GateState, SimTrace,
    Simulator, TraceRow, VehicleRecord, DISPATCH_RANGE,
};
pub use target::HrcsSystem;
pub use utility::{eval_utilities, DomainError, Utilities, LIGHT_THRESHOLD, LIT_TIMING};

/// Bundled scenarios, by name.
pub const SCENARIOS: &[(&str, &str)] = &[
    ("experiment1", include_str!("../../assets/scenarios/experiment1.json")),
    ("experiment2", include_str!("../../assets/scenarios/experiment2.json")),
    ("nfr_dark", include_str!("../../assets/scenarios/nfr_dark.json")),
    ("sensor_failure", include_str!("../../assets/scenarios/sensor_failure.json")),
    ("sensor_noise", include_str!("../../assets/scenarios/sensor_noise.json")),
];

/// A bundled scenario.
pub fn scenario(name: &str) -> Option<ScenarioConfig> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ScenarioConfig::from_json(text).expect("bundled scenarios are valid"))
}
