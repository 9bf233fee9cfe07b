use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use super::config::{ConfigError, ScenarioConfig};
use super::export::{
    round9, write_histogram_csv, write_trace_csv, write_utility_csv, write_vehicles_json,
    ExportError,
};
use super::metrics::{compute_metrics, Metrics};
use super::sim::{SimTrace, Simulator};
use super::target::HrcsSystem;
use crate::engine::{CycleReport, Decision, EngineConfig, EngineError, MapeEngine};
use crate::spec::SpecDocument;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Export(#[from] ExportError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub cycles: u64,
    pub parametric_adaptations: u64,
    pub structural_adaptations: u64,
    pub plan_failures: u64,
    pub final_parameters: BTreeMap<String, f64>,
    pub active_sensors: BTreeMap<String, String>,
}

impl RunSummary {
    pub fn adaptations(&self) -> u64 {
        self.parametric_adaptations + self.structural_adaptations
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: SimTrace,
    pub reports: Vec<CycleReport>,
    pub summary: RunSummary,
}

/// Simulates `scenario` with the engine running one cycle every
/// `cycle_period` seconds.
pub fn run_adaptive(
    doc: &SpecDocument,
    scenario: &ScenarioConfig,
    engine_cfg: &EngineConfig,
) -> Result<RunOutput, RunError> {
    let mut sys = HrcsSystem::new(Simulator::new(scenario)?);
    let mut engine = MapeEngine::new(doc.clone(), engine_cfg.clone(), &sys)?;
    let end = scenario.duration * 60.0;
    let mut reports = Vec::new();
    let mut k = 1u32;
    loop {
        let t = f64::from(k) * engine_cfg.cycle_period;
        if t > end {
            break;
        }
        sys.simulator_mut().advance_to(t);
        reports.push(engine.cycle(&mut sys));
        k += 1;
    }
    let final_parameters = {
        use crate::engine::ManagedSystem;
        sys.parameters()
    };
    let active_sensors = engine.pool().active.clone();
    let trace = sys.into_simulator().finish();

    let count = |f: &dyn Fn(&Decision) -> bool| {
        reports
            .iter()
            .flat_map(|r| r.reconfiguration.values())
            .filter(|d| f(d))
            .count() as u64
    };
    let summary = RunSummary {
        scenario: scenario.name.clone(),
        metrics: compute_metrics(&trace, scenario),
        cycles: reports.len() as u64,
        parametric_adaptations: count(&|d| matches!(d, Decision::Parametric { .. })),
        structural_adaptations: count(&|d| matches!(d, Decision::Structural { .. })),
        plan_failures: count(&|d| matches!(d, Decision::PlanFailed { .. })),
        final_parameters,
        active_sensors,
    };
    Ok(RunOutput {
        trace,
        reports,
        summary,
    })
}

/// Rounds every float in a JSON document to nine significant digits.
pub fn round_json(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round9(x)))
            .map_or(Value::Number(n), Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn to_rounded_json<T: Serialize>(v: &T) -> Result<String, ExportError> {
    Ok(serde_json::to_string(&round_json(serde_json::to_value(v)?))?)
}

/// Writes `trace.csv`, `vehicles.json`, `cycles.jsonl`, `metrics.json`,
/// `utility.csv` and `histogram.csv` into `dir`.
pub fn write_artifacts(dir: &Path, run: &RunOutput) -> Result<(), ExportError> {
    fs::create_dir_all(dir)?;
    let create = |name: &str| -> Result<BufWriter<File>, ExportError> {
        Ok(BufWriter::new(File::create(dir.join(name))?))
    };
    write_trace_csv(create("trace.csv")?, &run.trace)?;
    let mut w = create("vehicles.json")?;
    write_vehicles_json(&mut w, &run.trace.vehicles)?;
    w.flush()?;
    let mut w = create("cycles.jsonl")?;
    for r in &run.reports {
        writeln!(w, "{}", to_rounded_json(r)?)?;
    }
    w.flush()?;
    let mut w = create("metrics.json")?;
    writeln!(w, "{}", to_rounded_json(&run.summary)?)?;
    w.flush()?;
    write_utility_csv(create("utility.csv")?, &run.trace)?;
    write_histogram_csv(create("histogram.csv")?, &run.trace.vehicles)?;
    Ok(())
}
