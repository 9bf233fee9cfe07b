use std::collections::{BTreeMap, BTreeSet, VecDeque};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::analyze::{diagnose_goal, noise_watched, GoalDiagnosis, Observation};
use super::plan::{plan, plan_parameters, Candidate};
use super::{
    execute, monitor_step, window_is_noisy, ComponentPool, EngineConfig, EngineError,
    ManagedSystem, ParamDomain, Reading, Reconfiguration, ViolationType,
};
use crate::spec::{EntityKind, Env, SpecDocument, Sort, Verdict};

/// What the engine decided for one goal in one cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Decision {
    NoChange,
    Parametric { values: BTreeMap<String, f64> },
    Structural { slot: String, replacement: String },
    PlanFailed { reason: String },
    /// The plan succeeded but the system refused the change.
    Rejected { reason: String },
}

impl From<Reconfiguration> for Decision {
    fn from(r: Reconfiguration) -> Self {
        match r {
            Reconfiguration::NoChange => Decision::NoChange,
            Reconfiguration::Parametric { values } => Decision::Parametric { values },
            Reconfiguration::Structural { slot, replacement } => {
                Decision::Structural { slot, replacement }
            }
        }
    }
}

/// One line of `cycles.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub cycle_index: u64,
    pub sim_time: f64,
    pub readings: Vec<Reading>,
    pub verdicts: BTreeMap<String, Verdict>,
    /// Softgoal utilities computed while diagnosing.
    pub utilities: BTreeMap<String, f64>,
    pub violation: BTreeMap<String, ViolationType>,
    pub reconfiguration: BTreeMap<String, Decision>,
    pub post_verdicts: BTreeMap<String, ViolationType>,
    pub plan_iterations: u32,
    pub errors: Vec<String>,
}

impl CycleReport {
    pub fn plan_failed(&self) -> bool {
        self.reconfiguration
            .values()
            .any(|d| matches!(d, Decision::PlanFailed { .. }))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports contain only finite data")
    }
}

/// The adaptation loop. One call to [`MapeEngine::cycle`] runs monitor,
/// analyze, plan and execute once for every adaptive goal.
#[derive(Debug, Clone)]
pub struct MapeEngine {
    doc: SpecDocument,
    env: Env,
    cfg: EngineConfig,
    pool: ComponentPool,
    /// Recent present values per sensor instance.
    history: BTreeMap<String, VecDeque<f64>>,
    next_cycle: u64,
}

impl MapeEngine {
    /// Checks the configuration and that the system offers every probe and
    /// effector the specification relies on.
    pub fn new(
        doc: SpecDocument,
        cfg: EngineConfig,
        target: &dyn ManagedSystem,
    ) -> Result<Self, EngineError> {
        cfg.validate()?;
        let contract = target.contract();
        let pool = target.component_pool();
        for m in doc.entities_of(EntityKind::Monitor) {
            for a in m.attributes_of(Sort::Numeric) {
                if !contract.probes.iter().any(|(_, var)| a.covers(var)) {
                    return Err(EngineError::ContractViolation(format!(
                        "no probe provides `{}` for monitor `{}`",
                        a.name, m.name
                    )));
                }
            }
        }
        for g in doc.entities_of(EntityKind::AdaptiveGoal) {
            for p in plan_parameters(&doc, &g.name) {
                if !contract.parameters.contains(&p) {
                    return Err(EngineError::ContractViolation(format!(
                        "no effector for parameter `{p}` planned for `{}`",
                        g.name
                    )));
                }
            }
        }
        let env = Env::from_document(&doc);
        Ok(MapeEngine {
            doc,
            env,
            cfg,
            pool,
            history: BTreeMap::new(),
            next_cycle: 0,
        })
    }

    pub fn pool(&self) -> &ComponentPool {
        &self.pool
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn document(&self) -> &SpecDocument {
        &self.doc
    }

    fn record(&mut self, readings: &[Reading]) {
        for r in readings {
            if let Some(v) = r.value {
                let w = self.history.entry(r.sensor_id.clone()).or_default();
                w.push_back(v);
                while w.len() > self.cfg.noise_window {
                    w.pop_front();
                }
            }
        }
    }

    fn noisy_slots(&self) -> BTreeSet<String> {
        self.pool
            .active
            .iter()
            .filter(|(slot, _)| noise_watched(&self.doc, slot))
            .filter(|(_, inst)| {
                self.history.get(*inst).is_some_and(|w| {
                    let w: Vec<f64> = w.iter().copied().collect();
                    window_is_noisy(&w, self.cfg.noise_std_threshold)
                })
            })
            .map(|(slot, _)| slot.clone())
            .collect()
    }

    fn diagnose_with(
        &self,
        target: &mut dyn ManagedSystem,
        goal: &str,
        readings: &[Reading],
        noisy: &BTreeSet<String>,
        params: &BTreeMap<String, f64>,
    ) -> Result<GoalDiagnosis, EngineError> {
        let obs = Observation {
            readings,
            noisy,
            params,
        };
        // Predictions only use readings from sensors not flagged as noisy.
        let trusted: Vec<Reading> = readings
            .iter()
            .filter(|r| !noisy.contains(&r.variable))
            .cloned()
            .collect();
        let mut verify = |p: &BTreeMap<String, f64>| target.verification_trace(p, &trusted);
        diagnose_goal(&self.doc, &self.env, goal, obs, &mut verify, &self.cfg)
    }

    /// Runs one full loop iteration. Stage errors are recorded in the
    /// report; the loop itself never aborts.
    pub fn cycle(&mut self, target: &mut dyn ManagedSystem) -> CycleReport {
        let mut report = CycleReport {
            cycle_index: self.next_cycle,
            sim_time: target.now(),
            readings: Vec::new(),
            verdicts: BTreeMap::new(),
            utilities: BTreeMap::new(),
            violation: BTreeMap::new(),
            reconfiguration: BTreeMap::new(),
            post_verdicts: BTreeMap::new(),
            plan_iterations: 0,
            errors: Vec::new(),
        };
        self.next_cycle += 1;

        let mut readings = match monitor_step(&self.doc, target, &self.pool) {
            Ok(r) => r,
            Err(e) => {
                report.errors.push(format!("monitor: {e}"));
                return report;
            }
        };
        self.record(&readings);
        report.readings = readings.clone();

        let goals: Vec<String> = self
            .doc
            .entities_of(EntityKind::AdaptiveGoal)
            .map(|g| g.name.clone())
            .collect();

        for goal in &goals {
            let noisy = self.noisy_slots();
            let params = target.parameters();
            let diag = match self.diagnose_with(target, goal, &readings, &noisy, &params) {
                Ok(d) => d,
                Err(e) => {
                    report.errors.push(format!("analyze `{goal}`: {e}"));
                    continue;
                }
            };
            let verdict = diag.verdict.unwrap_or(if diag.violation == ViolationType::None {
                Verdict::Sat
            } else {
                Verdict::Viol
            });
            report.verdicts.insert(goal.clone(), verdict);
            if let (Some(u), Some(sg)) = (
                diag.utility,
                self.doc.entity(goal).and_then(|g| g.softgoal.clone()),
            ) {
                report.utilities.insert(sg, u);
            }
            report.violation.insert(goal.clone(), diag.violation);
            if diag.violation != ViolationType::None {
                info!(
                    "t={} `{goal}`: {} {}",
                    report.sim_time,
                    diag.violation,
                    diag.slot.as_deref().unwrap_or("")
                );
            }

            let domains: BTreeMap<String, ParamDomain> = plan_parameters(&self.doc, goal)
                .into_iter()
                .filter_map(|p| target.parameter_domain(&p).map(|d| (p, d)))
                .collect();
            let mut calls = 0u32;
            let outcome = {
                let this = &*self;
                let mut verifier = |c: Candidate<'_>| -> Result<bool, EngineError> {
                    calls += 1;
                    match c {
                        Candidate::Parameters(p) => {
                            let d = this.diagnose_with(target, goal, &readings, &noisy, p)?;
                            Ok(d.violation == ViolationType::None)
                        }
                        Candidate::Replacement { slot, instance } => {
                            Ok(target.gauge(instance, slot)?.is_some())
                        }
                    }
                };
                plan(
                    &this.doc,
                    goal,
                    &diag,
                    &params,
                    &|p| domains.get(p).copied(),
                    &this.pool,
                    &mut verifier,
                    &this.cfg,
                )
            };
            report.plan_iterations += calls;

            let reconfig = match outcome {
                Ok(o) => o.reconfiguration,
                Err(e) => {
                    warn!("t={} {e}", report.sim_time);
                    report.reconfiguration.insert(
                        goal.clone(),
                        Decision::PlanFailed {
                            reason: e.to_string(),
                        },
                    );
                    continue;
                }
            };
            match execute(&reconfig, target, &self.pool) {
                Ok(pool) => self.pool = pool,
                Err(e) => {
                    warn!("t={} {e}", report.sim_time);
                    report.reconfiguration.insert(
                        goal.clone(),
                        Decision::Rejected {
                            reason: e.to_string(),
                        },
                    );
                    continue;
                }
            }
            if let Reconfiguration::Structural { slot, replacement } = &reconfig {
                // Later goals in this cycle see the replacement's value.
                match target.gauge(replacement, slot) {
                    Ok(value) => {
                        for r in readings.iter_mut().filter(|r| &r.variable == slot) {
                            r.sensor_id = replacement.clone();
                            r.value = value;
                        }
                    }
                    Err(e) => report.errors.push(format!("re-gauge `{slot}`: {e}")),
                }
                self.record(
                    &readings
                        .iter()
                        .filter(|r| &r.variable == slot)
                        .cloned()
                        .collect::<Vec<_>>(),
                );
            }
            if reconfig != Reconfiguration::NoChange {
                info!("t={} `{goal}`: {reconfig:?}", report.sim_time);
            }
            report.reconfiguration.insert(goal.clone(), reconfig.into());
        }

        let params = target.parameters();
        let noisy = self.noisy_slots();
        for goal in &goals {
            match self.diagnose_with(target, goal, &readings, &noisy, &params) {
                Ok(d) => {
                    report.post_verdicts.insert(goal.clone(), d.violation);
                }
                Err(e) => report.errors.push(format!("post-analyze `{goal}`: {e}")),
            }
        }
        report
    }
}
