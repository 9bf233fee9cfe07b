use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{EngineConfig, EngineError, Reading, ViolationType};
use crate::agm::{UncertaintyCategory, ViolationKind};
use crate::spec::{evaluate, EntityKind, EntitySpec, Env, SpecDocument, Sort, Trace, Value, Verdict};

/// Predicts a trace for a parameter assignment.
pub type Predictor<'a> = dyn FnMut(&BTreeMap<String, f64>) -> Result<Trace, EngineError> + 'a;

/// What the analyzer sees of the system during one cycle.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub readings: &'a [Reading],
    /// Slots whose active sensor currently looks noisy.
    pub noisy: &'a BTreeSet<String>,
    pub params: &'a BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalDiagnosis {
    pub violation: ViolationType,
    /// Verdict of the goal's invariant, when it was evaluated.
    pub verdict: Option<Verdict>,
    /// Utility of the maintained softgoal, when it was computed.
    pub utility: Option<f64>,
    /// The offending component slot for components violations.
    pub slot: Option<String>,
}

impl GoalDiagnosis {
    fn healthy() -> Self {
        GoalDiagnosis {
            violation: ViolationType::None,
            verdict: None,
            utility: None,
            slot: None,
        }
    }
}

fn category_of(e: &EntitySpec) -> UncertaintyCategory {
    if e.kind == EntityKind::ContextUncertainty {
        UncertaintyCategory::Context
    } else {
        UncertaintyCategory::Components
    }
}

/// Classifies the state of one adaptive goal. Each uncertainty affecting
/// the goal is checked in document order; the first violation wins.
/// `verify` predicts a trace for a parameter assignment.
pub fn diagnose_goal(
    doc: &SpecDocument,
    env: &Env,
    goal: &str,
    obs: Observation<'_>,
    verify: &mut Predictor<'_>,
    cfg: &EngineConfig,
) -> Result<GoalDiagnosis, EngineError> {
    let g = doc
        .entity(goal)
        .filter(|e| e.kind == EntityKind::AdaptiveGoal)
        .ok_or_else(|| EngineError::UnknownAdaptiveGoal(goal.to_string()))?;

    let mut out = GoalDiagnosis::healthy();
    let mut trace: Option<Trace> = None;
    let mut predicted = |trace: &mut Option<Trace>| -> Result<Trace, EngineError> {
        if trace.is_none() {
            *trace = Some(verify(obs.params)?);
        }
        Ok(trace.clone().expect("filled above"))
    };

    for u in doc.uncertainties_affecting(goal) {
        let kind = u.affected_goal.as_ref().expect("filtered on affected goal").kind;
        match (category_of(u), kind) {
            (UncertaintyCategory::Context, ViolationKind::Fr) => {
                let Some(inv) = &g.invariant else { continue };
                let t = predicted(&mut trace)?;
                let verdict = evaluate(inv, &t, 0, env)?;
                out.verdict = Some(verdict);
                // An inconclusive verdict is not a detected violation.
                if verdict == Verdict::Viol {
                    out.violation = ViolationType::ConUFr;
                    return Ok(out);
                }
            }
            (UncertaintyCategory::Context, ViolationKind::Nfr) => {
                let Some(sg) = g.softgoal.as_deref().and_then(|s| doc.entity(s)) else {
                    continue;
                };
                let Some(var) = &sg.utility else { continue };
                let t = predicted(&mut trace)?;
                let utility = match t.states()[0].vars.get(var) {
                    Some(Value::Number(u)) => Some(*u),
                    _ => None,
                };
                out.utility = utility;
                // A utility that cannot be computed cannot be certified.
                if utility.is_none_or(|u| u < cfg.desired_utility(&sg.name)) {
                    out.violation = ViolationType::ConUNfr;
                    return Ok(out);
                }
            }
            (UncertaintyCategory::Components, ViolationKind::Fr) => {
                if let Some(r) = monitored(doc, goal, obs.readings).find(|r| r.value.is_none()) {
                    out.violation = ViolationType::ComUFr;
                    out.slot = Some(r.variable.clone());
                    return Ok(out);
                }
            }
            (UncertaintyCategory::Components, ViolationKind::Nfr) => {
                if let Some(r) = monitored(doc, goal, obs.readings).find(|r| obs.noisy.contains(&r.variable)) {
                    out.violation = ViolationType::ComUNfr;
                    out.slot = Some(r.variable.clone());
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// Readings of the variables the goal's monitors declare.
fn monitored<'r>(
    doc: &'r SpecDocument,
    goal: &'r str,
    readings: &'r [Reading],
) -> impl Iterator<Item = &'r Reading> + 'r {
    readings.iter().filter(move |r| {
        doc.mape_of(goal, EntityKind::Monitor)
            .any(|m| m.attributes_of(Sort::Numeric).any(|a| a.covers(&r.variable)))
    })
}

/// Whether `variable` is monitored for some goal that a components NFR
/// uncertainty (sensor noise) affects. Only such slots get noise checks.
pub(crate) fn noise_watched(doc: &SpecDocument, variable: &str) -> bool {
    doc.entities_of(EntityKind::AdaptiveGoal).any(|g| {
        let affected = doc.uncertainties_affecting(&g.name).any(|u| {
            category_of(u) == UncertaintyCategory::Components
                && u.affected_goal.as_ref().is_some_and(|a| a.kind == ViolationKind::Nfr)
        });
        affected
            && doc
                .mape_of(&g.name, EntityKind::Monitor)
                .any(|m| m.attributes_of(Sort::Numeric).any(|a| a.covers(variable)))
    })
}

/// Diagnoses every adaptive goal, in document order.
pub fn diagnose(
    doc: &SpecDocument,
    env: &Env,
    obs: Observation<'_>,
    verify: &mut Predictor<'_>,
    cfg: &EngineConfig,
) -> Result<Vec<(String, GoalDiagnosis)>, EngineError> {
    doc.entities_of(EntityKind::AdaptiveGoal)
        .map(|g| Ok((g.name.clone(), diagnose_goal(doc, env, &g.name, obs, verify, cfg)?)))
        .collect()
}
