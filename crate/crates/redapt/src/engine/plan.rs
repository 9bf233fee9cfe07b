use std::collections::BTreeMap;

use super::{
    ComponentPool, EngineConfig, EngineError, GoalDiagnosis, ParamDomain, Reconfiguration,
    ViolationType,
};
use crate::spec::{EntityKind, SpecDocument, Sort};

/// A configuration the planner asks the verifier about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Candidate<'a> {
    Parameters(&'a BTreeMap<String, f64>),
    Replacement { slot: &'a str, instance: &'a str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub reconfiguration: Reconfiguration,
    /// Verifier calls spent.
    pub iterations: u32,
}

/// Searches for a configuration under which the verifier reports the goal
/// healthy again. Context violations step the plan's parameters; component
/// violations try the slot's spares in order.
#[allow(clippy::too_many_arguments)]
pub fn plan(
    doc: &SpecDocument,
    goal: &str,
    diagnosis: &GoalDiagnosis,
    current: &BTreeMap<String, f64>,
    domain: &dyn Fn(&str) -> Option<ParamDomain>,
    pool: &ComponentPool,
    verifier: &mut dyn FnMut(Candidate<'_>) -> Result<bool, EngineError>,
    cfg: &EngineConfig,
) -> Result<PlanOutcome, EngineError> {
    let failed = |reason: String| EngineError::PlanFailed {
        goal: goal.to_string(),
        reason,
    };
    match diagnosis.violation {
        ViolationType::None => Ok(PlanOutcome {
            reconfiguration: Reconfiguration::NoChange,
            iterations: 0,
        }),
        ViolationType::ConUFr | ViolationType::ConUNfr => {
            let params = plan_parameters(doc, goal);
            if params.is_empty() {
                return Err(failed("no plan entity with numeric outputs".into()));
            }
            let mut values = BTreeMap::new();
            let mut steps = Vec::new();
            for p in &params {
                let v = *current
                    .get(p)
                    .ok_or_else(|| failed(format!("parameter `{p}` has no current value")))?;
                let step = *cfg
                    .param_step
                    .get(p)
                    .ok_or_else(|| failed(format!("no step size configured for `{p}`")))?;
                let d = domain(p).ok_or_else(|| failed(format!("`{p}` has no declared domain")))?;
                values.insert(p.clone(), v);
                steps.push((p.clone(), step, d));
            }
            let mut candidate = current.clone();
            let mut iterations = 0;
            while iterations < cfg.max_plan_iterations {
                let mut moved = false;
                for (p, step, d) in &steps {
                    let next = candidate[p] + step;
                    // A parameter that would leave its domain stays put.
                    if d.contains(next) {
                        candidate.insert(p.clone(), next);
                        values.insert(p.clone(), next);
                        moved = true;
                    }
                }
                if !moved {
                    return Err(failed(format!(
                        "every parameter reached its domain bound after {iterations} iterations"
                    )));
                }
                iterations += 1;
                if verifier(Candidate::Parameters(&candidate))? {
                    return Ok(PlanOutcome {
                        reconfiguration: Reconfiguration::Parametric { values },
                        iterations,
                    });
                }
            }
            Err(failed(format!(
                "no acceptable configuration within {} iterations",
                cfg.max_plan_iterations
            )))
        }
        ViolationType::ComUFr | ViolationType::ComUNfr => {
            let slot = diagnosis
                .slot
                .as_deref()
                .ok_or_else(|| failed("diagnosis names no slot".into()))?;
            let spares = pool.standby.get(slot).cloned().unwrap_or_default();
            if spares.is_empty() {
                return Err(failed(format!("standby pool for `{slot}` is empty")));
            }
            let budget = cfg.max_plan_iterations as usize;
            for (k, instance) in spares.iter().enumerate().take(budget) {
                let iterations = k as u32 + 1;
                if verifier(Candidate::Replacement { slot, instance })? {
                    return Ok(PlanOutcome {
                        reconfiguration: Reconfiguration::Structural {
                            slot: slot.to_string(),
                            replacement: instance.clone(),
                        },
                        iterations,
                    });
                }
            }
            Err(failed(format!("no working spare for `{slot}`")))
        }
    }
}

/// Parameters a goal's plan entities decide: numeric outputs with the
/// `_new` suffix removed.
pub(crate) fn plan_parameters(doc: &SpecDocument, goal: &str) -> Vec<String> {
    let mut out = Vec::new();
    for p in doc.mape_of(goal, EntityKind::Plan) {
        for o in &p.output {
            let numeric = p.attributes_of(Sort::Numeric).any(|a| a.covers(o));
            if !numeric {
                continue;
            }
            let name = o.strip_suffix("_new").unwrap_or(o).to_string();
            if !out.contains(&name) {
                out.push(name);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_document;

    const DOC: &str = r#"
adaptive_goal "g" { numeric: x; }
plan "p" { numeric: x, x_new; output: x_new; from: "g"; }
adaptive_goal "h" { numeric: f[i]; }
plan "q" { class: S; output: S; from: "h"; }
"#;

    fn diag(v: ViolationType, slot: Option<&str>) -> GoalDiagnosis {
        GoalDiagnosis {
            violation: v,
            verdict: None,
            utility: None,
            slot: slot.map(str::to_string),
        }
    }

    fn cfg() -> EngineConfig {
        EngineConfig {
            param_step: BTreeMap::from([("x".to_string(), 1.0)]),
            max_plan_iterations: 4,
            ..EngineConfig::default()
        }
    }

    #[test]
    fn steps_until_verified() {
        let doc = parse_document(DOC).unwrap();
        let current = BTreeMap::from([("x".to_string(), 5.0)]);
        let dom = |_: &str| Some(ParamDomain::closed(0.0, 100.0));
        let mut calls = 0;
        let mut verifier = |c: Candidate<'_>| {
            calls += 1;
            match c {
                Candidate::Parameters(p) => Ok(p["x"] >= 6.0),
                _ => Ok(false),
            }
        };
        let out = plan(
            &doc,
            "g",
            &diag(ViolationType::ConUFr, None),
            &current,
            &dom,
            &ComponentPool::default(),
            &mut verifier,
            &cfg(),
        )
        .unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(
            out.reconfiguration,
            Reconfiguration::Parametric {
                values: BTreeMap::from([("x".to_string(), 6.0)])
            }
        );
        assert_eq!(calls, 1);
    }

    #[test]
    fn budget_and_bounds() {
        let doc = parse_document(DOC).unwrap();
        let current = BTreeMap::from([("x".to_string(), 5.0)]);
        let mut calls = 0u32;
        let mut never = |_: Candidate<'_>| {
            calls += 1;
            Ok(false)
        };
        let dom = |_: &str| Some(ParamDomain::closed(0.0, 100.0));
        let err = plan(
            &doc,
            "g",
            &diag(ViolationType::ConUNfr, None),
            &current,
            &dom,
            &ComponentPool::default(),
            &mut never,
            &cfg(),
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::PlanFailed { .. }));
        assert_eq!(calls, 4);

        let tight = |_: &str| Some(ParamDomain::closed(0.0, 6.0));
        let mut never = |_: Candidate<'_>| Ok(false);
        let err = plan(
            &doc,
            "g",
            &diag(ViolationType::ConUFr, None),
            &current,
            &tight,
            &ComponentPool::default(),
            &mut never,
            &cfg(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("domain bound"), "{err}");
    }

    #[test]
    fn first_standby_replaces_failed_slot() {
        let doc = parse_document(DOC).unwrap();
        let pool = ComponentPool {
            active: BTreeMap::from([("f_3".into(), "s_3".into())]),
            standby: BTreeMap::from([("f_3".into(), vec!["s_11".into(), "s_12".into()])]),
        };
        let mut yes = |_: Candidate<'_>| Ok(true);
        let out = plan(
            &doc,
            "h",
            &diag(ViolationType::ComUFr, Some("f_3")),
            &BTreeMap::new(),
            &|_| None,
            &pool,
            &mut yes,
            &cfg(),
        )
        .unwrap();
        assert_eq!(
            out.reconfiguration,
            Reconfiguration::Structural {
                slot: "f_3".into(),
                replacement: "s_11".into()
            }
        );

        let empty = ComponentPool {
            standby: BTreeMap::from([("f_3".into(), vec![])]),
            ..pool
        };
        let err = plan(
            &doc,
            "h",
            &diag(ViolationType::ComUFr, Some("f_3")),
            &BTreeMap::new(),
            &|_| None,
            &empty,
            &mut yes,
            &cfg(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("empty"));
    }

    #[test]
    fn healthy_goal_needs_no_change() {
        let doc = parse_document(DOC).unwrap();
        let mut never = |_: Candidate<'_>| -> Result<bool, EngineError> { unreachable!() };
        let out = plan(
            &doc,
            "g",
            &diag(ViolationType::None, None),
            &BTreeMap::new(),
            &|_| None,
            &ComponentPool::default(),
            &mut never,
            &cfg(),
        )
        .unwrap();
        assert_eq!(out.reconfiguration, Reconfiguration::NoChange);
        assert_eq!(out.iterations, 0);
    }
}
