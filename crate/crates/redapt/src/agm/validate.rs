use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{DecompositionMode, GoalModel, MapeRole, NodeKind};

/// One breach of a structural invariant, carrying the offending ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructuralBreach {
    DuplicateId(String),
    DanglingReference { owner: String, missing: String },
    EmptyDecomposition(String),
    MultipleDecompositions(String),
    SharedChild { child: String, parents: Vec<String> },
    Cycle(Vec<String>),
    LeafDecomposed(String),
    MapeRoleMismatch(String),
    MapeArity { goal: String, children: Vec<String> },
    BadContribution { source: String, target: String },
    BadAffectTarget { source: String, target: String },
}

impl fmt::Display for StructuralBreach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StructuralBreach::*;
        match self {
            DuplicateId(id) => write!(f, "duplicate id `{id}`"),
            DanglingReference { owner, missing } => {
                write!(f, "`{owner}` references unknown id `{missing}`")
            }
            EmptyDecomposition(p) => write!(f, "decomposition of `{p}` has no children"),
            MultipleDecompositions(p) => write!(f, "`{p}` has more than one decomposition"),
            SharedChild { child, parents } => {
                write!(f, "`{child}` is refined by several parents: {}", parents.join(", "))
            }
            Cycle(ids) => write!(f, "decomposition cycle through {}", ids.join(" -> ")),
            LeafDecomposed(id) => write!(f, "task `{id}` must be a leaf"),
            MapeRoleMismatch(id) => write!(f, "`{id}` has a MAPE role inconsistent with its kind"),
            MapeArity { goal, children } => write!(
                f,
                "adaptive goal `{goal}` must be AND-refined into exactly one Monitor, Analyze, Plan and Execute task, found [{}]",
                children.join(", ")
            ),
            BadContribution { source, target } => {
                write!(f, "contribution `{source}` -> `{target}` must run from a task to a softgoal")
            }
            BadAffectTarget { source, target } => {
                write!(f, "affect link `{source}` -> `{target}` must target an adaptive or MAPE element")
            }
        }
    }
}

/// Reports every breach of the model's structural invariants. An empty
/// list means the model is well formed.
pub fn validate_model(model: &GoalModel) -> Vec<StructuralBreach> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for n in &model.nodes {
        if !ids.insert(n.id.as_str()) {
            out.push(StructuralBreach::DuplicateId(n.id.clone()));
        }
    }
    let mut uids = BTreeSet::new();
    for u in &model.uncertainties {
        if ids.contains(u.id.as_str()) || !uids.insert(u.id.as_str()) {
            out.push(StructuralBreach::DuplicateId(u.id.clone()));
        }
    }

    for root in &model.roots {
        if !ids.contains(root.as_str()) {
            out.push(StructuralBreach::DanglingReference {
                owner: "roots".into(),
                missing: root.clone(),
            });
        }
    }

    for n in &model.nodes {
        let ok = match n.kind {
            NodeKind::MapeTask => n.mape_role.is_some(),
            // A promoted MAPE task keeps the slot it fills.
            NodeKind::AdaptiveGoal => true,
            _ => n.mape_role.is_none(),
        };
        if !ok {
            out.push(StructuralBreach::MapeRoleMismatch(n.id.clone()));
        }
    }

    let mut parents_of: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    let mut decomposed: BTreeMap<&str, usize> = BTreeMap::new();
    for d in &model.decompositions {
        *decomposed.entry(d.parent.as_str()).or_default() += 1;
        if !ids.contains(d.parent.as_str()) {
            out.push(StructuralBreach::DanglingReference {
                owner: format!("decomposition of {}", d.parent),
                missing: d.parent.clone(),
            });
        }
        if d.children.is_empty() {
            out.push(StructuralBreach::EmptyDecomposition(d.parent.clone()));
        }
        for c in &d.children {
            if !ids.contains(c.as_str()) {
                out.push(StructuralBreach::DanglingReference {
                    owner: d.parent.clone(),
                    missing: c.clone(),
                });
            }
            parents_of.entry(c.as_str()).or_default().push(d.parent.clone());
        }
        if let Some(p) = model.node(&d.parent) {
            if p.kind.is_task_like() {
                out.push(StructuralBreach::LeafDecomposed(p.id.clone()));
            }
        }
    }
    for (parent, count) in &decomposed {
        if *count > 1 {
            out.push(StructuralBreach::MultipleDecompositions(parent.to_string()));
        }
    }
    for (child, parents) in &parents_of {
        if parents.len() > 1 {
            out.push(StructuralBreach::SharedChild {
                child: child.to_string(),
                parents: parents.clone(),
            });
        }
    }

    if let Some(cycle) = find_cycle(model) {
        out.push(StructuralBreach::Cycle(cycle));
    }

    // MAPE arity: any adaptive goal whose refinement contains a role-bearing
    // child is a MAPE refinement and must cover the four roles exactly once.
    for n in model.nodes.iter().filter(|n| n.kind == NodeKind::AdaptiveGoal) {
        let decs: Vec<_> = model
            .decompositions
            .iter()
            .filter(|d| d.parent == n.id)
            .collect();
        let is_mape = decs.iter().any(|d| {
            d.children
                .iter()
                .any(|c| model.node(c).is_some_and(|c| c.mape_role.is_some()))
        });
        if !is_mape {
            continue;
        }
        let children: Vec<String> = decs.iter().flat_map(|d| d.children.clone()).collect();
        let roles: Vec<Option<MapeRole>> = children
            .iter()
            .map(|c| model.node(c).and_then(|c| c.mape_role))
            .collect();
        let exact = decs.len() == 1
            && decs[0].mode == DecompositionMode::And
            && roles.len() == 4
            && MapeRole::ALL
                .iter()
                .all(|r| roles.iter().filter(|x| **x == Some(*r)).count() == 1);
        if !exact {
            out.push(StructuralBreach::MapeArity {
                goal: n.id.clone(),
                children,
            });
        }
    }

    for c in &model.contributions {
        let src = model.node(&c.source);
        let dst = model.node(&c.target);
        for (id, node) in [(&c.source, src), (&c.target, dst)] {
            if node.is_none() {
                out.push(StructuralBreach::DanglingReference {
                    owner: "contribution".into(),
                    missing: id.clone(),
                });
            }
        }
        if let (Some(s), Some(t)) = (src, dst) {
            let source_ok = s.kind.is_task_like() || s.kind == NodeKind::AdaptiveGoal;
            if !source_ok || t.kind != NodeKind::Softgoal {
                out.push(StructuralBreach::BadContribution {
                    source: c.source.clone(),
                    target: c.target.clone(),
                });
            }
        }
    }

    for a in &model.affects {
        if model.uncertainty(&a.source).is_none() {
            out.push(StructuralBreach::DanglingReference {
                owner: "affect".into(),
                missing: a.source.clone(),
            });
        }
        match model.node(&a.target) {
            None => out.push(StructuralBreach::DanglingReference {
                owner: "affect".into(),
                missing: a.target.clone(),
            }),
            Some(t)
                if !matches!(
                    t.kind,
                    NodeKind::AdaptiveTask | NodeKind::AdaptiveGoal | NodeKind::MapeTask
                ) =>
            {
                out.push(StructuralBreach::BadAffectTarget {
                    source: a.source.clone(),
                    target: a.target.clone(),
                })
            }
            Some(_) => {}
        }
    }
    out
}

fn find_cycle(model: &GoalModel) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit<'a>(
        model: &'a GoalModel,
        id: &'a str,
        marks: &mut BTreeMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        match marks.get(id) {
            Some(Mark::Done) => return None,
            Some(Mark::Open) => {
                let start = stack.iter().position(|s| *s == id).unwrap_or(0);
                let mut cycle: Vec<String> = stack[start..].iter().map(|s| s.to_string()).collect();
                cycle.push(id.to_string());
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(id, Mark::Open);
        stack.push(id);
        for d in model.decompositions.iter().filter(|d| d.parent == id) {
            for c in &d.children {
                if let Some(c) = visit(model, c, marks, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        marks.insert(id, Mark::Done);
        None
    }
    let mut marks = BTreeMap::new();
    for d in &model.decompositions {
        let mut stack = Vec::new();
        if let Some(c) = visit(model, &d.parent, &mut marks, &mut stack) {
            return Some(c);
        }
    }
    None
}
