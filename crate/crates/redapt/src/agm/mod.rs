//! Adaptive goal model.
//!
//! A goal model extended with adaptive tasks/goals, uncertainty sources
//! attached through `Affect` links, and MAPE refinements. Every
//! transformation takes the model by reference and returns a new value.

mod fixture;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fixture::{derive_hrcs_model, hrcs_initial_model, HrcsModelIds, HRCS_IDS};
pub use validate::{validate_model, StructuralBreach};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Goal,
    Softgoal,
    Task,
    AdaptiveTask,
    AdaptiveGoal,
    MapeTask,
}

impl NodeKind {
    pub fn is_task_like(self) -> bool {
        matches!(self, NodeKind::Task | NodeKind::AdaptiveTask | NodeKind::MapeTask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MapeRole {
    Monitor,
    Analyze,
    Plan,
    Execute,
}

impl MapeRole {
    pub const ALL: [MapeRole; 4] = [
        MapeRole::Monitor,
        MapeRole::Analyze,
        MapeRole::Plan,
        MapeRole::Execute,
    ];
}

/// Functional or non-functional requirement; labels both uncertainty
/// sources and the `Affect` links they induce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    #[serde(rename = "FR")]
    Fr,
    #[serde(rename = "NFR")]
    Nfr,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Fr => "FR",
            ViolationKind::Nfr => "NFR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UncertaintyCategory {
    Context,
    Components,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecompositionMode {
    #[serde(rename = "AND")]
    And,
    #[serde(rename = "OR")]
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    Help,
    Hurt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalNode {
    pub id: String,
    pub name: String,
    pub kind: NodeKind,
    /// Present on MAPE tasks. A MAPE task promoted to an adaptive goal keeps
    /// its role so the parent refinement still covers all four slots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mape_role: Option<MapeRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
}

impl GoalNode {
    pub fn new(id: impl Into<String>, name: impl Into<String>, kind: NodeKind) -> Self {
        GoalNode {
            id: id.into(),
            name: name.into(),
            kind,
            mape_role: None,
            agent: None,
        }
    }

    pub fn goal(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self::new(id, name, NodeKind::Goal)
    }

    pub fn softgoal(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self::new(id, name, NodeKind::Softgoal)
    }

    pub fn task(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self::new(id, name, NodeKind::Task)
    }

    pub fn adaptive_task(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self::new(id, name, NodeKind::AdaptiveTask)
    }

    pub fn mape_task(id: impl Into<String>, name: impl Into<String>, role: MapeRole) -> Self {
        GoalNode {
            mape_role: Some(role),
            ..Self::new(id, name, NodeKind::MapeTask)
        }
    }

    pub fn with_agent(mut self, agent: impl Into<String>) -> Self {
        self.agent = Some(agent.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub parent: String,
    pub children: Vec<String>,
    pub mode: DecompositionMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub source: String,
    pub target: String,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UncertaintySource {
    pub id: String,
    pub name: String,
    pub category: UncertaintyCategory,
    pub violation_kind: ViolationKind,
}

impl UncertaintySource {
    pub fn context(id: impl Into<String>, name: impl Into<String>, kind: ViolationKind) -> Self {
        UncertaintySource {
            id: id.into(),
            name: name.into(),
            category: UncertaintyCategory::Context,
            violation_kind: kind,
        }
    }

    pub fn components(id: impl Into<String>, name: impl Into<String>, kind: ViolationKind) -> Self {
        UncertaintySource {
            id: id.into(),
            name: name.into(),
            category: UncertaintyCategory::Components,
            violation_kind: kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffectLink {
    pub source: String,
    pub target: String,
    pub label: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Satisfaction {
    Sat,
    Viol,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("id `{0}` is already present")]
    DuplicateId(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("`{0}` is already the child of another decomposition")]
    ChildAlreadyOwned(String),
    #[error("`{0}` already has a decomposition")]
    AlreadyDecomposed(String),
    #[error("decomposition must have at least one child")]
    EmptyDecomposition,
    #[error("decomposing `{parent}` into `{child}` would create a cycle")]
    CycleDetected { parent: String, child: String },
    #[error("`{id}` of kind {kind:?} cannot be the target of this link")]
    InvalidTargetKind { id: String, kind: NodeKind },
    #[error("`{id}` of kind {kind:?} cannot be the source of this link")]
    InvalidSourceKind { id: String, kind: NodeKind },
    #[error("uncertainty `{0}` is already present with different attributes")]
    ConflictingUncertainty(String),
    #[error("`{0}` cannot be promoted: it must be an adaptive or MAPE task with attached uncertainty")]
    NotPromotable(String),
    #[error("`{0}` is not an adaptive goal")]
    NotAdaptiveGoal(String),
    #[error("`{0}` is already refined")]
    AlreadyRefined(String),
    #[error("no satisfaction status given for leaf `{0}`")]
    MissingLeafStatus(String),
    #[error("invalid model document: {0}")]
    Json(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// The adaptive goal model graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalModel {
    pub nodes: Vec<GoalNode>,
    pub decompositions: Vec<Decomposition>,
    pub contributions: Vec<Contribution>,
    pub uncertainties: Vec<UncertaintySource>,
    pub affects: Vec<AffectLink>,
    #[serde(default)]
    pub roots: Vec<String>,
}

impl GoalModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, id: &str) -> Option<&GoalNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    fn node_mut(&mut self, id: &str) -> Option<&mut GoalNode> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    fn require(&self, id: &str) -> Result<&GoalNode> {
        self.node(id).ok_or_else(|| ModelError::UnknownId(id.to_string()))
    }

    pub fn uncertainty(&self, id: &str) -> Option<&UncertaintySource> {
        self.uncertainties.iter().find(|u| u.id == id)
    }

    /// The decomposition refining `id`, if any.
    pub fn decomposition_of(&self, id: &str) -> Option<&Decomposition> {
        self.decompositions.iter().find(|d| d.parent == id)
    }

    pub fn parent_of(&self, id: &str) -> Option<&str> {
        self.decompositions
            .iter()
            .find(|d| d.children.iter().any(|c| c == id))
            .map(|d| d.parent.as_str())
    }

    pub fn children_of(&self, id: &str) -> &[String] {
        self.decomposition_of(id)
            .map(|d| d.children.as_slice())
            .unwrap_or(&[])
    }

    pub fn affects_on(&self, id: &str) -> impl Iterator<Item = &AffectLink> {
        let id = id.to_string();
        self.affects.iter().filter(move |a| a.target == id)
    }

    pub fn with_root(&self, id: &str) -> Result<GoalModel> {
        self.require(id)?;
        let mut next = self.clone();
        if !next.roots.iter().any(|r| r == id) {
            next.roots.push(id.to_string());
        }
        Ok(next)
    }

    pub fn add_node(&self, node: GoalNode) -> Result<GoalModel> {
        if self.node(&node.id).is_some() || self.uncertainty(&node.id).is_some() {
            return Err(ModelError::DuplicateId(node.id));
        }
        let mut next = self.clone();
        next.nodes.push(node);
        Ok(next)
    }

    pub fn decompose(
        &self,
        parent: &str,
        children: &[&str],
        mode: DecompositionMode,
    ) -> Result<GoalModel> {
        self.require(parent)?;
        if children.is_empty() {
            return Err(ModelError::EmptyDecomposition);
        }
        for child in children {
            self.require(child)?;
        }
        // A child that is the parent itself or one of its ancestors closes a loop.
        let mut ancestors = vec![parent.to_string()];
        let mut cursor = self.parent_of(parent);
        while let Some(p) = cursor {
            ancestors.push(p.to_string());
            cursor = self.parent_of(p);
        }
        for child in children {
            if ancestors.iter().any(|a| a == child) {
                return Err(ModelError::CycleDetected {
                    parent: parent.to_string(),
                    child: child.to_string(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        for child in children {
            if self.parent_of(child).is_some() || !seen.insert(*child) {
                return Err(ModelError::ChildAlreadyOwned(child.to_string()));
            }
        }
        if self.decomposition_of(parent).is_some() {
            return Err(ModelError::AlreadyDecomposed(parent.to_string()));
        }
        let mut next = self.clone();
        next.decompositions.push(Decomposition {
            parent: parent.to_string(),
            children: children.iter().map(|c| c.to_string()).collect(),
            mode,
        });
        Ok(next)
    }

    pub fn contribute(&self, source: &str, target: &str, polarity: Polarity) -> Result<GoalModel> {
        let src = self.require(source)?;
        let dst = self.require(target)?;
        if !src.kind.is_task_like() {
            return Err(ModelError::InvalidSourceKind {
                id: source.to_string(),
                kind: src.kind,
            });
        }
        if dst.kind != NodeKind::Softgoal {
            return Err(ModelError::InvalidTargetKind {
                id: target.to_string(),
                kind: dst.kind,
            });
        }
        let mut next = self.clone();
        next.contributions.push(Contribution {
            source: source.to_string(),
            target: target.to_string(),
            polarity,
        });
        Ok(next)
    }

    /// Links `u` to `target` with an `Affect` relation labeled by the
    /// source's violation kind. The source is registered on first use.
    pub fn attach_uncertainty(&self, u: &UncertaintySource, target: &str) -> Result<GoalModel> {
        let node = self.require(target)?;
        if !matches!(
            node.kind,
            NodeKind::AdaptiveTask | NodeKind::AdaptiveGoal | NodeKind::MapeTask
        ) {
            return Err(ModelError::InvalidTargetKind {
                id: target.to_string(),
                kind: node.kind,
            });
        }
        let mut next = self.clone();
        match self.uncertainty(&u.id) {
            Some(existing) if existing != u => {
                return Err(ModelError::ConflictingUncertainty(u.id.clone()))
            }
            Some(_) => {}
            None => {
                if self.node(&u.id).is_some() {
                    return Err(ModelError::DuplicateId(u.id.clone()));
                }
                next.uncertainties.push(u.clone());
            }
        }
        let link = AffectLink {
            source: u.id.clone(),
            target: target.to_string(),
            label: u.violation_kind,
        };
        if !next.affects.contains(&link) {
            next.affects.push(link);
        }
        Ok(next)
    }

    /// Switches an affected adaptive or MAPE task into an adaptive goal.
    /// Id, name, links and contributions are kept.
    pub fn promote_to_adaptive_goal(&self, target: &str) -> Result<GoalModel> {
        let node = self.require(target)?;
        let promotable = matches!(node.kind, NodeKind::AdaptiveTask | NodeKind::MapeTask);
        if !promotable || self.affects_on(target).next().is_none() {
            return Err(ModelError::NotPromotable(target.to_string()));
        }
        let mut next = self.clone();
        if let Some(n) = next.node_mut(target) {
            n.kind = NodeKind::AdaptiveGoal;
        }
        Ok(next)
    }

    /// AND-decomposes an adaptive goal into Monitor, Analyze, Plan and
    /// Execute tasks. `tasks` holds `(id, name)` pairs in that order.
    pub fn refine_with_mape(&self, ag: &str, tasks: [(&str, &str); 4]) -> Result<GoalModel> {
        let node = self.require(ag)?;
        if node.kind != NodeKind::AdaptiveGoal {
            return Err(ModelError::NotAdaptiveGoal(ag.to_string()));
        }
        if self.decomposition_of(ag).is_some() {
            return Err(ModelError::AlreadyRefined(ag.to_string()));
        }
        let mut next = self.clone();
        for ((id, name), role) in tasks.iter().zip(MapeRole::ALL) {
            next = next.add_node(GoalNode::mape_task(*id, *name, role))?;
        }
        let ids: Vec<&str> = tasks.iter().map(|(id, _)| *id).collect();
        next.decompose(ag, &ids, DecompositionMode::And)
    }

    /// Nodes whose status must be supplied to [`GoalModel::propagate_satisfaction`]:
    /// every undecomposed node except softgoals.
    pub fn leaves(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.kind != NodeKind::Softgoal && self.decomposition_of(&n.id).is_none())
            .map(|n| n.id.as_str())
            .collect()
    }

    /// Bottom-up AND/OR evaluation. Softgoals are not labeled unless a
    /// status is supplied for them.
    pub fn propagate_satisfaction(
        &self,
        leaf_status: &BTreeMap<String, Satisfaction>,
    ) -> Result<BTreeMap<String, Satisfaction>> {
        for leaf in self.leaves() {
            if !leaf_status.contains_key(leaf) {
                return Err(ModelError::MissingLeafStatus(leaf.to_string()));
            }
        }
        let mut labels: BTreeMap<String, Satisfaction> = BTreeMap::new();
        for (id, status) in leaf_status {
            if self.decomposition_of(id).is_none() {
                labels.insert(id.clone(), *status);
            }
        }
        // Repeatedly settle decompositions whose children are all labeled;
        // acyclicity guarantees progress.
        let mut pending: Vec<&Decomposition> = self.decompositions.iter().collect();
        while !pending.is_empty() {
            let before = pending.len();
            pending.retain(|d| {
                let statuses: Option<Vec<Satisfaction>> =
                    d.children.iter().map(|c| labels.get(c).copied()).collect();
                let Some(statuses) = statuses else {
                    return true;
                };
                let sat = match d.mode {
                    DecompositionMode::And => statuses.iter().all(|s| *s == Satisfaction::Sat),
                    DecompositionMode::Or => statuses.contains(&Satisfaction::Sat),
                };
                labels.insert(
                    d.parent.clone(),
                    if sat { Satisfaction::Sat } else { Satisfaction::Viol },
                );
                false
            });
            if pending.len() == before {
                // Only reachable on a malformed model (cycle or dangling child).
                let stuck = pending[0]
                    .children
                    .iter()
                    .find(|c| !labels.contains_key(*c))
                    .cloned()
                    .unwrap_or_default();
                return Err(ModelError::MissingLeafStatus(stuck));
            }
        }
        Ok(labels)
    }

    /// Canonical JSON: fixed key order, two-space indentation.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("goal model serializes")
    }

    pub fn from_json(text: &str) -> Result<GoalModel> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }
}
