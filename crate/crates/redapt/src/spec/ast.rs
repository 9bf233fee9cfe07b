use std::collections::BTreeMap;
use std::fmt;

use crate::agm::ViolationKind;

/// Source position. Spans never take part in structural equality, so a
/// document compares equal to its pretty-printed and re-parsed form.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constant {
    Number(f64),
    Bool(bool),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Variable(String),
    Constant(Constant),
    Apply { name: String, args: Vec<Term> },
    /// `s.value`: a field of a class instance.
    Field { base: Box<Term>, field: String },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Variable(name.into())
    }

    pub fn num(v: f64) -> Term {
        Term::Constant(Constant::Number(v))
    }

    pub fn text(s: impl Into<String>) -> Term {
        Term::Constant(Constant::Text(s.into()))
    }

    pub fn apply(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Apply {
            name: name.into(),
            args,
        }
    }

    pub fn field(base: Term, field: impl Into<String>) -> Term {
        Term::Field {
            base: Box::new(base),
            field: field.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Term),
    Compare {
        op: CompareOp,
        lhs: Term,
        rhs: Term,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Eventually(Box<Formula>),
    Globally(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Quantified {
        quantifier: Quantifier,
        var: String,
        domain: String,
        body: Box<Formula>,
    },
    /// Opaque reference to an engine operation (`@name`), used where a
    /// slot holds a procedure rather than logic.
    Procedure(String),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(Term::var(name))
    }

    pub fn compare(op: CompareOp, lhs: Term, rhs: Term) -> Formula {
        Formula::Compare { op, lhs, rhs }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn globally(f: Formula) -> Formula {
        Formula::Globally(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn forall(var: impl Into<String>, domain: impl Into<String>, body: Formula) -> Formula {
        Formula::Quantified {
            quantifier: Quantifier::Forall,
            var: var.into(),
            domain: domain.into(),
            body: Box::new(body),
        }
    }

    pub fn exists(var: impl Into<String>, domain: impl Into<String>, body: Formula) -> Formula {
        Formula::Quantified {
            quantifier: Quantifier::Exists,
            var: var.into(),
            domain: domain.into(),
            body: Box::new(body),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Goal,
    Softgoal,
    Task,
    AdaptiveGoal,
    Monitor,
    Analyze,
    Plan,
    Execute,
    ContextUncertainty,
    ComponentsUncertainty,
}

impl EntityKind {
    pub const ALL: [EntityKind; 10] = [
        EntityKind::Goal,
        EntityKind::Softgoal,
        EntityKind::Task,
        EntityKind::AdaptiveGoal,
        EntityKind::Monitor,
        EntityKind::Analyze,
        EntityKind::Plan,
        EntityKind::Execute,
        EntityKind::ContextUncertainty,
        EntityKind::ComponentsUncertainty,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            EntityKind::Goal => "goal",
            EntityKind::Softgoal => "softgoal",
            EntityKind::Task => "task",
            EntityKind::AdaptiveGoal => "adaptive_goal",
            EntityKind::Monitor => "monitor",
            EntityKind::Analyze => "analyze",
            EntityKind::Plan => "plan",
            EntityKind::Execute => "execute",
            EntityKind::ContextUncertainty => "context_uncertainty",
            EntityKind::ComponentsUncertainty => "components_uncertainty",
        }
    }

    pub fn from_keyword(word: &str) -> Option<EntityKind> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    pub fn is_mape(self) -> bool {
        matches!(
            self,
            EntityKind::Monitor | EntityKind::Analyze | EntityKind::Plan | EntityKind::Execute
        )
    }

    pub fn is_uncertainty(self) -> bool {
        matches!(
            self,
            EntityKind::ContextUncertainty | EntityKind::ComponentsUncertainty
        )
    }

    pub fn allows_invariant(self) -> bool {
        matches!(
            self,
            EntityKind::Goal | EntityKind::AdaptiveGoal | EntityKind::Softgoal
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Initialization,
    Fulfillment,
}

impl Phase {
    pub fn keyword(self) -> &'static str {
        match self {
            Phase::Initialization => "init",
            Phase::Fulfillment => "fulfill",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Pre,
    Trigger,
    Post,
}

impl Slot {
    pub fn keyword(self) -> &'static str {
        match self {
            Slot::Pre => "pre",
            Slot::Trigger => "trigger",
            Slot::Post => "post",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Numeric,
    Boolean,
    Class,
}

impl Sort {
    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Numeric => "numeric",
            Sort::Boolean => "boolean",
            Sort::Class => "class",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeDecl {
    pub name: String,
    pub sort: Sort,
    pub class_name: Option<String>,
    /// A family such as `f[i]`, covering `f_1`, `f_2`, ... and `f_i`.
    pub indexed: bool,
}

impl AttributeDecl {
    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeDecl {
            name: name.into(),
            sort: Sort::Numeric,
            class_name: None,
            indexed: false,
        }
    }

    pub fn class(name: impl Into<String>) -> Self {
        let name = name.into();
        AttributeDecl {
            class_name: Some(name.clone()),
            name,
            sort: Sort::Class,
            indexed: false,
        }
    }

    /// Whether a variable name is covered by this declaration.
    pub fn covers(&self, var: &str) -> bool {
        if self.name == var {
            return true;
        }
        if !self.indexed {
            return false;
        }
        match var.strip_prefix(&self.name).and_then(|r| r.strip_prefix('_')) {
            Some(idx) => idx == "i" || (!idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit())),
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffectedGoal {
    pub goal: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntitySpec {
    pub kind: EntityKind,
    pub name: String,
    pub attributes: Vec<AttributeDecl>,
    pub input: Vec<String>,
    pub output: Vec<String>,
    pub conditions: BTreeMap<(Phase, Slot), Formula>,
    pub invariant: Option<Formula>,
    pub variant: Option<Formula>,
    /// The violation condition an uncertainty entity describes.
    pub violation: Option<Formula>,
    pub affected_goal: Option<AffectedGoal>,
    pub from_goal: Option<String>,
    pub tradeoff_with: Option<String>,
    /// Softgoals: the numeric attribute holding the softgoal's utility.
    pub utility: Option<String>,
    /// Adaptive goals: the softgoal whose utility the goal maintains.
    pub softgoal: Option<String>,
    pub span: Span,
}

impl EntitySpec {
    pub fn new(kind: EntityKind, name: impl Into<String>) -> Self {
        EntitySpec {
            kind,
            name: name.into(),
            attributes: Vec::new(),
            input: Vec::new(),
            output: Vec::new(),
            conditions: BTreeMap::new(),
            invariant: None,
            variant: None,
            violation: None,
            affected_goal: None,
            from_goal: None,
            tradeoff_with: None,
            utility: None,
            softgoal: None,
            span: Span::default(),
        }
    }

    pub fn condition(&self, phase: Phase, slot: Slot) -> Option<&Formula> {
        self.conditions.get(&(phase, slot))
    }

    pub fn attributes_of(&self, sort: Sort) -> impl Iterator<Item = &AttributeDecl> {
        self.attributes.iter().filter(move |a| a.sort == sort)
    }

    pub fn declares(&self, var: &str) -> bool {
        self.attributes.iter().any(|a| a.covers(var))
    }

    /// Every formula held by the entity, labeled by slot.
    pub fn formulas(&self) -> Vec<(String, &Formula)> {
        let mut out: Vec<(String, &Formula)> = self
            .conditions
            .iter()
            .map(|((p, s), f)| (format!("{}.{}", p.keyword(), s.keyword()), f))
            .collect();
        if let Some(f) = &self.invariant {
            out.push(("invariant".into(), f));
        }
        if let Some(f) = &self.variant {
            out.push(("variant".into(), f));
        }
        if let Some(f) = &self.violation {
            out.push(("violation".into(), f));
        }
        out
    }
}

/// A finite numeric domain usable as a quantifier range.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDecl {
    pub name: String,
    pub values: Vec<f64>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpecDocument {
    pub domains: Vec<DomainDecl>,
    pub entities: Vec<EntitySpec>,
}

impl SpecDocument {
    pub fn entity(&self, name: &str) -> Option<&EntitySpec> {
        self.entities.iter().find(|e| e.name == name)
    }

    pub fn entities_of(&self, kind: EntityKind) -> impl Iterator<Item = &EntitySpec> {
        self.entities.iter().filter(move |e| e.kind == kind)
    }

    pub fn domain(&self, name: &str) -> Option<&DomainDecl> {
        self.domains.iter().find(|d| d.name == name)
    }

    /// MAPE entities refining the named goal, in document order.
    pub fn mape_of(&self, goal: &str, kind: EntityKind) -> impl Iterator<Item = &EntitySpec> {
        let goal = goal.to_string();
        self.entities
            .iter()
            .filter(move |e| e.kind == kind && e.from_goal.as_deref() == Some(goal.as_str()))
    }

    /// Uncertainty entities affecting the named goal, in document order.
    pub fn uncertainties_affecting(&self, goal: &str) -> impl Iterator<Item = &EntitySpec> {
        let goal = goal.to_string();
        self.entities.iter().filter(move |e| {
            e.kind.is_uncertainty() && e.affected_goal.as_ref().is_some_and(|a| a.goal == goal)
        })
    }
}
