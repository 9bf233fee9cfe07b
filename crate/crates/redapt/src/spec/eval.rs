//! Three-valued evaluation of formulas over finite traces.
//!
//! Temporal operators look only at the states recorded so far: `X` at the
//! last state, an unwitnessed `F`, an unrefuted `G` and an undecided `U`
//! are all `Inconclusive`. Definitive verdicts therefore never change when
//! the trace grows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Sat,
    Viol,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Sat
        } else {
            Verdict::Viol
        }
    }

    pub fn not(self) -> Verdict {
        match self {
            Verdict::Sat => Verdict::Viol,
            Verdict::Viol => Verdict::Sat,
            Verdict::Inconclusive => Verdict::Inconclusive,
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Viol, _) | (_, Verdict::Viol) => Verdict::Viol,
            (Verdict::Sat, Verdict::Sat) => Verdict::Sat,
            _ => Verdict::Inconclusive,
        }
    }

    pub fn or(self, other: Verdict) -> Verdict {
        self.not().and(other.not()).not()
    }

    pub fn implies(self, other: Verdict) -> Verdict {
        self.not().or(other)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "Sat",
            Verdict::Viol => "Viol",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Text(String),
    /// A class instance, by name.
    Instance(String),
    /// No value: a failed sensor, an empty CSV cell.
    Absent,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Number(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::Absent, Value::Number)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Instance {
    pub class: String,
    pub fields: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct State {
    pub time: f64,
    pub vars: BTreeMap<String, Value>,
    pub instances: BTreeMap<String, Instance>,
}

impl State {
    pub fn at(time: f64) -> Self {
        State {
            time,
            ..State::default()
        }
    }

    pub fn with(mut self, var: impl Into<String>, value: impl Into<Value>) -> Self {
        self.vars.insert(var.into(), value.into());
        self
    }

    pub fn with_instance(
        mut self,
        name: impl Into<String>,
        class: impl Into<String>,
        fields: impl IntoIterator<Item = (String, Value)>,
    ) -> Self {
        self.instances.insert(
            name.into(),
            Instance {
                class: class.into(),
                fields: fields.into_iter().collect(),
            },
        );
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace has no states")]
    Empty,
    #[error("state {index} at time {time} does not follow time {previous}")]
    NonIncreasing {
        index: usize,
        time: String,
        previous: String,
    },
}

/// A non-empty sequence of states with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    states: Vec<State>,
}

impl Trace {
    pub fn new(states: Vec<State>) -> Result<Trace, TraceError> {
        let mut t = Trace {
            states: Vec::with_capacity(states.len()),
        };
        for s in states {
            t.push(s)?;
        }
        if t.states.is_empty() {
            return Err(TraceError::Empty);
        }
        Ok(t)
    }

    pub fn push(&mut self, state: State) -> Result<(), TraceError> {
        if let Some(last) = self.states.last() {
            if !(state.time > last.time) {
                return Err(TraceError::NonIncreasing {
                    index: self.states.len(),
                    time: state.time.to_string(),
                    previous: last.time.to_string(),
                });
            }
        }
        self.states.push(state);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    /// The first `len` states.
    pub fn prefix(&self, len: usize) -> Option<Trace> {
        (len >= 1 && len <= self.states.len()).then(|| Trace {
            states: self.states[..len].to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("quantifier over `{0}`, which is neither a finite domain nor a known class")]
    InfiniteDomain(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` failed: {message}")]
    FunctionFailed { name: String, message: String },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("position {position} is outside a trace of {len} states")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("procedure `@{0}` is not a logical formula")]
    NotEvaluable(String),
}

pub type Function = Arc<dyn Fn(&[Value]) -> Result<Value, String> + Send + Sync>;

/// Everything a formula may refer to besides the trace: free parameter
/// bindings, finite numeric domains, class names and functions.
#[derive(Clone, Default)]
pub struct Env {
    pub bindings: BTreeMap<String, Value>,
    pub domains: BTreeMap<String, Vec<f64>>,
    pub classes: BTreeSet<String>,
    pub functions: BTreeMap<String, Function>,
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Env")
            .field("bindings", &self.bindings)
            .field("domains", &self.domains)
            .field("classes", &self.classes)
            .field("functions", &self.functions.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    /// Domains and class names declared anywhere in the document.
    pub fn from_document(doc: &SpecDocument) -> Self {
        let mut env = Env::new();
        for d in &doc.domains {
            env.domains.insert(d.name.clone(), d.values.clone());
        }
        for e in &doc.entities {
            for a in e.attributes_of(Sort::Class) {
                if let Some(c) = &a.class_name {
                    env.classes.insert(c.clone());
                }
            }
        }
        env
    }

    pub fn bind(mut self, var: impl Into<String>, value: impl Into<Value>) -> Self {
        self.bindings.insert(var.into(), value.into());
        self
    }

    pub fn with_domain(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.domains.insert(name.into(), values);
        self
    }

    pub fn with_class(mut self, name: impl Into<String>) -> Self {
        self.classes.insert(name.into());
        self
    }

    pub fn with_function(
        mut self,
        name: impl Into<String>,
        f: impl Fn(&[Value]) -> Result<Value, String> + Send + Sync + 'static,
    ) -> Self {
        self.functions.insert(name.into(), Arc::new(f));
        self
    }
}

/// Evaluates `formula` at `position` of `trace`.
pub fn evaluate(
    formula: &Formula,
    trace: &Trace,
    position: usize,
    env: &Env,
) -> Result<Verdict, EvalError> {
    if position >= trace.len() {
        return Err(EvalError::PositionOutOfRange {
            position,
            len: trace.len(),
        });
    }
    let mut scope = Vec::new();
    Evaluator { trace, env }.formula(formula, position, &mut scope)
}

struct Evaluator<'a> {
    trace: &'a Trace,
    env: &'a Env,
}

type Scope = Vec<(String, Value)>;

impl Evaluator<'_> {
    fn formula(&self, f: &Formula, i: usize, scope: &mut Scope) -> Result<Verdict, EvalError> {
        let n = self.trace.len();
        Ok(match f {
            Formula::Atom(t) => match self.term(t, i, scope)? {
                Value::Bool(b) => Verdict::from_bool(b),
                Value::Absent => Verdict::Viol,
                other => {
                    return Err(EvalError::TypeMismatch(format!(
                        "atom evaluates to {other:?}, not a boolean"
                    )))
                }
            },
            Formula::Compare { op, lhs, rhs } => {
                let l = self.term(lhs, i, scope)?;
                let r = self.term(rhs, i, scope)?;
                compare(*op, &l, &r)?
            }
            Formula::Procedure(name) => return Err(EvalError::NotEvaluable(name.clone())),
            Formula::Not(a) => self.formula(a, i, scope)?.not(),
            Formula::And(a, b) => {
                let va = self.formula(a, i, scope)?;
                va.and(self.formula(b, i, scope)?)
            }
            Formula::Or(a, b) => {
                let va = self.formula(a, i, scope)?;
                va.or(self.formula(b, i, scope)?)
            }
            Formula::Implies(a, b) => {
                let va = self.formula(a, i, scope)?;
                va.implies(self.formula(b, i, scope)?)
            }
            Formula::Next(a) => {
                if i + 1 < n {
                    self.formula(a, i + 1, scope)?
                } else {
                    Verdict::Inconclusive
                }
            }
            Formula::Eventually(a) => {
                for j in i..n {
                    if self.formula(a, j, scope)? == Verdict::Sat {
                        return Ok(Verdict::Sat);
                    }
                }
                Verdict::Inconclusive
            }
            Formula::Globally(a) => {
                for j in i..n {
                    if self.formula(a, j, scope)? == Verdict::Viol {
                        return Ok(Verdict::Viol);
                    }
                }
                Verdict::Inconclusive
            }
            Formula::Until(a, b) => {
                // U(j) = b_j || (a_j && U(j+1)) with U(n) undecided, unrolled
                // by distributivity into a disjunction over witness positions.
                let mut result = Verdict::Viol;
                let mut prefix = Verdict::Sat;
                for j in i..n {
                    result = result.or(prefix.and(self.formula(b, j, scope)?));
                    if result == Verdict::Sat {
                        return Ok(Verdict::Sat);
                    }
                    prefix = prefix.and(self.formula(a, j, scope)?);
                    if prefix == Verdict::Viol {
                        return Ok(result);
                    }
                }
                result.or(prefix.and(Verdict::Inconclusive))
            }
            Formula::Quantified {
                quantifier,
                var,
                domain,
                body,
            } => {
                let values = self.domain(domain, i)?;
                let mut acc = match quantifier {
                    Quantifier::Forall => Verdict::Sat,
                    Quantifier::Exists => Verdict::Viol,
                };
                for v in values {
                    scope.push((var.clone(), v));
                    let r = self.formula(body, i, scope);
                    scope.pop();
                    let r = r?;
                    acc = match quantifier {
                        Quantifier::Forall => acc.and(r),
                        Quantifier::Exists => acc.or(r),
                    };
                }
                acc
            }
        })
    }

    fn domain(&self, name: &str, i: usize) -> Result<Vec<Value>, EvalError> {
        if let Some(values) = self.env.domains.get(name) {
            return Ok(values.iter().map(|v| Value::Number(*v)).collect());
        }
        let state = &self.trace.states()[i];
        let members: Vec<Value> = state
            .instances
            .iter()
            .filter(|(_, inst)| inst.class == name)
            .map(|(id, _)| Value::Instance(id.clone()))
            .collect();
        if members.is_empty() && !self.env.classes.contains(name) {
            return Err(EvalError::InfiniteDomain(name.to_string()));
        }
        Ok(members)
    }

    fn term(&self, t: &Term, i: usize, scope: &Scope) -> Result<Value, EvalError> {
        let state = &self.trace.states()[i];
        match t {
            Term::Constant(Constant::Number(n)) => Ok(Value::Number(*n)),
            Term::Constant(Constant::Bool(b)) => Ok(Value::Bool(*b)),
            Term::Constant(Constant::Text(s)) => Ok(Value::Text(s.clone())),
            Term::Variable(v) => {
                if let Some((_, val)) = scope.iter().rev().find(|(name, _)| name == v) {
                    return Ok(val.clone());
                }
                if let Some(val) = state.vars.get(v) {
                    return Ok(val.clone());
                }
                if let Some(val) = self.env.bindings.get(v) {
                    return Ok(val.clone());
                }
                if state.instances.contains_key(v) {
                    return Ok(Value::Instance(v.clone()));
                }
                Err(EvalError::UnboundVariable(v.clone()))
            }
            Term::Field { base, field } => match self.term(base, i, scope)? {
                Value::Instance(id) => Ok(state
                    .instances
                    .get(&id)
                    .and_then(|inst| inst.fields.get(field))
                    .cloned()
                    .unwrap_or(Value::Absent)),
                Value::Absent => Ok(Value::Absent),
                other => Err(EvalError::TypeMismatch(format!(
                    "field `{field}` of non-instance {other:?}"
                ))),
            },
            Term::Apply { name, args } => {
                let f = self
                    .env
                    .functions
                    .get(name)
                    .ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
                let args = args
                    .iter()
                    .map(|a| self.term(a, i, scope))
                    .collect::<Result<Vec<_>, _>>()?;
                f(&args).map_err(|message| EvalError::FunctionFailed {
                    name: name.clone(),
                    message,
                })
            }
        }
    }
}

fn compare(op: CompareOp, l: &Value, r: &Value) -> Result<Verdict, EvalError> {
    use Value::*;
    let eq = match (l, r) {
        (Number(a), Number(b)) => {
            return Ok(Verdict::from_bool(match op {
                CompareOp::Eq => a == b,
                CompareOp::Ne => a != b,
                CompareOp::Lt => a < b,
                CompareOp::Le => a <= b,
                CompareOp::Gt => a > b,
                CompareOp::Ge => a >= b,
            }))
        }
        // An absent value equals the empty string and nothing else.
        (Absent, Absent) => true,
        (Absent, Text(s)) | (Text(s), Absent) => s.is_empty(),
        (Absent, _) | (_, Absent) => false,
        (Text(a), Text(b)) => a == b,
        (Bool(a), Bool(b)) => a == b,
        (Instance(a), Instance(b)) => a == b,
        _ => false,
    };
    match op {
        CompareOp::Eq => Ok(Verdict::from_bool(eq)),
        CompareOp::Ne => Ok(Verdict::from_bool(!eq)),
        _ if matches!(l, Absent) || matches!(r, Absent) => Ok(Verdict::Viol),
        _ => Err(EvalError::TypeMismatch(format!(
            "`{}` needs numbers, got {l:?} and {r:?}",
            op.symbol()
        ))),
    }
}
