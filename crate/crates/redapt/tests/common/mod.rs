//! Test-only helpers: a brute-force evaluator for the propositional
//! temporal fragment, formula and trace enumerators, and a seeded random
//! formula generator.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use redapt::spec::{CompareOp, Formula, State, Term, Trace, Value, Verdict};

/// Verdicts of the oracle, kept separate from the library's type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tv {
    T,
    F,
    U,
}

impl Tv {
    pub fn to_verdict(self) -> Verdict {
        match self {
            Tv::T => Verdict::Sat,
            Tv::F => Verdict::Viol,
            Tv::U => Verdict::Inconclusive,
        }
    }
}

fn tv_not(a: Tv) -> Tv {
    match a {
        Tv::T => Tv::F,
        Tv::F => Tv::T,
        Tv::U => Tv::U,
    }
}

fn tv_and(a: Tv, b: Tv) -> Tv {
    if a == Tv::F || b == Tv::F {
        Tv::F
    } else if a == Tv::T && b == Tv::T {
        Tv::T
    } else {
        Tv::U
    }
}

fn tv_or(a: Tv, b: Tv) -> Tv {
    tv_not(tv_and(tv_not(a), tv_not(b)))
}

/// Propositional formulas over two boolean variables.
#[derive(Debug, Clone, PartialEq)]
pub enum P {
    A,
    B,
    Not(Box<P>),
    Next(Box<P>),
    Ev(Box<P>),
    Glob(Box<P>),
    And(Box<P>, Box<P>),
    Or(Box<P>, Box<P>),
    Imp(Box<P>, Box<P>),
    Until(Box<P>, Box<P>),
}

impl P {
    pub fn to_formula(&self) -> Formula {
        match self {
            P::A => Formula::atom("a"),
            P::B => Formula::atom("b"),
            P::Not(x) => Formula::not(x.to_formula()),
            P::Next(x) => Formula::next(x.to_formula()),
            P::Ev(x) => Formula::eventually(x.to_formula()),
            P::Glob(x) => Formula::globally(x.to_formula()),
            P::And(x, y) => Formula::and(x.to_formula(), y.to_formula()),
            P::Or(x, y) => Formula::or(x.to_formula(), y.to_formula()),
            P::Imp(x, y) => Formula::implies(x.to_formula(), y.to_formula()),
            P::Until(x, y) => Formula::until(x.to_formula(), y.to_formula()),
        }
    }
}

/// Each state is `(a, b)`.
pub type BoolTrace = Vec<(bool, bool)>;

/// The finite-trace definitions written out literally: a temporal
/// operator folds its operand over every future position and joins the
/// end of the trace as an unknown.
pub fn oracle(f: &P, t: &BoolTrace, i: usize) -> Tv {
    let n = t.len();
    let lit = |b: bool| if b { Tv::T } else { Tv::F };
    match f {
        P::A => lit(t[i].0),
        P::B => lit(t[i].1),
        P::Not(x) => tv_not(oracle(x, t, i)),
        P::And(x, y) => tv_and(oracle(x, t, i), oracle(y, t, i)),
        P::Or(x, y) => tv_or(oracle(x, t, i), oracle(y, t, i)),
        P::Imp(x, y) => tv_or(tv_not(oracle(x, t, i)), oracle(y, t, i)),
        P::Next(x) => {
            if i + 1 < n {
                oracle(x, t, i + 1)
            } else {
                Tv::U
            }
        }
        P::Ev(x) => (i..n).fold(Tv::U, |acc, j| tv_or(acc, oracle(x, t, j))),
        P::Glob(x) => (i..n).fold(Tv::U, |acc, j| tv_and(acc, oracle(x, t, j))),
        P::Until(x, y) => {
            // Some j with y at j and x everywhere before it, or x forever
            // on a trace that may continue.
            let mut acc = Tv::F;
            for j in i..n {
                let before = (i..j).fold(Tv::T, |a, k| tv_and(a, oracle(x, t, k)));
                acc = tv_or(acc, tv_and(before, oracle(y, t, j)));
            }
            let always = (i..n).fold(Tv::T, |a, k| tv_and(a, oracle(x, t, k)));
            tv_or(acc, tv_and(always, Tv::U))
        }
    }
}

/// Every formula with at most `levels` nodes on its longest path.
pub fn all_formulas(levels: usize) -> Vec<P> {
    if levels == 0 {
        return Vec::new();
    }
    let mut out = vec![P::A, P::B];
    if levels == 1 {
        return out;
    }
    let sub = all_formulas(levels - 1);
    for x in &sub {
        let b = || Box::new(x.clone());
        out.extend([P::Not(b()), P::Next(b()), P::Ev(b()), P::Glob(b())]);
    }
    for x in &sub {
        for y in &sub {
            let (bx, by) = (|| Box::new(x.clone()), || Box::new(y.clone()));
            out.extend([
                P::And(bx(), by()),
                P::Or(bx(), by()),
                P::Imp(bx(), by()),
                P::Until(bx(), by()),
            ]);
        }
    }
    out
}

/// Every boolean trace of exactly `len` states.
pub fn all_traces(len: usize) -> Vec<BoolTrace> {
    (0..1u32 << (2 * len))
        .map(|bits| {
            (0..len)
                .map(|k| (bits >> (2 * k) & 1 == 1, bits >> (2 * k + 1) & 1 == 1))
                .collect()
        })
        .collect()
}

pub fn to_trace(t: &BoolTrace) -> Trace {
    let states = t
        .iter()
        .enumerate()
        .map(|(k, (a, b))| State {
            time: k as f64,
            vars: BTreeMap::from([
                ("a".to_string(), Value::Bool(*a)),
                ("b".to_string(), Value::Bool(*b)),
            ]),
            instances: BTreeMap::new(),
        })
        .collect();
    Trace::new(states).expect("increasing times")
}

const VARS: [&str; 6] = ["a", "b", "p", "n", "flow_1", "s"];
const DOMAINS: [&str; 3] = ["D", "I_sensor", "Horizon"];
const TEXTS: [&str; 4] = ["", "ok", "two words", "q\"uote"];
const OPS: [CompareOp; 6] = [
    CompareOp::Eq,
    CompareOp::Ne,
    CompareOp::Lt,
    CompareOp::Le,
    CompareOp::Gt,
    CompareOp::Ge,
];

pub fn random_term<R: Rng>(rng: &mut R, depth: u32) -> Term {
    let pick = if depth == 0 { rng.random_range(0..3) } else { rng.random_range(0..5) };
    match pick {
        0 => Term::var(VARS[rng.random_range(0..VARS.len())]),
        1 => Term::num(f64::from(rng.random_range(0..4000u32)) / 4.0),
        2 => Term::text(TEXTS[rng.random_range(0..TEXTS.len())]),
        3 => Term::Field {
            base: Box::new(Term::var("s")),
            field: "value".into(),
        },
        _ => Term::Apply {
            name: "Prior".into(),
            args: (0..rng.random_range(1..3))
                .map(|_| random_term(rng, depth - 1))
                .collect(),
        },
    }
}

/// A random formula with at most `depth` levels below the root.
pub fn random_formula<R: Rng>(rng: &mut R, depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.4) {
            Formula::atom(VARS[rng.random_range(0..VARS.len())])
        } else {
            let op = OPS[rng.random_range(0..OPS.len())];
            Formula::compare(op, random_term(rng, 1), random_term(rng, 1))
        };
    }
    let d = depth - 1;
    match rng.random_range(0..10) {
        0 => Formula::not(random_formula(rng, d)),
        1 => Formula::and(random_formula(rng, d), random_formula(rng, d)),
        2 => Formula::or(random_formula(rng, d), random_formula(rng, d)),
        3 => Formula::implies(random_formula(rng, d), random_formula(rng, d)),
        4 => Formula::next(random_formula(rng, d)),
        5 => Formula::eventually(random_formula(rng, d)),
        6 => Formula::globally(random_formula(rng, d)),
        7 => Formula::until(random_formula(rng, d), random_formula(rng, d)),
        8 => Formula::forall(
            ["x", "y", "s"][rng.random_range(0..3)],
            DOMAINS[rng.random_range(0..DOMAINS.len())],
            random_formula(rng, d),
        ),
        _ => Formula::exists(
            ["x", "y", "s"][rng.random_range(0..3)],
            DOMAINS[rng.random_range(0..DOMAINS.len())],
            random_formula(rng, d),
        ),
    }
}
