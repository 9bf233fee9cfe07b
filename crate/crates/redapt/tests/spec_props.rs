//! Properties of the specification language: printing and parsing, the
//! three-valued temporal semantics, and quantifier expansion.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{oracle, random_formula, to_trace, BoolTrace, P};
use redapt::spec::{
    evaluate, parse_document, parse_formula, pretty_document, pretty_formula, Env, Formula,
    State, Trace, Verdict, HRCS_SPEC,
};

fn prop_formula() -> impl Strategy<Value = P> {
    let leaf = prop_oneof![Just(P::A), Just(P::B)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let b = |x: P| Box::new(x);
        prop_oneof![
            inner.clone().prop_map(move |x| P::Not(b(x))),
            inner.clone().prop_map(move |x| P::Next(b(x))),
            inner.clone().prop_map(move |x| P::Ev(b(x))),
            inner.clone().prop_map(move |x| P::Glob(b(x))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| P::And(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| P::Or(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| P::Imp(b(x), b(y))),
            (inner.clone(), inner).prop_map(move |(x, y)| P::Until(b(x), b(y))),
        ]
    })
}

fn prop_trace(max_len: usize) -> impl Strategy<Value = BoolTrace> {
    prop::collection::vec((any::<bool>(), any::<bool>()), 1..=max_len)
}

fn eval_at(f: &Formula, t: &BoolTrace, i: usize) -> Verdict {
    evaluate(f, &to_trace(t), i, &Env::new()).expect("propositional formulas evaluate")
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(512) })]

    #[test]
    fn matches_oracle_on_longer_traces(f in prop_formula(), t in prop_trace(6)) {
        let g = f.to_formula();
        for i in 0..t.len() {
            prop_assert_eq!(eval_at(&g, &t, i), oracle(&f, &t, i).to_verdict());
        }
    }

    #[test]
    fn definite_verdicts_survive_extension(
        f in prop_formula(),
        t in prop_trace(4),
        ext in prop::collection::vec((any::<bool>(), any::<bool>()), 1..=3),
    ) {
        let g = f.to_formula();
        let before = eval_at(&g, &t, 0);
        let mut longer = t.clone();
        longer.extend(ext);
        let after = eval_at(&g, &longer, 0);
        if before != Verdict::Inconclusive {
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn temporal_dualities(f in prop_formula(), t in prop_trace(5)) {
        let g = f.to_formula();
        let not = Formula::not;
        for i in 0..t.len() {
            prop_assert_eq!(
                eval_at(&not(Formula::globally(g.clone())), &t, i),
                eval_at(&Formula::eventually(not(g.clone())), &t, i)
            );
            prop_assert_eq!(
                eval_at(&not(Formula::eventually(g.clone())), &t, i),
                eval_at(&Formula::globally(not(g.clone())), &t, i)
            );
            prop_assert_eq!(
                eval_at(&not(Formula::next(g.clone())), &t, i),
                eval_at(&Formula::next(not(g.clone())), &t, i)
            );
        }
    }

    #[test]
    fn pretty_then_parse_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, 4);
        let text = pretty_formula(&f);
        let back = parse_formula(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(pretty_formula(&back), text);
    }

    #[test]
    fn forall_and_exists_expand_over_finite_domains(
        values in prop::collection::vec(-5i32..5, 0..5),
        a in -5i32..5,
    ) {
        let vals: Vec<f64> = values.iter().map(|v| f64::from(*v)).collect();
        let env = Env::new().with_domain("D", vals.clone());
        let trace = Trace::new(vec![State::at(0.0).with("a", f64::from(a))]).unwrap();
        let all = parse_formula("forall x in D . x < a").unwrap();
        let any = parse_formula("exists x in D . x < a").unwrap();
        let conj = vals.iter().fold(Verdict::Sat, |acc, v| {
            acc.and(Verdict::from_bool(*v < f64::from(a)))
        });
        let disj = vals.iter().fold(Verdict::Viol, |acc, v| {
            acc.or(Verdict::from_bool(*v < f64::from(a)))
        });
        prop_assert_eq!(evaluate(&all, &trace, 0, &env).unwrap(), conj);
        prop_assert_eq!(evaluate(&any, &trace, 0, &env).unwrap(), disj);
    }
}

#[test]
fn connectives_follow_strong_kleene_tables() {
    // One state with a true and b false; `X a` has no successor.
    let trace: BoolTrace = vec![(true, false)];
    let ops = [
        (Verdict::Sat, P::A),
        (Verdict::Viol, P::B),
        (Verdict::Inconclusive, P::Next(Box::new(P::A))),
    ];
    use Verdict::{Inconclusive as I, Sat as S, Viol as V};
    let and = |x, y| match (x, y) {
        (V, _) | (_, V) => V,
        (S, S) => S,
        _ => I,
    };
    let or = |x, y| match (x, y) {
        (S, _) | (_, S) => S,
        (V, V) => V,
        _ => I,
    };
    for (vx, px) in &ops {
        let neg = match vx {
            S => V,
            V => S,
            I => I,
        };
        assert_eq!(eval_at(&Formula::not(px.to_formula()), &trace, 0), neg);
        for (vy, py) in &ops {
            let (fx, fy) = (px.to_formula(), py.to_formula());
            assert_eq!(eval_at(&Formula::and(fx.clone(), fy.clone()), &trace, 0), and(*vx, *vy));
            assert_eq!(eval_at(&Formula::or(fx.clone(), fy.clone()), &trace, 0), or(*vx, *vy));
            assert_eq!(eval_at(&Formula::implies(fx, fy), &trace, 0), or(neg, *vy));
        }
    }
}

#[test]
fn end_of_trace_is_inconclusive() {
    let t: BoolTrace = vec![(true, false), (true, false)];
    let f = |s: &str| parse_formula(s).unwrap();
    assert_eq!(eval_at(&f("X X a"), &t, 0), Verdict::Inconclusive);
    assert_eq!(eval_at(&f("F b"), &t, 0), Verdict::Inconclusive);
    assert_eq!(eval_at(&f("G a"), &t, 0), Verdict::Inconclusive);
    assert_eq!(eval_at(&f("a U b"), &t, 0), Verdict::Inconclusive);
    assert_eq!(eval_at(&f("G b"), &t, 0), Verdict::Viol);
    assert_eq!(eval_at(&f("F a"), &t, 0), Verdict::Sat);
    assert_eq!(eval_at(&f("b U a"), &t, 0), Verdict::Sat);
}

#[test]
fn bundled_document_round_trips() {
    let doc = parse_document(HRCS_SPEC).unwrap();
    let text = pretty_document(&doc);
    let again = parse_document(&text).unwrap();
    assert_eq!(again, doc);
    assert_eq!(pretty_document(&again), text);
}

#[test]
fn percent_literals_and_absent_text() {
    let env = Env::new();
    let trace = Trace::new(vec![
        State::at(0.0).with("p", 0.5).with("x", redapt::spec::Value::Absent),
    ])
    .unwrap();
    let f = |s: &str| evaluate(&parse_formula(s).unwrap(), &trace, 0, &env).unwrap();
    assert_eq!(f("p = 50%"), Verdict::Sat);
    assert_eq!(f("x = \"\""), Verdict::Sat);
    assert_eq!(f("x != \"\""), Verdict::Viol);
}

#[test]
fn malformed_formulas_are_rejected() {
    for bad in ["a &&", "G", "(a", "forall x . a", "a U", "a < < b", "50 %%"] {
        assert!(parse_formula(bad).is_err(), "{bad} parsed");
    }
}
