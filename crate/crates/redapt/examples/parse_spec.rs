//! Parses the bundled crossing specification, checks it, and evaluates a
//! formula over a small hand-written trace.

use redapt::spec::{
    check_wellformed, evaluate, parse_document, parse_formula, pretty_formula, Env, State, Trace,
    HRCS_SPEC,
};

fn main() {
    let doc = parse_document(HRCS_SPEC).expect("bundled spec parses");
    println!("{} entities, {} diagnostics", doc.entities.len(), check_wellformed(&doc).len());
    for e in doc.entities.iter().filter(|e| e.invariant.is_some()) {
        println!("{} {}: {}", e.kind.keyword(), e.name, pretty_formula(e.invariant.as_ref().unwrap()));
    }

    let f = parse_formula("G (n < 350) && F (p > 50%)").unwrap();
    let trace = Trace::new(vec![
        State::at(0.0).with("n", 120.0).with("p", 0.2),
        State::at(60.0).with("n", 180.0).with("p", 0.4),
        State::at(120.0).with("n", 210.0).with("p", 0.7),
    ])
    .unwrap();
    let env = Env::from_document(&doc);
    println!("{} -> {}", pretty_formula(&f), evaluate(&f, &trace, 0, &env).unwrap());
}
