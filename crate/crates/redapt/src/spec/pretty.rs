use std::fmt::Write;

use super::ast::*;

// Binding strength of each formula shape; a child is parenthesized when
// its level is below what its position requires.
const QUANT: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const TEMPORAL: u8 = 5;
const UNTIL: u8 = 6;
const PRIMARY: u8 = 7;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Quantified { .. } => QUANT,
        Formula::Implies(..) => IMPLIES,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        Formula::Not(_) => NOT,
        Formula::Next(_) | Formula::Eventually(_) | Formula::Globally(_) => TEMPORAL,
        Formula::Until(..) => UNTIL,
        Formula::Atom(_) | Formula::Compare { .. } | Formula::Procedure(_) => PRIMARY,
    }
}

pub fn pretty_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, QUANT);
    out
}

pub fn pretty_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t);
    out
}

fn write_formula(out: &mut String, f: &Formula, min: u8) {
    // Quantifier bodies extend as far right as possible, so a nested
    // quantifier is always wrapped unless it is the whole formula.
    let wrap = level(f) < min || (min > QUANT && level(f) == QUANT);
    if wrap {
        out.push('(');
    }
    match f {
        Formula::Atom(t) => write_term(out, t),
        Formula::Compare { op, lhs, rhs } => {
            write_term(out, lhs);
            let _ = write!(out, " {} ", op.symbol());
            write_term(out, rhs);
        }
        Formula::Procedure(name) => {
            out.push('@');
            out.push_str(name);
        }
        Formula::Not(a) => {
            out.push('!');
            write_formula(out, a, NOT);
        }
        Formula::And(a, b) => binary(out, a, "&&", b, AND, NOT),
        Formula::Or(a, b) => binary(out, a, "||", b, OR, AND),
        Formula::Implies(a, b) => binary(out, a, "->", b, OR, IMPLIES),
        Formula::Until(a, b) => binary(out, a, "U", b, PRIMARY, UNTIL),
        Formula::Next(a) | Formula::Eventually(a) | Formula::Globally(a) => {
            let kw = match f {
                Formula::Next(_) => "X",
                Formula::Eventually(_) => "F",
                _ => "G",
            };
            out.push_str(kw);
            out.push(' ');
            write_formula(out, a, NOT);
        }
        Formula::Quantified {
            quantifier,
            var,
            domain,
            body,
        } => {
            let kw = match quantifier {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            };
            let _ = write!(out, "{kw} {var} in {domain} . ");
            write_formula(out, body, QUANT);
        }
    }
    if wrap {
        out.push(')');
    }
}

fn binary(out: &mut String, a: &Formula, op: &str, b: &Formula, lmin: u8, rmin: u8) {
    write_formula(out, a, lmin);
    let _ = write!(out, " {op} ");
    write_formula(out, b, rmin);
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Variable(v) => out.push_str(v),
        Term::Constant(c) => write_constant(out, c),
        Term::Apply { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(out, a);
            }
            out.push(')');
        }
        Term::Field { base, field } => {
            write_term(out, base);
            out.push('.');
            out.push_str(field);
        }
    }
}

fn write_constant(out: &mut String, c: &Constant) {
    match c {
        Constant::Number(n) => {
            let _ = write!(out, "{n}");
        }
        Constant::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Constant::Text(s) => write_string(out, s),
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

pub fn pretty_document(doc: &SpecDocument) -> String {
    let mut out = String::new();
    for d in &doc.domains {
        let values: Vec<String> = d.values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "domain {} = {{{}}};", d.name, values.join(", "));
    }
    for e in &doc.entities {
        if !out.is_empty() {
            out.push('\n');
        }
        write_entity(&mut out, e);
    }
    out
}

fn write_entity(out: &mut String, e: &EntitySpec) {
    out.push_str(e.kind.keyword());
    out.push(' ');
    write_string(out, &e.name);
    out.push_str(" {\n");

    let mut i = 0;
    while i < e.attributes.len() {
        let sort = e.attributes[i].sort;
        let run: Vec<String> = e.attributes[i..]
            .iter()
            .take_while(|a| a.sort == sort)
            .map(|a| match (&a.class_name, a.indexed) {
                (Some(c), _) => c.clone(),
                (None, true) => format!("{}[i]", a.name),
                (None, false) => a.name.clone(),
            })
            .collect();
        i += run.len();
        let _ = writeln!(out, "  {}: {};", sort.keyword(), run.join(", "));
    }
    if !e.input.is_empty() {
        let _ = writeln!(out, "  input: {};", e.input.join(", "));
    }
    if !e.output.is_empty() {
        let _ = writeln!(out, "  output: {};", e.output.join(", "));
    }
    text_entry(out, "from", &e.from_goal);
    if let Some(a) = &e.affected_goal {
        out.push_str("  affects: ");
        write_string(out, &a.goal);
        let _ = writeln!(out, " {};", a.kind);
    }
    text_entry(out, "tradeoff", &e.tradeoff_with);
    if let Some(u) = &e.utility {
        let _ = writeln!(out, "  utility: {u};");
    }
    text_entry(out, "softgoal", &e.softgoal);
    for ((phase, slot), f) in &e.conditions {
        let _ = writeln!(
            out,
            "  {}.{}: {};",
            phase.keyword(),
            slot.keyword(),
            pretty_formula(f)
        );
    }
    for (key, f) in [
        ("invariant", &e.invariant),
        ("variant", &e.variant),
        ("violation", &e.violation),
    ] {
        if let Some(f) = f {
            let _ = writeln!(out, "  {key}: {};", pretty_formula(f));
        }
    }
    out.push_str("}\n");
}

fn text_entry(out: &mut String, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        let _ = write!(out, "  {key}: ");
        write_string(out, v);
        out.push_str(";\n");
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_formula;
    use super::*;

    fn round(src: &str) -> String {
        pretty_formula(&parse_formula(src).unwrap())
    }

    #[test]
    fn canonical_parentheses() {
        assert_eq!(round("G(p >= 50% && n <= 350)"), "G (p >= 0.5 && n <= 350)");
        assert_eq!(round("(a U b) U c"), "(a U b) U c");
        assert_eq!(round("a U b U c"), "a U b U c");
        assert_eq!(round("!(a && b)"), "!(a && b)");
        assert_eq!(round("(a -> b) -> c"), "(a -> b) -> c");
        assert_eq!(round("a && (exists x in D . x = 1)"), "a && (exists x in D . x = 1)");
    }

    #[test]
    fn deep_until_chain_round_trips() {
        let mut f = Formula::atom("z");
        for i in 0..40 {
            let lhs = if i % 2 == 0 {
                Formula::atom(format!("a{i}"))
            } else {
                Formula::until(Formula::atom("p"), Formula::atom("q"))
            };
            f = Formula::until(lhs, f);
        }
        assert_eq!(parse_formula(&pretty_formula(&f)).unwrap(), f);
    }

    #[test]
    fn strings_are_escaped() {
        let f = Formula::compare(CompareOp::Eq, Term::var("s"), Term::text("a\"b\\c\n"));
        assert_eq!(parse_formula(&pretty_formula(&f)).unwrap(), f);
    }
}
