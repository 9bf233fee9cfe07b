use std::fmt;

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagnosticCode {
    UndeclaredSymbol,
    UnknownDomain,
    DanglingReference,
    MissingFromGoal,
    MissingAffectedGoal,
    MisplacedEntry,
    Shadowing,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::UndeclaredSymbol => "undeclared-symbol",
            DiagnosticCode::UnknownDomain => "unknown-domain",
            DiagnosticCode::DanglingReference => "dangling-reference",
            DiagnosticCode::MissingFromGoal => "missing-from-goal",
            DiagnosticCode::MissingAffectedGoal => "missing-affected-goal",
            DiagnosticCode::MisplacedEntry => "misplaced-entry",
            DiagnosticCode::Shadowing => "shadowing",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub entity: String,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.span.line,
            self.span.col,
            self.code.as_str(),
            self.message
        )
    }
}

/// Checks that every symbol a formula uses is housed in its entity's
/// attributes and that cross-entity references resolve.
pub fn check_wellformed(doc: &SpecDocument) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for e in &doc.entities {
        let mut report = |code, message: String| {
            out.push(Diagnostic {
                code,
                entity: e.name.clone(),
                span: e.span,
                message,
            })
        };

        if e.kind.is_mape() {
            match &e.from_goal {
                None => report(
                    DiagnosticCode::MissingFromGoal,
                    format!("{} `{}` does not name the goal it refines", e.kind.keyword(), e.name),
                ),
                Some(g) if doc.entity(g).is_none() => report(
                    DiagnosticCode::DanglingReference,
                    format!("`{}` refines unknown entity `{g}`", e.name),
                ),
                Some(_) => {}
            }
        } else if e.from_goal.is_some() {
            report(
                DiagnosticCode::MisplacedEntry,
                format!("`from` is only allowed on MAPE entities, found on `{}`", e.name),
            );
        }

        if e.kind.is_uncertainty() {
            match &e.affected_goal {
                None => report(
                    DiagnosticCode::MissingAffectedGoal,
                    format!("uncertainty `{}` does not name the goal it affects", e.name),
                ),
                Some(a) if doc.entity(&a.goal).is_none() => report(
                    DiagnosticCode::DanglingReference,
                    format!("`{}` affects unknown entity `{}`", e.name, a.goal),
                ),
                Some(_) => {}
            }
        } else if e.affected_goal.is_some() {
            report(
                DiagnosticCode::MisplacedEntry,
                format!("`affects` is only allowed on uncertainty entities, found on `{}`", e.name),
            );
        }

        if e.invariant.is_some() && !e.kind.allows_invariant() {
            report(
                DiagnosticCode::MisplacedEntry,
                format!("{} `{}` may not carry an invariant", e.kind.keyword(), e.name),
            );
        }

        if let Some(t) = &e.tradeoff_with {
            if e.kind != EntityKind::Softgoal {
                report(
                    DiagnosticCode::MisplacedEntry,
                    format!("`tradeoff` is only allowed on softgoals, found on `{}`", e.name),
                );
            }
            if doc.entity(t).is_none() {
                report(
                    DiagnosticCode::DanglingReference,
                    format!("`{}` trades off against unknown entity `{t}`", e.name),
                );
            }
        }

        if let Some(s) = &e.softgoal {
            match doc.entity(s) {
                Some(sg) if sg.kind == EntityKind::Softgoal => {}
                _ => report(
                    DiagnosticCode::DanglingReference,
                    format!("`{}` maintains unknown softgoal `{s}`", e.name),
                ),
            }
        }

        if let Some(u) = &e.utility {
            if !e.declares(u) {
                report(
                    DiagnosticCode::UndeclaredSymbol,
                    format!("utility `{u}` is not declared in `{}`", e.name),
                );
            }
        }

        for item in e.input.iter().chain(&e.output) {
            let name = item.strip_suffix("[i]").map(|n| format!("{n}_i"));
            let name = name.as_deref().unwrap_or(item);
            if !e.declares(name) {
                report(
                    DiagnosticCode::UndeclaredSymbol,
                    format!("`{item}` is not declared in `{}`", e.name),
                );
            }
        }

        for (label, f) in e.formulas() {
            let mut scope = Vec::new();
            check_formula(doc, e, &label, f, &mut scope, &mut report);
        }
    }
    out
}

fn check_formula(
    doc: &SpecDocument,
    e: &EntitySpec,
    label: &str,
    f: &Formula,
    scope: &mut Vec<String>,
    report: &mut impl FnMut(DiagnosticCode, String),
) {
    match f {
        Formula::Atom(t) => check_term(e, label, t, scope, report),
        Formula::Compare { lhs, rhs, .. } => {
            check_term(e, label, lhs, scope, report);
            check_term(e, label, rhs, scope, report);
        }
        Formula::Procedure(_) => {}
        Formula::Not(a) | Formula::Next(a) | Formula::Eventually(a) | Formula::Globally(a) => {
            check_formula(doc, e, label, a, scope, report)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
            check_formula(doc, e, label, a, scope, report);
            check_formula(doc, e, label, b, scope, report);
        }
        Formula::Quantified {
            var, domain, body, ..
        } => {
            let is_class = e
                .attributes_of(Sort::Class)
                .any(|a| a.class_name.as_deref() == Some(domain.as_str()));
            if !is_class && doc.domain(domain).is_none() {
                report(
                    DiagnosticCode::UnknownDomain,
                    format!("{label} of `{}` quantifies over undeclared domain `{domain}`", e.name),
                );
            }
            if scope.contains(var) {
                report(
                    DiagnosticCode::Shadowing,
                    format!("{label} of `{}` rebinds quantified variable `{var}`", e.name),
                );
            }
            scope.push(var.clone());
            check_formula(doc, e, label, body, scope, report);
            scope.pop();
        }
    }
}

fn check_term(
    e: &EntitySpec,
    label: &str,
    t: &Term,
    scope: &[String],
    report: &mut impl FnMut(DiagnosticCode, String),
) {
    match t {
        Term::Variable(v) => {
            if !scope.contains(v) && !e.declares(v) {
                report(
                    DiagnosticCode::UndeclaredSymbol,
                    format!("{label} of `{}` uses undeclared symbol `{v}`", e.name),
                );
            }
        }
        Term::Constant(_) => {}
        Term::Apply { args, .. } => {
            for a in args {
                check_term(e, label, a, scope, report);
            }
        }
        Term::Field { base, .. } => check_term(e, label, base, scope, report),
    }
}
