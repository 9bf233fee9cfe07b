//! Recursive-descent parser for `.agmspec` documents and formulas.
//!
//! Binding strength, loosest first: quantifiers, `->` (right-assoc),
//! `||`, `&&`, `!`, the unary temporal operators `G F X`, `U`
//! (right-assoc), comparisons.

use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::agm::ViolationKind;

const KEYWORDS: &[&str] = &["forall", "exists", "in", "G", "F", "X", "U", "true", "false"];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(tokenize(text)?);
    let f = p.formula()?;
    p.expect(Tok::Eof)?;
    Ok(f)
}

pub fn parse_document(text: &str) -> Result<SpecDocument, ParseError> {
    let mut p = Parser::new(tokenize(text)?);
    p.document()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let span = self.span();
        ParseError {
            line: span.line,
            col: span.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn error_at(&self, span: Span, msg: String) -> ParseError {
        ParseError {
            line: span.line,
            col: span.col,
            expected: vec![],
            found: msg,
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            let expected = format!("`{}`", tok.symbol());
            Err(self.error(&[expected.as_str()]))
        }
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        if self.is_word(word) {
            self.advance();
            Ok(())
        } else {
            let expected = format!("`{word}`");
            Err(self.error(&[expected.as_str()]))
        }
    }

    /// A non-keyword identifier.
    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(&["string"])),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Tok::Number(n) => {
                let n = *n;
                self.advance();
                Ok(n)
            }
            _ => Err(self.error(&["number"])),
        }
    }

    // ---- formulas ----

    pub(crate) fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.is_word("forall") || self.is_word("exists") {
            return self.quantified();
        }
        self.implies()
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let quantifier = if self.is_word("forall") {
            Quantifier::Forall
        } else {
            Quantifier::Exists
        };
        self.advance();
        let mut binders = Vec::new();
        loop {
            let var = self.ident()?;
            self.expect_word("in")?;
            let domain = self.ident()?;
            binders.push((var, domain));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Dot)?;
        let mut body = self.formula()?;
        for (var, domain) in binders.into_iter().rev() {
            body = Formula::Quantified {
                quantifier,
                var,
                domain,
                body: Box::new(body),
            };
        }
        Ok(body)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = if self.is_word("forall") || self.is_word("exists") {
                self.quantified()?
            } else {
                self.implies()?
            };
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.not()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.not()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.not()?));
        }
        if self.is_word("forall") || self.is_word("exists") {
            return self.quantified();
        }
        self.temporal()
    }

    fn temporal(&mut self) -> Result<Formula, ParseError> {
        for (word, ctor) in [
            ("G", Formula::globally as fn(Formula) -> Formula),
            ("F", Formula::eventually),
            ("X", Formula::next),
        ] {
            if self.is_word(word) {
                self.advance();
                return Ok(ctor(self.temporal_operand()?));
            }
        }
        self.until()
    }

    fn temporal_operand(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.not()?));
        }
        if self.is_word("forall") || self.is_word("exists") {
            return self.quantified();
        }
        self.temporal()
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.comparison()?;
        if self.is_word("U") {
            self.advance();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::LParen => {
                self.advance();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                return Ok(f);
            }
            Tok::At => {
                self.advance();
                return Ok(Formula::Procedure(self.ident()?));
            }
            _ => {}
        }
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Eq => CompareOp::Eq,
            Tok::Ne => CompareOp::Ne,
            Tok::Lt => CompareOp::Lt,
            Tok::Le => CompareOp::Le,
            Tok::Gt => CompareOp::Gt,
            Tok::Ge => CompareOp::Ge,
            _ => return Ok(Formula::Atom(lhs)),
        };
        self.advance();
        let rhs = self.term()?;
        Ok(Formula::Compare { op, lhs, rhs })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut term = match self.peek().clone() {
            Tok::Number(n) => {
                self.advance();
                Term::Constant(Constant::Number(n))
            }
            Tok::Str(s) => {
                self.advance();
                Term::Constant(Constant::Text(s))
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.advance();
                Term::Constant(Constant::Bool(w == "true"))
            }
            Tok::Ident(w) if !is_keyword(&w) => {
                self.advance();
                if self.eat(&Tok::LParen) {
                    let mut args = vec![self.term()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Term::Apply { name: w, args }
                } else {
                    Term::Variable(w)
                }
            }
            _ => {
                return Err(self.error(&[
                    "`(`",
                    "`!`",
                    "`@`",
                    "`forall`",
                    "`exists`",
                    "`G`",
                    "`F`",
                    "`X`",
                    "term",
                ]))
            }
        };
        while self.peek() == &Tok::Dot && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.advance();
            let field = self.ident()?;
            term = Term::field(term, field);
        }
        Ok(term)
    }

    // ---- documents ----

    fn document(&mut self) -> Result<SpecDocument, ParseError> {
        let mut doc = SpecDocument::default();
        let mut names = BTreeSet::new();
        loop {
            let span = self.span();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(w) if w == "domain" => {
                    self.advance();
                    let name = self.ident()?;
                    self.expect(Tok::Eq)?;
                    self.expect(Tok::LBrace)?;
                    let mut values = vec![self.number()?];
                    while self.eat(&Tok::Comma) {
                        values.push(self.number()?);
                    }
                    self.expect(Tok::RBrace)?;
                    self.expect(Tok::Semi)?;
                    if doc.domain(&name).is_some() {
                        return Err(self.error_at(span, format!("duplicate domain `{name}`")));
                    }
                    doc.domains.push(DomainDecl { name, values, span });
                }
                Tok::Ident(w) => {
                    let Some(kind) = EntityKind::from_keyword(&w) else {
                        return Err(self.error(&["entity kind", "`domain`"]));
                    };
                    self.advance();
                    let name = self.string()?;
                    if !names.insert(name.clone()) {
                        return Err(ParseError {
                            line: span.line,
                            col: span.col,
                            expected: vec![],
                            found: format!("duplicate entity `{name}`"),
                        });
                    }
                    let mut entity = EntitySpec::new(kind, name);
                    entity.span = span;
                    self.entity_body(&mut entity)?;
                    doc.entities.push(entity);
                }
                _ => return Err(self.error(&["entity kind", "`domain`"])),
            }
        }
        Ok(doc)
    }

    fn entity_body(&mut self, e: &mut EntitySpec) -> Result<(), ParseError> {
        self.expect(Tok::LBrace)?;
        let mut seen: BTreeSet<String> = BTreeSet::new();
        while !self.eat(&Tok::RBrace) {
            let span = self.span();
            let key = match self.peek().clone() {
                Tok::Ident(w) => w,
                _ => return Err(self.error(&["entry", "`}`"])),
            };
            self.advance();
            let key = if key == "init" || key == "fulfill" {
                self.expect(Tok::Dot)?;
                let slot = self.ident()?;
                format!("{key}.{slot}")
            } else {
                key
            };
            self.expect(Tok::Colon)?;
            let repeatable = matches!(key.as_str(), "numeric" | "boolean" | "class");
            if !repeatable && !seen.insert(key.clone()) {
                return Err(self.error_at(span, format!("duplicate entry `{key}`")));
            }
            match key.as_str() {
                "numeric" | "boolean" => {
                    let sort = if key == "numeric" {
                        Sort::Numeric
                    } else {
                        Sort::Boolean
                    };
                    loop {
                        let (name, indexed) = self.family_name()?;
                        e.attributes.push(AttributeDecl {
                            name,
                            sort,
                            class_name: None,
                            indexed,
                        });
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                "class" => loop {
                    let name = self.ident()?;
                    e.attributes.push(AttributeDecl::class(name));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                },
                "input" | "output" => {
                    let mut items = Vec::new();
                    loop {
                        let (name, indexed) = self.family_name()?;
                        items.push(if indexed { format!("{name}[i]") } else { name });
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    if key == "input" {
                        e.input = items;
                    } else {
                        e.output = items;
                    }
                }
                "from" => e.from_goal = Some(self.string()?),
                "tradeoff" => e.tradeoff_with = Some(self.string()?),
                "softgoal" => e.softgoal = Some(self.string()?),
                "utility" => e.utility = Some(self.ident()?),
                "affects" => {
                    let goal = self.string()?;
                    let kind = if self.is_word("FR") {
                        ViolationKind::Fr
                    } else if self.is_word("NFR") {
                        ViolationKind::Nfr
                    } else {
                        return Err(self.error(&["`FR`", "`NFR`"]));
                    };
                    self.advance();
                    e.affected_goal = Some(AffectedGoal { goal, kind });
                }
                "invariant" => e.invariant = Some(self.formula()?),
                "variant" => e.variant = Some(self.formula()?),
                "violation" => e.violation = Some(self.formula()?),
                other => {
                    let (phase, slot) = match other.split_once('.') {
                        Some((p, s)) => (p, s),
                        None => return Err(self.error_at(span, format!("unknown entry `{other}`"))),
                    };
                    let phase = match phase {
                        "init" => Phase::Initialization,
                        _ => Phase::Fulfillment,
                    };
                    let slot = match slot {
                        "pre" => Slot::Pre,
                        "trigger" => Slot::Trigger,
                        "post" => Slot::Post,
                        _ => {
                            return Err(self.error_at(
                                span,
                                format!("unknown condition slot `{other}`; expected pre, trigger or post"),
                            ))
                        }
                    };
                    let f = self.formula()?;
                    e.conditions.insert((phase, slot), f);
                }
            }
            self.expect(Tok::Semi)?;
        }
        Ok(())
    }

    /// `name` or `name[i]`.
    fn family_name(&mut self) -> Result<(String, bool), ParseError> {
        let name = self.ident()?;
        if self.eat(&Tok::LBracket) {
            self.expect_word("i")?;
            self.expect(Tok::RBracket)?;
            return Ok((name, true));
        }
        Ok((name, false))
    }
}
