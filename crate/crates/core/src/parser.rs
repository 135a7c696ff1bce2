//! Concrete syntax for formulas, theory files and structure files, and the
//! canonical printer.
//!
//! Formula grammar, loosest binding first:
//!
//! ```text
//! formula  := 'forall' VAR+ '.' formula | 'exists' VAR+ '.' formula | iff
//! iff      := implies ('<->' implies)?
//! implies  := conj ('->' implies)?
//! conj     := unary ('&' unary)* | unary ('/\' unary)*
//! unary    := '~' unary | 'forall' … | 'exists' … | primary
//! primary  := '(' formula (',' DEGREE)? ')' | DEGREE | PRED ('(' terms ')')? | term '~=' term
//! ```
//!
//! `(φ, r)` is the evaluated formula `r → φ`. Degrees are decimals or
//! fractions and are read exactly. Mixing `&` and `/\` in one chain needs
//! parentheses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algebra::Rational01;
use crate::syntax::{Atom, Formula, Signature, SignatureError, Term, SIMILARITY};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    StrongAnd,
    WeakAnd,
    Arrow,
    Iff,
    Not,
    Sim,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::StrongAnd => f.write_str("`&`"),
            Tok::WeakAnd => f.write_str("`/\\`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Iff => f.write_str("`<->`"),
            Tok::Not => f.write_str("`~`"),
            Tok::Sim => f.write_str("`~=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str, line: usize, column0: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = column0 + i;
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line, column });
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if rest.starts_with("<->") {
            push(&mut out, Tok::Iff);
            i += 3;
        } else if rest.starts_with("->") {
            push(&mut out, Tok::Arrow);
            i += 2;
        } else if rest.starts_with("/\\") {
            push(&mut out, Tok::WeakAnd);
            i += 2;
        } else if rest.starts_with("~=") {
            push(&mut out, Tok::Sim);
            i += 2;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && (chars[i] == '.' || chars[i] == '/') && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            push(&mut out, Tok::Number(chars[start..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
        } else {
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '&' => Tok::StrongAnd,
                '~' => Tok::Not,
                _ => return Err(ParseError::new(line, column, format!("unexpected character `{c}`"))),
            };
            push(&mut out, tok);
            i += 1;
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: column0 + chars.len(),
    });
    Ok(out)
}

struct FormulaParser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    sig: &'a Signature,
}

impl<'a> FormulaParser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::new(t.line, t.column, message)
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {tok}, found {}", self.peek())))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Ident(k) if k == "forall" || k == "exists" => self.quantified(),
            _ => self.iff(),
        }
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let Tok::Ident(keyword) = self.next().tok else {
            unreachable!()
        };
        let mut vars = Vec::new();
        while let Tok::Ident(name) = self.peek().clone() {
            if self.sig.function_arity(&name).is_some() || self.sig.predicate_arity(&name).is_some() {
                return Err(self.error_here(format!("cannot bind declared symbol `{name}`")));
            }
            vars.push(name);
            self.next();
        }
        if vars.is_empty() {
            return Err(self.error_here("expected a variable after quantifier"));
        }
        self.expect(Tok::Dot)?;
        let body = self.formula()?;
        Ok(vars.into_iter().rev().fold(body, |acc, x| {
            if keyword == "forall" {
                Formula::forall(&x, acc)
            } else {
                Formula::exists(&x, acc)
            }
        }))
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implies()?;
        if *self.peek() == Tok::Iff {
            self.next();
            let rhs = self.implies()?;
            if *self.peek() == Tok::Iff {
                return Err(self.error_here("chained `<->` needs parentheses"));
            }
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.conj()?;
        if *self.peek() == Tok::Arrow {
            self.next();
            let rhs = match self.peek() {
                Tok::Ident(k) if k == "forall" || k == "exists" => self.quantified()?,
                _ => self.implies()?,
            };
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let first = self.unary()?;
        let op = self.peek().clone();
        if op != Tok::StrongAnd && op != Tok::WeakAnd {
            return Ok(first);
        }
        let mut parts = vec![first];
        while matches!(self.peek(), Tok::StrongAnd | Tok::WeakAnd) {
            if *self.peek() != op {
                return Err(self.error_here("mixing `&` and `/\\` needs parentheses"));
            }
            self.next();
            parts.push(self.unary()?);
        }
        Ok(if op == Tok::StrongAnd {
            Formula::StrongAnd(parts)
        } else {
            Formula::WeakAnd(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.next();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(k) if k == "forall" || k == "exists" => self.quantified(),
            _ => self.primary(),
        }
    }

    fn degree(&mut self) -> Result<Rational01, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Number(s) => s
                .parse()
                .map_err(|e| ParseError::new(t.line, t.column, format!("{e}"))),
            other => Err(ParseError::new(t.line, t.column, format!("expected a degree, found {other}"))),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let inner = self.formula()?;
                if *self.peek() == Tok::Comma {
                    self.next();
                    let degree = self.degree()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Formula::evaluated(inner, degree));
                }
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Number(_) => Ok(Formula::Constant(self.degree()?)),
            Tok::Ident(name) if self.sig.predicate_arity(&name).is_some() => {
                let at = self.next();
                let args = if *self.peek() == Tok::LParen {
                    self.args()?
                } else {
                    Vec::new()
                };
                let atom = Atom::new(&name, args);
                self.sig
                    .check_atom(&atom)
                    .map_err(|e| ParseError::new(at.line, at.column, e.to_string()))?;
                Ok(Formula::Atom(atom))
            }
            Tok::Ident(_) => {
                let left = self.term()?;
                if *self.peek() != Tok::Sim {
                    return Err(self.error_here(format!(
                        "expected `~=` after term `{left}`, found {}",
                        self.peek()
                    )));
                }
                if !self.sig.has_similarity() {
                    return Err(self.error_here("`~=` used but `sim` is not declared"));
                }
                self.next();
                let right = self.term()?;
                Ok(Formula::Atom(Atom::similarity(left, right)))
            }
            other => Err(self.error_here(format!("unexpected {other}"))),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.next();
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                Tok::RParen => {
                    self.next();
                    return Ok(args);
                }
                other => return Err(self.error_here(format!("expected `,` or `)`, found {other}"))),
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.next();
        let Tok::Ident(name) = &t.tok else {
            return Err(ParseError::new(t.line, t.column, format!("expected a term, found {}", t.tok)));
        };
        match self.sig.function_arity(name) {
            Some(arity) => {
                let args = if *self.peek() == Tok::LParen {
                    self.args()?
                } else {
                    Vec::new()
                };
                if args.len() != arity {
                    let e = SignatureError::Arity {
                        symbol: name.clone(),
                        expected: arity,
                        found: args.len(),
                    };
                    return Err(ParseError::new(t.line, t.column, e.to_string()));
                }
                Ok(Term::App(name.clone(), args))
            }
            None if self.sig.predicate_arity(name).is_some() => Err(ParseError::new(
                t.line,
                t.column,
                format!("predicate `{name}` used as a term"),
            )),
            None if *self.peek() == Tok::LParen => Err(ParseError::new(
                t.line,
                t.column,
                format!("undeclared symbol `{name}`"),
            )),
            None => Ok(Term::Var(name.clone())),
        }
    }
}

fn parse_formula_at(text: &str, sig: &Signature, line: usize, column: usize) -> Result<Formula, ParseError> {
    let toks = lex(text, line, column)?;
    let mut p = FormulaParser { toks, pos: 0, sig };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!("unexpected {} after formula", p.peek())));
    }
    Ok(f)
}

/// Parses a single formula against `sig`. Identifiers that are not declared
/// function or predicate symbols are variables.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    parse_formula_at(text, sig, 1, 1)
}

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Constant(_) | Formula::Atom(_) => 5,
        Formula::Implies(lhs, _) if matches!(**lhs, Formula::Constant(_)) => 5,
        Formula::Not(_) => 4,
        Formula::StrongAnd(_) | Formula::WeakAnd(_) => 3,
        Formula::Implies(..) => 2,
        Formula::Iff(..) => 1,
        Formula::Forall(..) | Formula::Exists(..) => 0,
    }
}

fn write_formula(out: &mut String, f: &Formula, min: u8) {
    if prec(f) < min {
        out.push('(');
        write_formula(out, f, 0);
        out.push(')');
        return;
    }
    match f {
        Formula::Constant(r) => out.push_str(&r.to_string()),
        Formula::Atom(a) if a.is_similarity() && a.args.len() == 2 => {
            out.push_str(&format!("{} ~= {}", a.args[0], a.args[1]));
        }
        Formula::Atom(a) => {
            out.push_str(&a.predicate);
            if !a.args.is_empty() {
                let args: Vec<_> = a.args.iter().map(Term::to_string).collect();
                out.push_str(&format!("({})", args.join(",")));
            }
        }
        Formula::Not(g) => {
            out.push('~');
            write_formula(out, g, 4);
        }
        Formula::StrongAnd(gs) | Formula::WeakAnd(gs) => {
            let sep = if matches!(f, Formula::StrongAnd(_)) { " & " } else { " /\\ " };
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_formula(out, g, 4);
            }
        }
        Formula::Implies(lhs, body) => {
            if let Formula::Constant(r) = lhs.as_ref() {
                out.push('(');
                write_formula(out, body, 0);
                out.push_str(&format!(", {r})"));
            } else {
                write_formula(out, lhs, 3);
                out.push_str(" -> ");
                write_formula(out, body, 2);
            }
        }
        Formula::Iff(a, b) => {
            write_formula(out, a, 2);
            out.push_str(" <-> ");
            write_formula(out, b, 2);
        }
        Formula::Forall(x, g) | Formula::Exists(x, g) => {
            out.push_str(if matches!(f, Formula::Forall(..)) { "forall " } else { "exists " });
            out.push_str(x);
            out.push_str(". ");
            write_formula(out, g, 0);
        }
    }
}

/// Canonical text of a formula; [`parse_formula`] inverts it.
pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, 0);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedFormula {
    pub name: String,
    pub formula: Formula,
    pub line: usize,
}

/// A signature together with the formulas of a theory, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TheoryFile {
    pub signature: Signature,
    pub formulas: Vec<NamedFormula>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

/// Offset of the first non-blank character after a leading keyword.
fn after_keyword<'a>(line: &'a str, keyword: &str) -> Option<(&'a str, usize)> {
    let trimmed = line.trim_start();
    let lead = line.len() - trimmed.len();
    let rest = trimmed.strip_prefix(keyword)?;
    if !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
        return None;
    }
    let body = rest.trim_start();
    Some((body, lead + keyword.len() + (rest.len() - body.len())))
}

fn parse_decl(body: &str, line: usize, column: usize) -> Result<(String, usize), ParseError> {
    let (name, arity) = body
        .trim()
        .split_once('/')
        .ok_or_else(|| ParseError::new(line, column, "expected NAME/ARITY"))?;
    let name = name.trim();
    if !is_identifier(name) {
        return Err(ParseError::new(line, column, format!("invalid symbol name `{name}`")));
    }
    let arity = arity
        .trim()
        .parse()
        .map_err(|_| ParseError::new(line, column, format!("invalid arity `{}`", arity.trim())))?;
    Ok((name.to_string(), arity))
}

/// Reads a theory file: `func NAME/ARITY`, `pred NAME/ARITY`, `sim`, and
/// `clause [NAME:] FORMULA`, one per line, `#` comments. Declarations may
/// appear anywhere in the file.
pub fn parse_theory(text: &str) -> Result<TheoryFile, ParseError> {
    let mut sig = Signature::new();
    let mut clauses = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let col = |c: usize| c + 1;
        if let Some((body, c)) = after_keyword(line, "func") {
            let (name, arity) = parse_decl(body, line_no, col(c))?;
            sig.add_function(&name, arity)
                .map_err(|e| ParseError::new(line_no, col(c), e.to_string()))?;
        } else if let Some((body, c)) = after_keyword(line, "pred") {
            let (name, arity) = parse_decl(body, line_no, col(c))?;
            sig.add_predicate(&name, arity)
                .map_err(|e| ParseError::new(line_no, col(c), e.to_string()))?;
        } else if let Some((body, c)) = after_keyword(line, "sim") {
            if !body.trim().is_empty() {
                return Err(ParseError::new(line_no, col(c), "`sim` takes no arguments"));
            }
            sig.enable_similarity();
        } else if let Some((body, c)) = after_keyword(line, "clause") {
            clauses.push((line_no, body, col(c)));
        } else {
            let c = line.len() - line.trim_start().len();
            return Err(ParseError::new(line_no, col(c), "expected `func`, `pred`, `sim` or `clause`"));
        }
    }
    let mut formulas = Vec::new();
    let mut names = BTreeSet::new();
    for (i, (line_no, body, column)) in clauses.into_iter().enumerate() {
        let (name, text, column) = match body.split_once(':') {
            Some((label, rest)) if is_identifier(label.trim()) => {
                let skip = body.len() - rest.len();
                (label.trim().to_string(), rest, column + skip)
            }
            _ => (format!("c{}", i + 1), body, column),
        };
        if !names.insert(name.clone()) {
            return Err(ParseError::new(line_no, column, format!("duplicate clause name `{name}`")));
        }
        let formula = parse_formula_at(text, &sig, line_no, column)?;
        formulas.push(NamedFormula {
            name,
            formula,
            line: line_no,
        });
    }
    Ok(TheoryFile {
        signature: sig,
        formulas,
    })
}

fn write_signature(out: &mut String, sig: &Signature) {
    for (name, arity) in sig.functions() {
        out.push_str(&format!("func {name}/{arity}\n"));
    }
    for (name, arity) in sig.predicates() {
        out.push_str(&format!("pred {name}/{arity}\n"));
    }
    if sig.has_similarity() {
        out.push_str("sim\n");
    }
}

pub fn print_theory(theory: &TheoryFile) -> String {
    let mut out = String::new();
    write_signature(&mut out, &theory.signature);
    for f in &theory.formulas {
        out.push_str(&format!("clause {}: {}\n", f.name, print_formula(&f.formula)));
    }
    out
}

/// Raw contents of a structure file, keyed by element names.
///
/// Predicate tuples not listed have degree 0. When `sim` is declared, the
/// similarity table instead defaults to crisp identity (1 on the diagonal,
/// 0 elsewhere); listed `~=` entries override it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructureFile {
    pub domain: Vec<String>,
    pub signature: Signature,
    pub functions: BTreeMap<String, BTreeMap<Vec<String>, String>>,
    pub predicates: BTreeMap<String, BTreeMap<Vec<String>, Rational01>>,
}

/// Splits `(e1,F(e2),e3)` at top-level commas. Returns the elements and the
/// remainder after the closing parenthesis.
fn split_tuple(text: &str) -> Option<(Vec<String>, &str)> {
    let text = text.trim_start();
    let inner = text.strip_prefix('(')?;
    let mut depth = 0usize;
    let mut items = Vec::new();
    let mut current = String::new();
    for (i, c) in inner.char_indices() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' if depth == 0 => {
                let cur = current.trim();
                if !cur.is_empty() {
                    items.push(cur.to_string());
                } else if !items.is_empty() {
                    return None;
                }
                return Some((items, &inner[i + 1..]));
            }
            ')' => {
                depth -= 1;
                current.push(c);
            }
            ',' if depth == 0 => {
                let cur = current.trim();
                if cur.is_empty() {
                    return None;
                }
                items.push(cur.to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    None
}

/// Reads a structure file:
///
/// ```text
/// domain a b
/// func F/1                 # optional declarations, as in theory files
/// pred Q/2
/// sim
/// func F: (a) -> b         # one line per tuple; tables must be total
/// pred P: (a) = 0.4        # omitted tuples have degree 0
/// pred ~=: (a,b) = 9/10
/// ```
///
/// `class …` and `degree …` lines, as written by the solver, are skipped.
pub fn parse_structure(text: &str) -> Result<StructureFile, ParseError> {
    let mut file = StructureFile::default();
    let mut elements = BTreeSet::new();
    let mut domain_line = None;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let lead = line.len() - line.trim_start().len() + 1;
        if let Some((body, c)) = after_keyword(line, "domain") {
            if domain_line.is_some() {
                return Err(ParseError::new(line_no, lead, "domain declared twice"));
            }
            domain_line = Some(line_no);
            for e in body.split_whitespace() {
                if !elements.insert(e.to_string()) {
                    return Err(ParseError::new(line_no, c + 1, format!("duplicate element `{e}`")));
                }
                file.domain.push(e.to_string());
            }
        } else if after_keyword(line, "class").is_some() || after_keyword(line, "degree").is_some() {
            continue;
        } else if let Some((body, c)) = after_keyword(line, "sim") {
            if !body.trim().is_empty() {
                return Err(ParseError::new(line_no, c + 1, "`sim` takes no arguments"));
            }
            file.signature.enable_similarity();
        } else if let Some((body, c)) = after_keyword(line, "func").or_else(|| after_keyword(line, "pred")) {
            let is_func = line.trim_start().starts_with("func");
            match body.split_once(':') {
                None => {
                    let (name, arity) = parse_decl(body, line_no, c + 1)?;
                    declare(&mut file.signature, is_func, &name, arity, line_no, c + 1)?;
                }
                Some((name, rest)) => {
                    let name = name.trim().to_string();
                    let column = c + 1 + body.len() - rest.len();
                    entries.push((line_no, column, is_func, name, rest.to_string()));
                }
            }
        } else {
            return Err(ParseError::new(
                line_no,
                lead,
                "expected `domain`, `func`, `pred`, `sim`, `class` or `degree`",
            ));
        }
    }
    if file.domain.is_empty() {
        return Err(ParseError::new(domain_line.unwrap_or(1), 1, "domain must be non-empty"));
    }
    for (line_no, column, is_func, name, rest) in entries {
        let err = |m: String| ParseError::new(line_no, column, m);
        let (tuple, tail) = split_tuple(&rest).ok_or_else(|| err("expected a tuple `(e1,…)`".into()))?;
        for e in &tuple {
            if !elements.contains(e) {
                return Err(err(format!("`{e}` is not a domain element")));
            }
        }
        let tail = tail.trim();
        if is_func {
            let value = tail
                .strip_prefix("->")
                .map(str::trim)
                .ok_or_else(|| err("expected `-> ELEMENT`".into()))?;
            if !elements.contains(value) {
                return Err(err(format!("`{value}` is not a domain element")));
            }
            ensure_arity(&mut file.signature, true, &name, tuple.len(), line_no, column)?;
            let table = file.functions.entry(name.clone()).or_default();
            if table.insert(tuple, value.to_string()).is_some() {
                return Err(err(format!("duplicate entry for `{name}`")));
            }
        } else {
            let value = tail
                .strip_prefix('=')
                .map(str::trim)
                .ok_or_else(|| err("expected `= DEGREE`".into()))?;
            let degree: Rational01 = value.parse().map_err(|e| err(format!("{e}")))?;
            if name == SIMILARITY {
                if tuple.len() != 2 {
                    return Err(err("`~=` is binary".into()));
                }
                file.signature.enable_similarity();
            } else {
                ensure_arity(&mut file.signature, false, &name, tuple.len(), line_no, column)?;
            }
            let table = file.predicates.entry(name.clone()).or_default();
            if table.insert(tuple, degree).is_some() {
                return Err(err(format!("duplicate entry for `{name}`")));
            }
        }
    }
    let n = file.domain.len();
    for (name, arity) in file.signature.functions() {
        let have = file.functions.get(name).map_or(0, BTreeMap::len);
        let need = n.pow(arity as u32);
        if have != need {
            return Err(ParseError::new(
                domain_line.unwrap_or(1),
                1,
                format!("function `{name}` is not total: {have} of {need} tuples given"),
            ));
        }
    }
    Ok(file)
}

fn declare(sig: &mut Signature, is_func: bool, name: &str, arity: usize, line: usize, column: usize) -> Result<(), ParseError> {
    let r = if is_func { sig.add_function(name, arity) } else { sig.add_predicate(name, arity) };
    r.map_err(|e| ParseError::new(line, column, e.to_string()))
}

fn ensure_arity(sig: &mut Signature, is_func: bool, name: &str, arity: usize, line: usize, column: usize) -> Result<(), ParseError> {
    let existing = if is_func { sig.function_arity(name) } else { sig.predicate_arity(name) };
    match existing {
        Some(a) if a == arity => Ok(()),
        Some(a) => Err(ParseError::new(
            line,
            column,
            SignatureError::Arity {
                symbol: name.to_string(),
                expected: a,
                found: arity,
            }
            .to_string(),
        )),
        None => {
            if !is_identifier(name) {
                return Err(ParseError::new(line, column, format!("invalid symbol name `{name}`")));
            }
            declare(sig, is_func, name, arity, line, column)
        }
    }
}

pub fn print_structure(file: &StructureFile) -> String {
    let mut out = format!("domain {}\n", file.domain.join(" "));
    write_signature(&mut out, &file.signature);
    for (name, table) in &file.functions {
        for (args, value) in table {
            out.push_str(&format!("func {name}: ({}) -> {value}\n", args.join(",")));
        }
    }
    for (name, table) in &file.predicates {
        for (args, value) in table {
            out.push_str(&format!("pred {name}: ({}) = {value}\n", args.join(",")));
        }
    }
    out
}
