//! Terms, formulas, signatures and the validated Horn-clause view.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algebra::Rational01;

/// Name of the distinguished binary similarity predicate, written infix.
pub const SIMILARITY: &str = "~=";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("symbol `{0}` declared twice")]
    Duplicate(String),
    #[error("undeclared function symbol `{0}`")]
    UndeclaredFunction(String),
    #[error("undeclared predicate symbol `{0}`")]
    UndeclaredPredicate(String),
    #[error("`{symbol}` expects {expected} argument(s), found {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` is reserved")]
    Reserved(String),
}

/// Function and predicate symbols with their arities. Arity-0 functions are
/// individual constants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    functions: BTreeMap<String, usize>,
    predicates: BTreeMap<String, usize>,
    similarity: bool,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        self.functions.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn add_predicate(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        self.predicates.insert(name.to_string(), arity);
        Ok(())
    }

    fn check_fresh(&self, name: &str) -> Result<(), SignatureError> {
        if name == SIMILARITY {
            return Err(SignatureError::Reserved(name.to_string()));
        }
        if self.functions.contains_key(name) || self.predicates.contains_key(name) {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        Ok(())
    }

    pub fn enable_similarity(&mut self) {
        self.similarity = true;
    }

    pub fn has_similarity(&self) -> bool {
        self.similarity
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    /// Arity of a predicate; the similarity symbol reports 2 when declared.
    pub fn predicate_arity(&self, name: &str) -> Option<usize> {
        if name == SIMILARITY {
            return self.similarity.then_some(2);
        }
        self.predicates.get(name).copied()
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.functions.iter().map(|(n, a)| (n.as_str(), *a))
    }

    /// Ordinary predicates, excluding the similarity symbol.
    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.predicates.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.functions
            .iter()
            .filter(|(_, a)| **a == 0)
            .map(|(n, _)| n.as_str())
    }

    /// Adds every symbol of `other`, failing on conflicting arities.
    pub fn merge(&mut self, other: &Signature) -> Result<(), SignatureError> {
        for (name, arity) in other.functions() {
            match self.function_arity(name) {
                Some(a) if a == arity => {}
                Some(a) => {
                    return Err(SignatureError::Arity {
                        symbol: name.to_string(),
                        expected: a,
                        found: arity,
                    })
                }
                None => self.add_function(name, arity)?,
            }
        }
        for (name, arity) in other.predicates() {
            match self.predicate_arity(name) {
                Some(a) if a == arity => {}
                Some(a) => {
                    return Err(SignatureError::Arity {
                        symbol: name.to_string(),
                        expected: a,
                        found: arity,
                    })
                }
                None => self.add_predicate(name, arity)?,
            }
        }
        if other.similarity {
            self.similarity = true;
        }
        Ok(())
    }

    pub fn check_term(&self, term: &Term) -> Result<(), SignatureError> {
        match term {
            Term::Var(_) => Ok(()),
            Term::App(f, args) => {
                let expected = self
                    .function_arity(f)
                    .ok_or_else(|| SignatureError::UndeclaredFunction(f.clone()))?;
                if expected != args.len() {
                    return Err(SignatureError::Arity {
                        symbol: f.clone(),
                        expected,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|t| self.check_term(t))
            }
        }
    }

    pub fn check_atom(&self, atom: &Atom) -> Result<(), SignatureError> {
        let expected = self
            .predicate_arity(&atom.predicate)
            .ok_or_else(|| SignatureError::UndeclaredPredicate(atom.predicate.clone()))?;
        if expected != atom.args.len() {
            return Err(SignatureError::Arity {
                symbol: atom.predicate.clone(),
                expected,
                found: atom.args.len(),
            });
        }
        atom.args.iter().try_for_each(|t| self.check_term(t))
    }

    pub fn check_formula(&self, formula: &Formula) -> Result<(), SignatureError> {
        let mut result = Ok(());
        formula.visit_atoms(&mut |atom| {
            if result.is_ok() {
                result = self.check_atom(atom);
            }
        });
        result
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A function symbol applied to its arguments; constants have none.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Self {
        Term::App(name.to_string(), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Self {
        Term::App(name.to_string(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Nesting depth of function applications; constants and variables are 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    pub fn vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars_into(out)),
        }
    }

    fn substitute(&self, sigma: &BTreeMap<String, Term>, bound: &BTreeSet<String>) -> Term {
        match self {
            Term::Var(x) if !bound.contains(x) => sigma.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Var(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(sigma, bound)).collect())
            }
        }
    }
}

/// Compact rendering, `F(a,G(x))`, with no whitespace so terms can double
/// as element names in structure files.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(name, args) if args.is_empty() => write!(f, "{name}"),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.to_string(),
            args,
        }
    }

    pub fn similarity(left: Term, right: Term) -> Self {
        Atom::new(SIMILARITY, vec![left, right])
    }

    pub fn is_similarity(&self) -> bool {
        self.predicate == SIMILARITY
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Constant(Rational01),
    Atom(Atom),
    Not(Box<Formula>),
    /// Strong (Łukasiewicz) conjunction, stored flat with two or more operands.
    StrongAnd(Vec<Formula>),
    /// Weak (min) conjunction, stored flat with two or more operands.
    WeakAnd(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: &str, args: Vec<Term>) -> Self {
        Formula::Atom(Atom::new(predicate, args))
    }

    pub fn constant(value: Rational01) -> Self {
        Formula::Constant(value)
    }

    /// The evaluated formula `(body, degree)`, i.e. `degree → body`.
    pub fn evaluated(body: Formula, degree: Rational01) -> Self {
        Formula::implies(Formula::Constant(degree), body)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Self {
        Formula::Iff(Box::new(lhs), Box::new(rhs))
    }

    pub fn forall(var: &str, body: Formula) -> Self {
        Formula::Forall(var.to_string(), Box::new(body))
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    /// Strong conjunction of `parts`; a single part is returned as is and the
    /// empty conjunction is `1̄`.
    pub fn strong_and(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::Constant(Rational01::one()),
            1 => parts.pop().unwrap(),
            _ => Formula::StrongAnd(parts),
        }
    }

    pub fn weak_and(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::Constant(Rational01::one()),
            1 => parts.pop().unwrap(),
            _ => Formula::WeakAnd(parts),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atom(_) | Formula::Constant(_))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Constant(_) | Formula::Atom(_) => Vec::new(),
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => vec![f],
            Formula::StrongAnd(fs) | Formula::WeakAnd(fs) => fs.iter().collect(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => vec![a, b],
        }
    }

    pub fn visit_atoms<'a>(&'a self, visit: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Atom(a) => visit(a),
            _ => self.children().into_iter().for_each(|c| c.visit_atoms(visit)),
        }
    }

    pub fn visit_constants<'a>(&'a self, visit: &mut impl FnMut(&'a Rational01)) {
        match self {
            Formula::Constant(r) => visit(r),
            _ => self.children().into_iter().for_each(|c| c.visit_constants(visit)),
        }
    }

    /// Subformula at a child-index path, as reported by [`NotHorn`].
    pub fn at_path(&self, path: &[usize]) -> Option<&Formula> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children().get(*i)?.at_path(rest),
        }
    }
}

/// Rank: 0 on atoms and truth constants, +1 for negation and each
/// quantifier, additive over binary connectives.
pub fn rank(formula: &Formula) -> usize {
    match formula {
        Formula::Constant(_) | Formula::Atom(_) => 0,
        Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => rank(f) + 1,
        Formula::Implies(a, b) | Formula::Iff(a, b) => rank(a) + rank(b),
        // An n-ary chain is n-1 nested binary conjunctions.
        Formula::StrongAnd(fs) | Formula::WeakAnd(fs) => fs.iter().map(rank).sum(),
    }
}

pub fn free_vars(formula: &Formula) -> BTreeSet<String> {
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match f {
            Formula::Atom(a) => {
                let mut vs = BTreeSet::new();
                a.args.iter().for_each(|t| t.vars_into(&mut vs));
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                bound.push(x.clone());
                go(body, bound, out);
                bound.pop();
            }
            _ => f.children().into_iter().for_each(|c| go(c, bound, out)),
        }
    }
    let mut out = BTreeSet::new();
    go(formula, &mut Vec::new(), &mut out);
    out
}

pub fn bound_vars(formula: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(f: &Formula, out: &mut BTreeSet<String>) {
        if let Formula::Forall(x, _) | Formula::Exists(x, _) = f {
            out.insert(x.clone());
        }
        f.children().into_iter().for_each(|c| go(c, out));
    }
    go(formula, &mut out);
    out
}

pub fn is_sentence(formula: &Formula) -> bool {
    free_vars(formula).is_empty()
}

/// Prefixes `∀` over the free variables, lexicographically smallest outermost.
pub fn universal_closure(formula: &Formula) -> Formula {
    free_vars(formula)
        .into_iter()
        .rev()
        .fold(formula.clone(), |acc, x| Formula::Forall(x, Box::new(acc)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstitutionError {
    #[error("variable `{0}` only occurs bound")]
    BoundVariable(String),
    #[error("term `{0}` substituted for `{1}` is not ground")]
    NonGround(String, String),
}

/// Simultaneous substitution of ground terms for free variables.
pub fn substitute(
    formula: &Formula,
    sigma: &BTreeMap<String, Term>,
) -> Result<Formula, SubstitutionError> {
    let free = free_vars(formula);
    let bound = bound_vars(formula);
    for (x, t) in sigma {
        if !t.is_ground() {
            return Err(SubstitutionError::NonGround(t.to_string(), x.clone()));
        }
        if !free.contains(x) && bound.contains(x) {
            return Err(SubstitutionError::BoundVariable(x.clone()));
        }
    }
    fn go(f: &Formula, sigma: &BTreeMap<String, Term>, bound: &mut BTreeSet<String>) -> Formula {
        match f {
            Formula::Constant(_) => f.clone(),
            Formula::Atom(a) => Formula::Atom(Atom {
                predicate: a.predicate.clone(),
                args: a.args.iter().map(|t| t.substitute(sigma, bound)).collect(),
            }),
            Formula::Not(g) => Formula::not(go(g, sigma, bound)),
            Formula::StrongAnd(gs) => Formula::StrongAnd(gs.iter().map(|g| go(g, sigma, bound)).collect()),
            Formula::WeakAnd(gs) => Formula::WeakAnd(gs.iter().map(|g| go(g, sigma, bound)).collect()),
            Formula::Implies(a, b) => Formula::implies(go(a, sigma, bound), go(b, sigma, bound)),
            Formula::Iff(a, b) => Formula::iff(go(a, sigma, bound), go(b, sigma, bound)),
            Formula::Forall(x, g) | Formula::Exists(x, g) => {
                let fresh = bound.insert(x.clone());
                let body = go(g, sigma, bound);
                if fresh {
                    bound.remove(x);
                }
                if matches!(f, Formula::Forall(..)) {
                    Formula::Forall(x.clone(), Box::new(body))
                } else {
                    Formula::Exists(x.clone(), Box::new(body))
                }
            }
        }
    }
    Ok(go(formula, sigma, &mut BTreeSet::new()))
}

/// An evaluated formula `(body, degree)`, standing for `degree → body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvaluatedFormula {
    pub body: Formula,
    pub degree: Rational01,
}

impl EvaluatedFormula {
    pub fn new(body: Formula, degree: Rational01) -> Self {
        EvaluatedFormula { body, degree }
    }

    pub fn atom(atom: Atom, degree: Rational01) -> Self {
        EvaluatedFormula::new(Formula::Atom(atom), degree)
    }

    /// Recognises `r̄ → φ` where `φ` mentions no truth constant besides `0̄`, `1̄`.
    pub fn view(formula: &Formula) -> Option<Self> {
        let Formula::Implies(lhs, body) = formula else {
            return None;
        };
        let Formula::Constant(degree) = lhs.as_ref() else {
            return None;
        };
        let mut clean = true;
        body.visit_constants(&mut |c| clean &= c.is_zero() || c.is_one());
        clean.then(|| EvaluatedFormula::new((**body).clone(), degree.clone()))
    }

    /// Atomic evaluated formulas have an atom (or `0̄`/`1̄`) as body.
    pub fn is_atomic(&self) -> bool {
        self.body.is_atomic()
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match &self.body {
            Formula::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn to_formula(&self) -> Formula {
        Formula::evaluated(self.body.clone(), self.degree.clone())
    }
}

/// `(α₁,r₁) & … & (αₙ,rₙ) → (β,s)`; with an empty body it is just `(β,s)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasicHorn {
    pub body: Vec<EvaluatedFormula>,
    pub head: EvaluatedFormula,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HornClause {
    pub prefix: Vec<String>,
    pub conjuncts: Vec<BasicHorn>,
    /// Built from `∧` instead of `&`.
    pub weak: bool,
}

impl BasicHorn {
    pub fn to_formula(&self, weak: bool) -> Formula {
        let head = self.head.to_formula();
        if self.body.is_empty() {
            return head;
        }
        let body: Vec<_> = self.body.iter().map(EvaluatedFormula::to_formula).collect();
        let body = if weak { Formula::weak_and(body) } else { Formula::strong_and(body) };
        Formula::implies(body, head)
    }
}

impl HornClause {
    pub fn to_formula(&self) -> Formula {
        let parts: Vec<_> = self.conjuncts.iter().map(|c| c.to_formula(self.weak)).collect();
        let matrix = if self.weak { Formula::weak_and(parts) } else { Formula::strong_and(parts) };
        self.prefix
            .iter()
            .rev()
            .fold(matrix, |acc, x| Formula::Forall(x.clone(), Box::new(acc)))
    }

    pub fn kind(&self) -> HornKind {
        match (self.prefix.is_empty(), self.conjuncts.len()) {
            (true, 1) => HornKind::Basic,
            (true, _) => HornKind::QuantifierFree,
            (false, _) => HornKind::Quantified,
        }
    }

    /// Free variables of the clause, i.e. those not bound by the prefix.
    pub fn free_vars(&self) -> BTreeSet<String> {
        free_vars(&self.to_formula())
    }

    /// Universal closure, keeping the existing prefix innermost.
    pub fn closed(&self) -> HornClause {
        let mut prefix: Vec<String> = self.free_vars().into_iter().collect();
        prefix.extend(self.prefix.iter().cloned());
        HornClause {
            prefix,
            conjuncts: self.conjuncts.clone(),
            weak: self.weak,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HornKind {
    /// A single basic Horn formula (including a lone evaluated atom).
    Basic,
    /// A conjunction of two or more basic Horn formulas, no quantifiers.
    QuantifierFree,
    /// A non-empty universal prefix over a quantifier-free Horn formula.
    Quantified,
}

impl fmt::Display for HornKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HornKind::Basic => "BasicHorn",
            HornKind::QuantifierFree => "QuantifierFreeHorn",
            HornKind::Quantified => "HornClause",
        })
    }
}

/// Why a formula is not a Horn clause, with the child-index path of the
/// first offending subformula.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a Horn clause at {}: {reason}", path_string(.path))]
pub struct NotHorn {
    pub path: Vec<usize>,
    pub reason: String,
}

fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Recognises basic, quantifier-free and quantified Horn clauses. In weak
/// mode `∧` takes the place of `&` throughout.
pub fn classify_horn(formula: &Formula, weak: bool) -> Result<(HornKind, HornClause), NotHorn> {
    let mut path = Vec::new();
    let mut prefix = Vec::new();
    let mut matrix = formula;
    while let Formula::Forall(x, body) = matrix {
        prefix.push(x.clone());
        path.push(0);
        matrix = body;
    }
    let mut conjuncts = Vec::new();
    let mut parts = Vec::new();
    flatten_conj(matrix, weak, &mut path, &mut parts);
    for (part_path, part) in parts {
        conjuncts.push(basic_horn(part, weak, part_path)?);
    }
    let clause = HornClause {
        prefix,
        conjuncts,
        weak,
    };
    Ok((clause.kind(), clause))
}

fn flatten_conj<'a>(
    f: &'a Formula,
    weak: bool,
    path: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, &'a Formula)>,
) {
    match (f, weak) {
        (Formula::StrongAnd(fs), false) | (Formula::WeakAnd(fs), true) => {
            for (i, g) in fs.iter().enumerate() {
                path.push(i);
                flatten_conj(g, weak, path, out);
                path.pop();
            }
        }
        _ => out.push((path.clone(), f)),
    }
}

fn basic_horn(f: &Formula, weak: bool, path: Vec<usize>) -> Result<BasicHorn, NotHorn> {
    if let Some(head) = evaluated_atom(f, &path)? {
        return Ok(BasicHorn {
            body: Vec::new(),
            head,
        });
    }
    let Formula::Implies(lhs, rhs) = f else {
        return Err(NotHorn {
            path,
            reason: "expected an evaluated atom or an implication between evaluated atoms".into(),
        });
    };
    let mut head_path = path.clone();
    head_path.push(1);
    let head = evaluated_atom(rhs, &head_path)?.ok_or_else(|| NotHorn {
        path: head_path.clone(),
        reason: "head must be an evaluated atom".into(),
    })?;
    let mut body_path = path;
    body_path.push(0);
    let mut parts = Vec::new();
    flatten_conj(lhs, weak, &mut body_path, &mut parts);
    let mut body = Vec::new();
    for (p, part) in parts {
        let e = evaluated_atom(part, &p)?.ok_or_else(|| NotHorn {
            path: p.clone(),
            reason: "body conjuncts must be evaluated atoms".into(),
        })?;
        body.push(e);
    }
    Ok(BasicHorn { body, head })
}

fn evaluated_atom(f: &Formula, path: &[usize]) -> Result<Option<EvaluatedFormula>, NotHorn> {
    let Formula::Implies(lhs, body) = f else {
        return Ok(None);
    };
    if !matches!(lhs.as_ref(), Formula::Constant(_)) {
        return Ok(None);
    }
    match EvaluatedFormula::view(f) {
        Some(e) if e.is_atomic() => Ok(Some(e)),
        Some(_) => Ok(None),
        None => {
            let mut p = path.to_vec();
            p.push(1);
            Err(NotHorn {
                path: p,
                reason: format!(
                    "evaluated body may only use the truth constants 0 and 1 (found {body:?})"
                ),
            })
        }
    }
}
