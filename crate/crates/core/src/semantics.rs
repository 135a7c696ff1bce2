//! Finite structures over the standard Łukasiewicz algebra and the truth
//! values of formulas in them.
//!
//! Domains are finite, so the infimum and supremum in the quantifier clauses
//! are attained and computed as a minimum and maximum.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::algebra::Rational01;
use crate::parser::StructureFile;
use crate::syntax::{free_vars, Atom, Formula, Signature, Term, SIMILARITY};

/// Assignment of domain elements (by index) to variables.
pub type Valuation = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound by the valuation")]
    UnboundVariable(String),
    #[error("structure does not interpret function `{0}`")]
    UnknownFunction(String),
    #[error("structure does not interpret predicate `{0}`")]
    UnknownPredicate(String),
    #[error("`{symbol}` applied to {found} argument(s), expected {expected}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("domain must be non-empty")]
    EmptyDomain,
    #[error("duplicate domain element `{0}`")]
    DuplicateElement(String),
    #[error("unknown domain element `{0}`")]
    UnknownElement(String),
    #[error("function `{0}` is not interpreted")]
    MissingFunction(String),
    #[error("table for `{0}` is not total")]
    Partial(String),
    #[error("`{symbol}` has arity {found} in the structure but {expected} in the signature")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct FunctionTable {
    arity: usize,
    values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PredicateTable {
    arity: usize,
    values: Vec<Rational01>,
}

/// A finite domain with total function tables and `[0,1]`-valued predicate
/// tables. When the signature declares similarity, its table is stored
/// under [`SIMILARITY`] like any other binary predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    domain: Vec<String>,
    index: HashMap<String, usize>,
    signature: Signature,
    functions: BTreeMap<String, FunctionTable>,
    predicates: BTreeMap<String, PredicateTable>,
}

fn table_len(n: usize, arity: usize) -> usize {
    n.pow(arity as u32)
}

/// All `arity`-tuples over `0..n` in lexicographic order.
pub fn tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = table_len(n, arity);
    (0..total).map(move |mut k| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = k % n;
            k /= n;
        }
        t
    })
}

impl FiniteStructure {
    /// A structure with every function mapping to the first element, every
    /// predicate at degree 0 and similarity (if declared) as crisp identity.
    pub fn new(domain: Vec<String>, signature: Signature) -> Result<Self, StructureError> {
        if domain.is_empty() {
            return Err(StructureError::EmptyDomain);
        }
        let mut index = HashMap::new();
        for (i, e) in domain.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(StructureError::DuplicateElement(e.clone()));
            }
        }
        let n = domain.len();
        let functions = signature
            .functions()
            .map(|(f, arity)| {
                let table = FunctionTable {
                    arity,
                    values: vec![0; table_len(n, arity)],
                };
                (f.to_string(), table)
            })
            .collect();
        let mut predicates: BTreeMap<String, PredicateTable> = signature
            .predicates()
            .map(|(p, arity)| {
                let table = PredicateTable {
                    arity,
                    values: vec![Rational01::zero(); table_len(n, arity)],
                };
                (p.to_string(), table)
            })
            .collect();
        if signature.has_similarity() {
            let mut values = vec![Rational01::zero(); n * n];
            for i in 0..n {
                values[i * n + i] = Rational01::one();
            }
            predicates.insert(SIMILARITY.to_string(), PredicateTable { arity: 2, values });
        }
        Ok(FiniteStructure {
            domain,
            index,
            signature,
            functions,
            predicates,
        })
    }

    pub fn from_file(file: &StructureFile) -> Result<Self, StructureError> {
        let mut s = FiniteStructure::new(file.domain.clone(), file.signature.clone())?;
        let resolve = |s: &FiniteStructure, names: &[String]| -> Result<Vec<usize>, StructureError> {
            names
                .iter()
                .map(|e| s.element(e).ok_or_else(|| StructureError::UnknownElement(e.clone())))
                .collect()
        };
        for (f, table) in &file.functions {
            if table.len() != table_len(s.size(), s.signature.function_arity(f).unwrap_or(0)) {
                return Err(StructureError::Partial(f.clone()));
            }
            for (args, value) in table {
                let args = resolve(&s, args)?;
                let value = s.element(value).ok_or_else(|| StructureError::UnknownElement(value.clone()))?;
                s.set_function(f, &args, value);
            }
        }
        for (p, table) in &file.predicates {
            for (args, value) in table {
                let args = resolve(&s, args)?;
                s.set_predicate(p, &args, value.clone());
            }
        }
        Ok(s)
    }

    /// Structure-file form. Zero predicate entries are omitted, as are
    /// similarity entries that agree with crisp identity.
    pub fn to_file(&self) -> StructureFile {
        let mut file = StructureFile {
            domain: self.domain.clone(),
            signature: self.signature.clone(),
            ..Default::default()
        };
        let names = |t: &[usize]| t.iter().map(|&i| self.domain[i].clone()).collect::<Vec<_>>();
        for (f, table) in &self.functions {
            let entries = file.functions.entry(f.clone()).or_default();
            for (k, args) in tuples(self.size(), table.arity).enumerate() {
                entries.insert(names(&args), self.domain[table.values[k]].clone());
            }
        }
        for (p, table) in &self.predicates {
            let sim = p == SIMILARITY;
            for (k, args) in tuples(self.size(), table.arity).enumerate() {
                let v = &table.values[k];
                let default_one = sim && args[0] == args[1];
                if (default_one && !v.is_one()) || (!default_one && !v.is_zero()) {
                    file.predicates
                        .entry(p.clone())
                        .or_default()
                        .insert(names(&args), v.clone());
                }
            }
        }
        file
    }

    /// Reinterprets the structure over `sig`: predicates the structure does
    /// not mention get all-zero tables, similarity defaults to identity, and
    /// every function symbol of `sig` must already be interpreted.
    pub fn conform(&self, sig: &Signature) -> Result<Self, StructureError> {
        let mut merged = self.signature.clone();
        for (f, arity) in sig.functions() {
            match self.signature.function_arity(f) {
                None => return Err(StructureError::MissingFunction(f.to_string())),
                Some(a) if a != arity => {
                    return Err(StructureError::Arity {
                        symbol: f.to_string(),
                        expected: arity,
                        found: a,
                    })
                }
                _ => {}
            }
        }
        for (p, arity) in sig.predicates() {
            match self.signature.predicate_arity(p) {
                None => merged.add_predicate(p, arity).expect("fresh predicate"),
                Some(a) if a != arity => {
                    return Err(StructureError::Arity {
                        symbol: p.to_string(),
                        expected: arity,
                        found: a,
                    })
                }
                _ => {}
            }
        }
        if sig.has_similarity() {
            merged.enable_similarity();
        }
        let mut out = FiniteStructure::new(self.domain.clone(), merged)?;
        out.functions.extend(self.functions.clone());
        out.predicates.extend(self.predicates.clone());
        Ok(out)
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn element(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn offset(&self, args: &[usize]) -> usize {
        let n = self.size();
        args.iter().fold(0, |acc, &a| acc * n + a)
    }

    /// Overwrites one function table entry.
    ///
    /// Panics if the symbol is not part of the signature or the arity is wrong.
    pub fn set_function(&mut self, name: &str, args: &[usize], value: usize) {
        let k = self.offset(args);
        let table = self.functions.get_mut(name).expect("declared function");
        assert_eq!(table.arity, args.len(), "arity of `{name}`");
        table.values[k] = value;
    }

    /// Overwrites one predicate table entry (including similarity).
    ///
    /// Panics if the symbol is not part of the signature or the arity is wrong.
    pub fn set_predicate(&mut self, name: &str, args: &[usize], value: Rational01) {
        let k = self.offset(args);
        let table = self.predicates.get_mut(name).expect("declared predicate");
        assert_eq!(table.arity, args.len(), "arity of `{name}`");
        table.values[k] = value;
    }

    pub fn function_value(&self, name: &str, args: &[usize]) -> Result<usize, EvalError> {
        let table = self
            .functions
            .get(name)
            .ok_or_else(|| EvalError::UnknownFunction(name.to_string()))?;
        if table.arity != args.len() {
            return Err(EvalError::Arity {
                symbol: name.to_string(),
                expected: table.arity,
                found: args.len(),
            });
        }
        Ok(table.values[self.offset(args)])
    }

    pub fn predicate_degree(&self, name: &str, args: &[usize]) -> Result<&Rational01, EvalError> {
        let table = self
            .predicates
            .get(name)
            .ok_or_else(|| EvalError::UnknownPredicate(name.to_string()))?;
        if table.arity != args.len() {
            return Err(EvalError::Arity {
                symbol: name.to_string(),
                expected: table.arity,
                found: args.len(),
            });
        }
        Ok(&table.values[self.offset(args)])
    }

    /// Similarity degree of two elements; crisp identity when undeclared.
    pub fn similarity(&self, a: usize, b: usize) -> Rational01 {
        match self.predicates.get(SIMILARITY) {
            Some(t) => t.values[a * self.size() + b].clone(),
            None if a == b => Rational01::one(),
            None => Rational01::zero(),
        }
    }

    fn valuation_names(&self, v: &Valuation) -> BTreeMap<String, String> {
        v.iter().map(|(x, &e)| (x.clone(), self.domain[e].clone())).collect()
    }
}

pub fn eval_term(s: &FiniteStructure, v: &Valuation, t: &Term) -> Result<usize, EvalError> {
    match t {
        Term::Var(x) => v.get(x).copied().ok_or_else(|| EvalError::UnboundVariable(x.clone())),
        Term::App(f, args) => {
            let args = args
                .iter()
                .map(|a| eval_term(s, v, a))
                .collect::<Result<Vec<_>, _>>()?;
            s.function_value(f, &args)
        }
    }
}

fn eval_atom(s: &FiniteStructure, v: &Valuation, a: &Atom) -> Result<Rational01, EvalError> {
    let args = a
        .args
        .iter()
        .map(|t| eval_term(s, v, t))
        .collect::<Result<Vec<_>, _>>()?;
    s.predicate_degree(&a.predicate, &args).cloned()
}

/// Truth value of `f` under `v`.
pub fn eval_formula(s: &FiniteStructure, v: &Valuation, f: &Formula) -> Result<Rational01, EvalError> {
    let mut v = v.clone();
    eval_in(s, &mut v, f)
}

fn eval_in(s: &FiniteStructure, v: &mut Valuation, f: &Formula) -> Result<Rational01, EvalError> {
    Ok(match f {
        Formula::Constant(r) => r.clone(),
        Formula::Atom(a) => eval_atom(s, v, a)?,
        Formula::Not(g) => eval_in(s, v, g)?.negation(),
        Formula::StrongAnd(gs) => {
            let mut acc = Rational01::one();
            for g in gs {
                acc = acc.strong_conj(&eval_in(s, v, g)?);
            }
            acc
        }
        Formula::WeakAnd(gs) => {
            let mut acc = Rational01::one();
            for g in gs {
                acc = acc.weak_conj(&eval_in(s, v, g)?);
            }
            acc
        }
        Formula::Implies(a, b) => eval_in(s, v, a)?.implication(&eval_in(s, v, b)?),
        Formula::Iff(a, b) => eval_in(s, v, a)?.biimplication(&eval_in(s, v, b)?),
        Formula::Forall(x, g) | Formula::Exists(x, g) => {
            let universal = matches!(f, Formula::Forall(..));
            let saved = v.get(x).copied();
            let mut best: Option<Rational01> = None;
            for e in 0..s.size() {
                v.insert(x.clone(), e);
                let val = eval_in(s, v, g);
                let val = match val {
                    Ok(val) => val,
                    Err(err) => {
                        restore(v, x, saved);
                        return Err(err);
                    }
                };
                best = Some(match best {
                    None => val,
                    Some(b) if universal => b.weak_conj(&val),
                    Some(b) => b.weak_disj(&val),
                });
                // Bounds are reached; the rest of the domain cannot change it.
                let settled = best.as_ref().is_some_and(|b| if universal { b.is_zero() } else { b.is_one() });
                if settled {
                    break;
                }
            }
            restore(v, x, saved);
            best.expect("non-empty domain")
        }
    })
}

fn restore(v: &mut Valuation, x: &str, saved: Option<usize>) {
    match saved {
        Some(e) => v.insert(x.to_string(), e),
        None => v.remove(x),
    };
}

/// Minimum of the value of `f` over all valuations of its free variables,
/// together with a valuation attaining it.
pub fn truth_value_with_witness(s: &FiniteStructure, f: &Formula) -> Result<(Rational01, Valuation), EvalError> {
    let vars: Vec<String> = free_vars(f).into_iter().collect();
    let mut best: Option<(Rational01, Valuation)> = None;
    for assignment in tuples(s.size(), vars.len()) {
        let mut v: Valuation = vars.iter().cloned().zip(assignment).collect();
        let val = eval_in(s, &mut v, f)?;
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            let done = val.is_zero();
            best = Some((val, v));
            if done {
                break;
            }
        }
    }
    Ok(best.expect("non-empty domain"))
}

/// `‖f‖` in `s`: the infimum over every valuation. Equals the plain value
/// for sentences.
pub fn truth_value(s: &FiniteStructure, f: &Formula) -> Result<Rational01, EvalError> {
    truth_value_with_witness(s, f).map(|(v, _)| v)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelReport {
    pub values: Vec<Rational01>,
}

impl ModelReport {
    pub fn holds(&self) -> bool {
        self.values.iter().all(Rational01::is_one)
    }

    /// Index of the first formula whose value is below 1.
    pub fn first_failure(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_one())
    }
}

/// Truth value of every formula of `theory` in `s`; a model makes them all 1.
pub fn is_model<'a, I>(s: &FiniteStructure, theory: I) -> Result<ModelReport, EvalError>
where
    I: IntoIterator<Item = &'a Formula>,
{
    let values = theory
        .into_iter()
        .map(|f| truth_value(s, f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ModelReport { values })
}

/// The similarity axioms for `sig`: reflexivity, symmetry, transitivity,
/// and congruence for every function and (ordinary) predicate symbol. The
/// congruence of `~=` with itself follows from symmetry and transitivity.
pub fn similarity_axioms(sig: &Signature) -> Vec<(String, Formula)> {
    let sim = |a: &str, b: &str| Formula::Atom(Atom::similarity(Term::var(a), Term::var(b)));
    let close = |vars: &[String], body: Formula| {
        vars.iter()
            .rev()
            .fold(body, |acc, x| Formula::Forall(x.clone(), Box::new(acc)))
    };
    let mut out = vec![
        ("S1".to_string(), Formula::forall("x", sim("x", "x"))),
        (
            "S2".to_string(),
            Formula::forall("x", Formula::forall("y", Formula::implies(sim("x", "y"), sim("y", "x")))),
        ),
        (
            "S3".to_string(),
            Formula::forall(
                "x",
                Formula::forall(
                    "y",
                    Formula::forall(
                        "z",
                        Formula::implies(Formula::strong_and(vec![sim("x", "y"), sim("y", "z")]), sim("x", "z")),
                    ),
                ),
            ),
        ),
    ];
    let vars = |prefix: &str, n: usize| (1..=n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    let premise = |xs: &[String], ys: &[String]| {
        Formula::strong_and(xs.iter().zip(ys).map(|(x, y)| sim(x, y)).collect())
    };
    let terms = |xs: &[String]| xs.iter().map(|x| Term::var(x)).collect::<Vec<_>>();
    for (f, n) in sig.functions() {
        if n == 0 {
            continue;
        }
        let (xs, ys) = (vars("x", n), vars("y", n));
        let body = Formula::implies(
            premise(&xs, &ys),
            Formula::Atom(Atom::similarity(Term::app(f, terms(&xs)), Term::app(f, terms(&ys)))),
        );
        out.push((format!("C1[{f}]"), close(&[xs, ys].concat(), body)));
    }
    for (p, n) in sig.predicates() {
        if n == 0 {
            continue;
        }
        let (xs, ys) = (vars("x", n), vars("y", n));
        let body = Formula::implies(
            premise(&xs, &ys),
            Formula::iff(Formula::atom(p, terms(&xs)), Formula::atom(p, terms(&ys))),
        );
        out.push((format!("C2[{p}]"), close(&[xs, ys].concat(), body)));
    }
    out
}

/// A similarity axiom with value below 1, with an instance attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{axiom} fails with value {value} at {}", fmt_assignment(.instance))]
pub struct AxiomViolation {
    pub axiom: String,
    pub value: Rational01,
    pub instance: BTreeMap<String, String>,
}

fn fmt_assignment(v: &BTreeMap<String, String>) -> String {
    let parts: Vec<_> = v.iter().map(|(x, e)| format!("{x}={e}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Evaluates every similarity axiom; without a declared similarity the
/// identity is assumed and the check passes.
pub fn check_similarity_axioms(s: &FiniteStructure) -> Result<(), AxiomViolation> {
    if !s.signature().has_similarity() {
        return Ok(());
    }
    for (axiom, formula) in similarity_axioms(s.signature()) {
        let (value, instance) = quantifier_free_witness(s, &formula);
        if !value.is_one() {
            return Err(AxiomViolation {
                axiom,
                value,
                instance: s.valuation_names(&instance),
            });
        }
    }
    Ok(())
}

/// Strips the universal prefix and minimises the matrix over the prefix
/// variables, which for a sentence `∀x̄ φ` equals its value.
fn quantifier_free_witness(s: &FiniteStructure, f: &Formula) -> (Rational01, Valuation) {
    let mut matrix = f;
    while let Formula::Forall(_, body) = matrix {
        matrix = body;
    }
    truth_value_with_witness(s, matrix).expect("axioms only use declared symbols")
}

/// Equality property: similarity degree 1 holds exactly on the diagonal.
pub fn is_reduced(s: &FiniteStructure) -> bool {
    (0..s.size()).all(|a| (0..s.size()).all(|b| s.similarity(a, b).is_one() == (a == b)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomomorphismViolation {
    #[error("map covers {found} element(s) but the source has {expected}")]
    NotTotal { expected: usize, found: usize },
    #[error("image element {0} is outside the target domain")]
    OutOfRange(usize),
    #[error("target lacks symbol `{0}` or uses another arity")]
    Signature(String),
    #[error("function condition fails for {symbol}({})", .args.join(","))]
    Function { symbol: String, args: Vec<String> },
    #[error("degree-1 atom {symbol}({}) is not preserved", .args.join(","))]
    Predicate { symbol: String, args: Vec<String> },
}

/// Checks `g(F(d̄)) = F(g(d̄))` for every function symbol and that every
/// atom of degree 1 (similarity included) is sent to an atom of degree 1.
pub fn check_homomorphism(g: &[usize], from: &FiniteStructure, to: &FiniteStructure) -> Result<(), HomomorphismViolation> {
    if g.len() != from.size() {
        return Err(HomomorphismViolation::NotTotal {
            expected: from.size(),
            found: g.len(),
        });
    }
    if let Some(&bad) = g.iter().find(|&&e| e >= to.size()) {
        return Err(HomomorphismViolation::OutOfRange(bad));
    }
    let names = |t: &[usize]| t.iter().map(|&i| from.domain[i].clone()).collect::<Vec<_>>();
    for (f, table) in &from.functions {
        if to.signature.function_arity(f) != Some(table.arity) {
            return Err(HomomorphismViolation::Signature(f.clone()));
        }
        for (k, args) in tuples(from.size(), table.arity).enumerate() {
            let image: Vec<usize> = args.iter().map(|&a| g[a]).collect();
            if g[table.values[k]] != to.function_value(f, &image).expect("checked arity") {
                return Err(HomomorphismViolation::Function {
                    symbol: f.clone(),
                    args: names(&args),
                });
            }
        }
    }
    for (p, table) in &from.predicates {
        for (k, args) in tuples(from.size(), table.arity).enumerate() {
            if !table.values[k].is_one() {
                continue;
            }
            let image: Vec<usize> = args.iter().map(|&a| g[a]).collect();
            let preserved = if p == SIMILARITY {
                to.similarity(image[0], image[1]).is_one()
            } else {
                match to.predicate_degree(p, &image) {
                    Ok(v) => v.is_one(),
                    Err(_) => return Err(HomomorphismViolation::Signature(p.clone())),
                }
            };
            if !preserved {
                return Err(HomomorphismViolation::Predicate {
                    symbol: p.clone(),
                    args: names(&args),
                });
            }
        }
    }
    Ok(())
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::print_structure(&self.to_file()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_structure};

    fn r(s: &str) -> Rational01 {
        s.parse().unwrap()
    }

    pub(crate) fn counterexample() -> FiniteStructure {
        let text = "domain a b\npred P: (a) = 0.4\npred P: (b) = 0.7\npred R: (a) = 0.7\npred R: (b) = 0.4\n";
        FiniteStructure::from_file(&parse_structure(text).unwrap()).unwrap()
    }

    fn value(s: &FiniteStructure, text: &str) -> Rational01 {
        truth_value(s, &parse_formula(text, s.signature()).unwrap()).unwrap()
    }

    #[test]
    fn strong_conjunction_does_not_distribute() {
        let m = counterexample();
        assert_eq!(value(&m, "forall x. (P(x),1) & (R(x),1)"), r("1/10"));
        assert_eq!(value(&m, "(forall x. (P(x),1)) & (forall x. (R(x),1))"), Rational01::zero());
        assert_eq!(value(&m, "forall x. (P(x),1) /\\ (R(x),1)"), r("0.4"));
        assert_eq!(value(&m, "(forall x. (P(x),1)) /\\ (forall x. (R(x),1))"), r("0.4"));
        assert_eq!(value(&m, "0.3"), r("0.3"));
        assert_eq!(value(&m, "exists x. P(x)"), r("0.7"));
        // x = a: 0.6 vs 0.7; x = b: 0.3 vs 0.4.
        assert_eq!(value(&m, "forall x. ~P(x) <-> R(x)"), r("0.9"));
    }

    #[test]
    fn terms_evaluate_through_tables() {
        let text = "domain a b\nfunc c: () -> b\nfunc F: (a,a) -> b\nfunc F: (a,b) -> a\nfunc F: (b,a) -> a\nfunc F: (b,b) -> b\n";
        let s = FiniteStructure::from_file(&parse_structure(text).unwrap()).unwrap();
        let v = Valuation::from([("x".to_string(), 0)]);
        assert_eq!(eval_term(&s, &v, &Term::var("x")), Ok(0));
        assert_eq!(eval_term(&s, &v, &Term::constant("c")), Ok(1));
        // Table oracle: F(c, x) = F(b, a) = a; F(F(x,x), c) = F(b, b) = b.
        let t1 = Term::app("F", vec![Term::constant("c"), Term::var("x")]);
        let t2 = Term::app("F", vec![Term::app("F", vec![Term::var("x"), Term::var("x")]), Term::constant("c")]);
        assert_eq!(eval_term(&s, &v, &t1), Ok(0));
        assert_eq!(eval_term(&s, &v, &t2), Ok(1));
        assert_eq!(
            eval_term(&s, &Valuation::new(), &Term::var("y")),
            Err(EvalError::UnboundVariable("y".into()))
        );
    }

    #[test]
    fn open_formulas_take_the_global_infimum() {
        let m = counterexample();
        assert_eq!(value(&m, "P(x)"), r("0.4"));
        // Brute force over the four valuations of (x, y).
        let f = parse_formula("P(x) -> R(y)", m.signature()).unwrap();
        let mut brute = Rational01::one();
        for x in 0..2 {
            for y in 0..2 {
                let v = Valuation::from([("x".to_string(), x), ("y".to_string(), y)]);
                brute = brute.min(eval_formula(&m, &v, &f).unwrap());
            }
        }
        assert_eq!(truth_value(&m, &f).unwrap(), brute);
        assert_eq!(brute, r("0.7"));
        assert!(matches!(
            eval_formula(&m, &Valuation::new(), &f),
            Err(EvalError::UnboundVariable(_))
        ));
    }

    #[test]
    fn sentences_ignore_the_valuation() {
        let m = counterexample();
        let f = parse_formula("forall x. (P(x),1) & (R(x),1)", m.signature()).unwrap();
        for e in 0..2 {
            let v = Valuation::from([("x".to_string(), e), ("z".to_string(), 1 - e)]);
            assert_eq!(eval_formula(&m, &v, &f).unwrap(), r("0.1"));
        }
    }

    #[test]
    fn model_checks() {
        let m = counterexample();
        assert!(is_model(&m, &[]).unwrap().holds());
        let holds = parse_formula("forall x. (P(x),0.4)", m.signature()).unwrap();
        assert!(is_model(&m, [&holds]).unwrap().holds());
        let fails = parse_formula("forall x. (P(x),0.5)", m.signature()).unwrap();
        let report = is_model(&m, [&holds, &fails]).unwrap();
        assert!(!report.holds());
        assert_eq!(report.first_failure(), Some(1));
        assert_eq!(report.values[1], r("0.9"));
    }

    fn with_sim(extra: &str) -> FiniteStructure {
        let text = format!("domain a b\nsim\npred P/1\n{extra}");
        FiniteStructure::from_file(&parse_structure(&text).unwrap()).unwrap()
    }

    #[test]
    fn similarity_axioms_hold_for_identity() {
        let s = with_sim("func F: (a) -> b\nfunc F: (b) -> a\npred P: (a) = 1");
        assert_eq!(check_similarity_axioms(&s), Ok(()));
        assert!(is_reduced(&s));
    }

    #[test]
    fn congruence_violation_is_reported() {
        let s = with_sim("pred ~=: (a,b) = 0.8\npred ~=: (b,a) = 0.8\npred P: (a) = 1\npred P: (b) = 0.1");
        let err = check_similarity_axioms(&s).unwrap_err();
        assert_eq!(err.axiom, "C2[P]");
        // Instance a ~= b with P(a) = 1, P(b) = 0.1: 0.8 → (1 ↔ 0.1) = 0.8 → 0.1 = 0.3.
        assert_eq!(err.value, r("0.3"));
        assert_eq!(err.instance["x1"], "a");
        assert_eq!(err.instance["y1"], "b");
    }

    #[test]
    fn symmetry_violation_is_reported() {
        let s = with_sim("pred ~=: (a,b) = 0.5");
        assert_eq!(check_similarity_axioms(&s).unwrap_err().axiom, "S2");
    }

    #[test]
    fn reducedness() {
        assert!(is_reduced(&with_sim("pred ~=: (a,b) = 0.9\npred ~=: (b,a) = 0.9")));
        assert!(!is_reduced(&with_sim("pred ~=: (a,b) = 1\npred ~=: (b,a) = 1")));
        assert!(is_reduced(&counterexample()));
    }

    #[test]
    fn homomorphisms() {
        let s = with_sim("func F: (a) -> b\nfunc F: (b) -> a\npred P: (a) = 1\npred P: (b) = 0.9");
        assert_eq!(check_homomorphism(&[0, 1], &s, &s), Ok(()));
        // Collapsing a and b breaks F: g(F(a)) = a but F(g(a)) = F(a) = b.
        assert!(matches!(
            check_homomorphism(&[0, 0], &s, &s),
            Err(HomomorphismViolation::Function { .. })
        ));
        // Swapping sends P(a) = 1 to P(b) = 0.9.
        let t = with_sim("func F: (a) -> a\nfunc F: (b) -> b\npred P: (a) = 1\npred P: (b) = 0.9");
        assert_eq!(
            check_homomorphism(&[1, 0], &t, &t),
            Err(HomomorphismViolation::Predicate {
                symbol: "P".into(),
                args: vec!["a".into()]
            })
        );
        assert!(matches!(check_homomorphism(&[0], &t, &t), Err(HomomorphismViolation::NotTotal { .. })));
    }

    #[test]
    fn conform_fills_missing_predicates() {
        let m = counterexample();
        let mut sig = m.signature().clone();
        sig.add_predicate("Q", 2).unwrap();
        sig.enable_similarity();
        let c = m.conform(&sig).unwrap();
        assert_eq!(c.predicate_degree("Q", &[0, 1]).unwrap(), &Rational01::zero());
        assert!(c.similarity(1, 1).is_one());
        assert_eq!(c.predicate_degree("P", &[1]).unwrap(), &r("0.7"));
        let mut needs_fn = sig.clone();
        needs_fn.add_function("c", 0).unwrap();
        assert_eq!(m.conform(&needs_fn), Err(StructureError::MissingFunction("c".into())));
    }

    #[test]
    fn file_round_trip() {
        let s = with_sim("func F: (a) -> b\nfunc F: (b) -> a\npred P: (a) = 1/3\npred ~=: (a,b) = 1/2\npred ~=: (b,a) = 1/2");
        let again = FiniteStructure::from_file(&parse_structure(&s.to_string()).unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn tuple_enumeration() {
        assert_eq!(tuples(2, 2).collect::<Vec<_>>(), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(tuples(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
    }
}
