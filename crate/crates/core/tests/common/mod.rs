//! Seeded random theories, structures and formulas shared by the
//! integration tests.

#![allow(dead_code)]

use fuzzy_horn::algebra::Rational01;
use fuzzy_horn::semantics::FiniteStructure;
use fuzzy_horn::syntax::{Atom, BasicHorn, EvaluatedFormula, Formula, HornClause, Signature, Term, SIMILARITY};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn r(s: &str) -> Rational01 {
    s.parse().unwrap()
}

/// Shape of a random Horn theory.
#[derive(Debug, Clone)]
pub struct TheoryShape {
    pub constants: usize,
    /// Arity of each predicate `P0`, `P1`, …
    pub predicates: Vec<usize>,
    pub similarity: bool,
    /// Adds a unary function `F`.
    pub function: bool,
    pub max_clauses: usize,
    /// Degrees are `k/d` with `d` drawn from these.
    pub denominators: Vec<u64>,
    /// Prefix and free variables drawn from here.
    pub variables: Vec<&'static str>,
}

impl TheoryShape {
    /// Function-free theories: at most 4 predicates, 3 constants, 6 clauses,
    /// denominators up to 12.
    pub fn function_free(rng: &mut ChaCha8Rng) -> Self {
        let n_preds = rng.gen_range(1..=4);
        TheoryShape {
            constants: rng.gen_range(1..=3),
            predicates: (0..n_preds).map(|_| rng.gen_range(0..=2)).collect(),
            similarity: rng.gen_bool(0.5),
            function: false,
            max_clauses: 6,
            denominators: (1..=12).collect(),
            variables: vec!["x", "y"],
        }
    }

    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for c in 0..self.constants {
            sig.add_function(&constant_name(c), 0).unwrap();
        }
        if self.function {
            sig.add_function("F", 1).unwrap();
        }
        for (i, &a) in self.predicates.iter().enumerate() {
            sig.add_predicate(&format!("P{i}"), a).unwrap();
        }
        if self.similarity {
            sig.enable_similarity();
        }
        sig
    }
}

pub fn constant_name(i: usize) -> String {
    ["a", "b", "c", "d"][i].to_string()
}

pub fn degree(rng: &mut ChaCha8Rng, denominators: &[u64]) -> Rational01 {
    let d = *denominators.choose(rng).unwrap();
    // Bias away from 0, which makes clauses trivial.
    let k = rng.gen_range(1..=d);
    Rational01::from_grid(k, d).unwrap()
}

fn term(rng: &mut ChaCha8Rng, shape: &TheoryShape, vars: &[&str]) -> Term {
    let base = if !vars.is_empty() && rng.gen_bool(0.5) {
        Term::var(vars.choose(rng).unwrap())
    } else {
        Term::constant(&constant_name(rng.gen_range(0..shape.constants)))
    };
    if shape.function && rng.gen_bool(0.3) {
        Term::app("F", vec![base])
    } else {
        base
    }
}

fn atom(rng: &mut ChaCha8Rng, shape: &TheoryShape, vars: &[&str]) -> Atom {
    if shape.similarity && (shape.predicates.is_empty() || rng.gen_bool(0.25)) {
        return Atom::similarity(term(rng, shape, vars), term(rng, shape, vars));
    }
    let p = rng.gen_range(0..shape.predicates.len());
    let args = (0..shape.predicates[p]).map(|_| term(rng, shape, vars)).collect();
    Atom::new(&format!("P{p}"), args)
}

/// A random Horn clause: optional universal prefix over one or two basic
/// Horn conjuncts with up to two body atoms.
pub fn horn_clause(rng: &mut ChaCha8Rng, shape: &TheoryShape) -> HornClause {
    let prefix: Vec<String> = shape
        .variables
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .map(|v| v.to_string())
        .collect();
    let vars: Vec<&str> = if rng.gen_bool(0.1) {
        shape.variables.clone()
    } else {
        prefix.iter().map(String::as_str).collect()
    };
    let conjuncts = (0..rng.gen_range(1..=2))
        .map(|_| {
            let body = (0..rng.gen_range(0..=2))
                .map(|_| EvaluatedFormula::atom(atom(rng, shape, &vars), degree(rng, &shape.denominators)))
                .collect();
            let head = EvaluatedFormula::atom(atom(rng, shape, &vars), degree(rng, &shape.denominators));
            BasicHorn { body, head }
        })
        .collect();
    HornClause {
        prefix,
        conjuncts,
        weak: false,
    }
}

pub fn horn_theory(rng: &mut ChaCha8Rng, shape: &TheoryShape) -> Vec<Formula> {
    (0..rng.gen_range(1..=shape.max_clauses))
        .map(|_| horn_clause(rng, shape).to_formula())
        .collect()
}

/// Random formula over unary `P`, binary `R`, constants `a`, `b` and the
/// given variables, with every connective and both quantifiers.
pub fn formula(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> Formula {
    let pick_term = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.7) {
            Term::var(vars.choose(rng).unwrap())
        } else {
            Term::constant(["a", "b"].choose(rng).unwrap())
        }
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => Formula::constant(degree(rng, &[2, 3, 4, 5, 10])),
            1 | 2 => Formula::atom("P", vec![pick_term(rng)]),
            _ => Formula::atom("R", vec![pick_term(rng), pick_term(rng)]),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| formula(rng, vars, depth - 1);
    match rng.gen_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::strong_and(vec![sub(rng), sub(rng)]),
        2 => Formula::weak_and(vec![sub(rng), sub(rng)]),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::iff(sub(rng), sub(rng)),
        5 => Formula::evaluated(sub(rng), degree(rng, &[2, 3, 4, 5, 10])),
        6 => Formula::forall(vars.choose(rng).unwrap(), sub(rng)),
        _ => Formula::exists(vars.choose(rng).unwrap(), sub(rng)),
    }
}

/// Random structure for [`formula`]'s signature with `size` elements.
pub fn structure(rng: &mut ChaCha8Rng, size: usize) -> FiniteStructure {
    let mut sig = Signature::new();
    sig.add_function("a", 0).unwrap();
    sig.add_function("b", 0).unwrap();
    sig.add_predicate("P", 1).unwrap();
    sig.add_predicate("R", 2).unwrap();
    let domain = (0..size).map(|i| format!("e{i}")).collect();
    let mut s = FiniteStructure::new(domain, sig).unwrap();
    s.set_function("a", &[], rng.gen_range(0..size));
    s.set_function("b", &[], rng.gen_range(0..size));
    for e in 0..size {
        s.set_predicate("P", &[e], degree_or_zero(rng));
        for f in 0..size {
            s.set_predicate("R", &[e, f], degree_or_zero(rng));
        }
    }
    s
}

fn degree_or_zero(rng: &mut ChaCha8Rng) -> Rational01 {
    if rng.gen_bool(0.15) {
        Rational01::zero()
    } else {
        degree(rng, &[2, 3, 4, 5, 6, 10, 12])
    }
}

pub fn is_similarity(a: &Atom) -> bool {
    a.predicate == SIMILARITY
}
