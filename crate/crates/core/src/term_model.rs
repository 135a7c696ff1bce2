//! Term structures of Horn theories.
//!
//! A theory is grounded over a depth-bounded Herbrand universe, atom degrees
//! are computed as the least fixpoint of the Horn rules together with the
//! similarity rules, and the universe is quotiented by degree-1 similarity.
//!
//! For a ground rule `(α₁,r₁) & … & (αₙ,rₙ) → (β,s)` the clause has value 1
//! exactly when `s ⊗ ⊗ᵢ (rᵢ → deg αᵢ) ≤ deg β` (residuation), which is the
//! bound the fixpoint enforces.
//!
//! Compositions that would leave the universe are saturated: `F(t̄)` is sent
//! to the first argument of maximal depth. Grounding, the congruence rule
//! and the quotient all use the saturated composition, so the quotient is
//! an ordinary finite structure in which every clause and similarity axiom
//! can be evaluated.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::algebra::Rational01;
use crate::semantics::{
    check_similarity_axioms, eval_term, is_model, is_reduced, tuples, AxiomViolation, EvalError, FiniteStructure,
    HomomorphismViolation, StructureError, Valuation,
};
use crate::syntax::{
    classify_horn, free_vars, Atom, BasicHorn, EvaluatedFormula, Formula, HornClause, NotHorn, Signature, Term,
    SIMILARITY,
};

pub const DEFAULT_DEPTH: usize = 2;

const MAX_TERMS: usize = 20_000;
const MAX_TABLE: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("signature has no constants to build ground terms from")]
    NoConstants,
    #[error("{0} is too large")]
    TooLarge(String),
    #[error("generator `{0}` clashes with a declared symbol or another generator")]
    GeneratorClash(String),
    #[error("variable `{0}` is neither assigned nor a generator")]
    Unbound(String),
    #[error("unknown function symbol `{0}`")]
    UnknownFunction(String),
}

#[derive(Debug, Clone)]
struct Composition {
    arity: usize,
    values: Vec<usize>,
    overflow: Vec<bool>,
}

/// Ground terms of depth at most `depth`, enumerated by depth, then function
/// name, then argument tuple. Generator variables sit at depth 0 after the
/// constants and behave like fresh constants.
#[derive(Debug, Clone)]
pub struct HerbrandUniverse {
    signature: Signature,
    depth: usize,
    terms: Vec<Term>,
    depths: Vec<usize>,
    index: HashMap<Term, usize>,
    compositions: BTreeMap<String, Composition>,
}

fn checked_table(n: usize, arity: usize, what: &str) -> Result<usize, UniverseError> {
    n.checked_pow(arity as u32)
        .filter(|&len| len <= MAX_TABLE)
        .ok_or_else(|| UniverseError::TooLarge(format!("table for `{what}`")))
}

pub fn build_universe(sig: &Signature, depth: usize, generators: &[String]) -> Result<HerbrandUniverse, UniverseError> {
    let mut terms: Vec<Term> = sig.constants().map(Term::constant).collect();
    for g in generators {
        let clash = sig.function_arity(g).is_some()
            || sig.predicate_arity(g).is_some()
            || terms.contains(&Term::var(g));
        if clash {
            return Err(UniverseError::GeneratorClash(g.clone()));
        }
        terms.push(Term::var(g));
    }
    if terms.is_empty() {
        return Err(UniverseError::NoConstants);
    }
    let mut depths = vec![0; terms.len()];
    for level in 1..=depth {
        let existing = terms.len();
        for (f, arity) in sig.functions().filter(|(_, a)| *a > 0) {
            checked_table(existing, arity, f)?;
            for args in tuples(existing, arity) {
                if !args.iter().any(|&a| depths[a] == level - 1) {
                    continue;
                }
                terms.push(Term::app(f, args.iter().map(|&a| terms[a].clone()).collect()));
                depths.push(level);
                if terms.len() > MAX_TERMS {
                    return Err(UniverseError::TooLarge(format!("universe at depth {depth}")));
                }
            }
        }
    }
    let index: HashMap<Term, usize> = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let n = terms.len();
    let mut compositions = BTreeMap::new();
    for (f, arity) in sig.functions() {
        let len = checked_table(n, arity, f)?;
        let mut values = Vec::with_capacity(len);
        let mut overflow = Vec::with_capacity(len);
        for args in tuples(n, arity) {
            let term = Term::app(f, args.iter().map(|&a| terms[a].clone()).collect());
            match index.get(&term) {
                Some(&i) => {
                    values.push(i);
                    overflow.push(false);
                }
                None => {
                    let deepest = args.iter().map(|&a| depths[a]).max().expect("overflow needs arguments");
                    values.push(*args.iter().find(|&&a| depths[a] == deepest).expect("maximum exists"));
                    overflow.push(true);
                }
            }
        }
        compositions.insert(f.to_string(), Composition { arity, values, overflow });
    }
    Ok(HerbrandUniverse {
        signature: sig.clone(),
        depth,
        terms,
        depths,
        index,
        compositions,
    })
}

impl HerbrandUniverse {
    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> &Term {
        &self.terms[i]
    }

    pub fn term_depth(&self, i: usize) -> usize {
        self.depths[i]
    }

    pub fn index_of(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    fn offset(&self, args: &[usize]) -> usize {
        args.iter().fold(0, |acc, &a| acc * self.len() + a)
    }

    /// Saturated composition `F(args)`.
    ///
    /// Panics if `f` is not a function symbol of the universe's signature.
    pub fn apply(&self, f: &str, args: &[usize]) -> usize {
        let c = &self.compositions[f];
        debug_assert_eq!(c.arity, args.len());
        c.values[self.offset(args)]
    }

    /// Whether `F(args)` lies beyond the depth bound.
    pub fn overflows(&self, f: &str, args: &[usize]) -> bool {
        self.compositions[f].overflow[self.offset(args)]
    }

    /// Value of `t` with variables looked up in `assignment`, falling back to
    /// generators.
    pub fn eval(&self, t: &Term, assignment: &BTreeMap<String, usize>) -> Result<usize, UniverseError> {
        match t {
            Term::Var(x) => assignment
                .get(x)
                .copied()
                .or_else(|| self.index_of(t))
                .ok_or_else(|| UniverseError::Unbound(x.clone())),
            Term::App(f, args) => {
                if !self.compositions.contains_key(f) {
                    return Err(UniverseError::UnknownFunction(f.clone()));
                }
                let args = args
                    .iter()
                    .map(|a| self.eval(a, assignment))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(self.apply(f, &args))
            }
        }
    }

    /// The Herbrand structure on the universe with all predicates at 0 and
    /// similarity as crisp identity.
    pub fn structure(&self) -> FiniteStructure {
        let domain = self.terms.iter().map(Term::to_string).collect();
        let mut s = FiniteStructure::new(domain, self.signature.clone()).expect("universe is non-empty");
        for (f, c) in &self.compositions {
            for (k, args) in tuples(self.len(), c.arity).enumerate() {
                s.set_function(f, &args, c.values[k]);
            }
        }
        s
    }

    pub fn display_atom(&self, atom: &GroundAtom) -> String {
        let args: Vec<String> = atom.args.iter().map(|&a| self.terms[a].to_string()).collect();
        if atom.predicate == SIMILARITY {
            format!("{} {SIMILARITY} {}", args[0], args[1])
        } else if args.is_empty() {
            atom.predicate.clone()
        } else {
            format!("{}({})", atom.predicate, args.join(","))
        }
    }
}

/// A predicate (possibly similarity) applied to universe elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<usize>,
}

impl GroundAtom {
    pub fn new(predicate: &str, args: Vec<usize>) -> Self {
        GroundAtom {
            predicate: predicate.to_string(),
            args,
        }
    }

    pub fn is_similarity(&self) -> bool {
        self.predicate == SIMILARITY
    }
}

/// Degrees of ground atoms. Atoms that are absent have degree 0.
pub type DegreeMap = BTreeMap<GroundAtom, Rational01>;

#[derive(Debug, Clone)]
struct Block {
    predicate: String,
    arity: usize,
    offset: usize,
}

/// Dense numbering of every ground atom over a universe: ordinary
/// predicates in name order, then similarity.
#[derive(Debug, Clone)]
pub struct AtomBase {
    n: usize,
    blocks: Vec<Block>,
    by_name: HashMap<String, usize>,
    similarity: Option<usize>,
    len: usize,
}

impl AtomBase {
    pub fn new(u: &HerbrandUniverse) -> Result<Self, UniverseError> {
        let n = u.len();
        let mut preds: Vec<(String, usize)> = u.signature().predicates().map(|(p, a)| (p.to_string(), a)).collect();
        preds.retain(|(p, _)| p != SIMILARITY);
        if u.signature().has_similarity() {
            preds.push((SIMILARITY.to_string(), 2));
        }
        let mut blocks = Vec::new();
        let mut by_name = HashMap::new();
        let mut similarity = None;
        let mut len = 0usize;
        for (p, arity) in preds {
            let size = checked_table(n, arity, &p)?;
            if p == SIMILARITY {
                similarity = Some(blocks.len());
            }
            by_name.insert(p.clone(), blocks.len());
            blocks.push(Block {
                predicate: p,
                arity,
                offset: len,
            });
            len = len
                .checked_add(size)
                .filter(|&l| l <= MAX_TABLE)
                .ok_or_else(|| UniverseError::TooLarge("atom base".into()))?;
        }
        Ok(AtomBase {
            n,
            blocks,
            by_name,
            similarity,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn has_similarity(&self) -> bool {
        self.similarity.is_some()
    }

    fn block_id(&self, block: usize, args: &[usize]) -> usize {
        self.blocks[block].offset + args.iter().fold(0, |acc, &a| acc * self.n + a)
    }

    fn sim_id(&self, a: usize, b: usize) -> usize {
        self.blocks[self.similarity.expect("similarity declared")].offset + a * self.n + b
    }

    fn decode(&self, id: usize) -> (usize, Vec<usize>) {
        let block = self.blocks.partition_point(|b| b.offset <= id) - 1;
        let mut k = id - self.blocks[block].offset;
        let mut args = vec![0; self.blocks[block].arity];
        for slot in args.iter_mut().rev() {
            *slot = k % self.n;
            k /= self.n;
        }
        (block, args)
    }

    pub fn id(&self, atom: &GroundAtom) -> Option<usize> {
        let &block = self.by_name.get(&atom.predicate)?;
        let ok = self.blocks[block].arity == atom.args.len() && atom.args.iter().all(|&a| a < self.n);
        ok.then(|| self.block_id(block, &atom.args))
    }

    pub fn atom(&self, id: usize) -> GroundAtom {
        let (block, args) = self.decode(id);
        GroundAtom::new(&self.blocks[block].predicate, args)
    }

    pub fn atoms(&self) -> impl Iterator<Item = GroundAtom> + '_ {
        (0..self.len).map(|id| self.atom(id))
    }

    fn dense(&self, deg: &DegreeMap) -> Vec<Rational01> {
        let mut out = vec![Rational01::zero(); self.len];
        for (atom, d) in deg {
            if let Some(id) = self.id(atom) {
                out[id] = d.clone();
            }
        }
        out
    }

    fn sparse(&self, dense: &[Rational01]) -> DegreeMap {
        dense
            .iter()
            .enumerate()
            .map(|(id, d)| (self.atom(id), d.clone()))
            .collect()
    }
}

/// Body or head position of a ground rule: an atom of the base or one of
/// the truth constants `0̄`, `1̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operand {
    Atom(usize),
    Falsum,
    Verum,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundRule {
    /// Index of the clause this instance comes from.
    pub clause: usize,
    pub body: Vec<(Operand, Rational01)>,
    pub head: (Operand, Rational01),
}

impl GroundRule {
    pub fn to_basic_horn(&self, u: &HerbrandUniverse, base: &AtomBase) -> BasicHorn {
        let ev = |(op, r): &(Operand, Rational01)| {
            let body = match op {
                Operand::Atom(id) => {
                    let a = base.atom(*id);
                    Formula::Atom(Atom::new(&a.predicate, a.args.iter().map(|&i| u.term(i).clone()).collect()))
                }
                Operand::Falsum => Formula::constant(Rational01::zero()),
                Operand::Verum => Formula::constant(Rational01::one()),
            };
            EvaluatedFormula::new(body, r.clone())
        };
        BasicHorn {
            body: self.body.iter().map(ev).collect(),
            head: ev(&self.head),
        }
    }

    fn bound(&self, deg: &[Rational01]) -> Rational01 {
        let body = Rational01::strong_conj_all(self.body.iter().map(|(op, r)| r.implication(&operand_value(*op, deg))).collect::<Vec<_>>().iter());
        self.head.1.strong_conj(&body)
    }
}

fn operand_value(op: Operand, deg: &[Rational01]) -> Rational01 {
    match op {
        Operand::Atom(id) => deg[id].clone(),
        Operand::Falsum => Rational01::zero(),
        Operand::Verum => Rational01::one(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("formula {index} is not a Horn clause: {source}")]
    NotHorn { index: usize, source: NotHorn },
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error("theory has no model: clause {clause} forces {instance} above 0")]
    Inconsistent { clause: usize, instance: String },
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

/// Classifies every formula as a Horn clause (with `&`) and closes it
/// universally.
pub fn horn_clauses<'a, I>(formulas: I) -> Result<Vec<HornClause>, SolveError>
where
    I: IntoIterator<Item = &'a Formula>,
{
    formulas
        .into_iter()
        .enumerate()
        .map(|(index, f)| {
            classify_horn(f, false)
                .map(|(_, c)| c.closed())
                .map_err(|source| SolveError::NotHorn { index, source })
        })
        .collect()
}

/// Every conjunct of every clause instantiated with every tuple of universe
/// terms for the prefix variables it uses.
pub fn ground_instances(
    clauses: &[HornClause],
    u: &HerbrandUniverse,
    base: &AtomBase,
) -> Result<Vec<GroundRule>, SolveError> {
    let mut rules = Vec::new();
    for (clause, c) in clauses.iter().enumerate() {
        let open = c.free_vars();
        if let Some(x) = open.iter().find(|x| u.index_of(&Term::var(x)).is_none()) {
            return Err(UniverseError::Unbound(x.clone()).into());
        }
        for conjunct in &c.conjuncts {
            let mut used = BTreeSet::new();
            for e in conjunct.body.iter().chain([&conjunct.head]) {
                used.extend(free_vars(&e.body));
            }
            let vars: Vec<&String> = c.prefix.iter().filter(|x| used.contains(*x)).collect();
            let vars: Vec<&String> = vars.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
            checked_table(u.len(), vars.len(), "ground instances")?;
            for tuple in tuples(u.len(), vars.len()) {
                let assignment: BTreeMap<String, usize> = vars.iter().map(|x| x.to_string()).zip(tuple).collect();
                let ground = |e: &EvaluatedFormula| -> Result<(Operand, Rational01), UniverseError> {
                    let op = match &e.body {
                        Formula::Atom(a) => {
                            let args = a
                                .args
                                .iter()
                                .map(|t| u.eval(t, &assignment))
                                .collect::<Result<Vec<_>, _>>()?;
                            let id = base.id(&GroundAtom::new(&a.predicate, args)).expect("signature-checked atom");
                            Operand::Atom(id)
                        }
                        Formula::Constant(r) if r.is_zero() => Operand::Falsum,
                        _ => Operand::Verum,
                    };
                    Ok((op, e.degree.clone()))
                };
                rules.push(GroundRule {
                    clause,
                    body: conjunct.body.iter().map(&ground).collect::<Result<_, _>>()?,
                    head: ground(&conjunct.head)?,
                });
            }
        }
    }
    Ok(rules)
}

/// Worklist discipline of the fixpoint iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    Fifo,
    Lifo,
}

struct Engine<'a> {
    u: &'a HerbrandUniverse,
    base: &'a AtomBase,
    rules: &'a [GroundRule],
    functions: Vec<(&'a str, usize)>,
    triggers: Vec<Vec<usize>>,
    deg: Vec<Rational01>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    schedule: Schedule,
}

fn product(lists: &[Vec<(usize, usize)>]) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new()];
    for list in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |&p| {
                    let mut next = prefix.clone();
                    next.push(p);
                    next
                })
            })
            .collect();
    }
    out
}

impl<'a> Engine<'a> {
    fn new(rules: &'a [GroundRule], u: &'a HerbrandUniverse, base: &'a AtomBase, schedule: Schedule) -> Self {
        let mut triggers = vec![Vec::new(); base.len()];
        for (r, rule) in rules.iter().enumerate() {
            for (op, _) in &rule.body {
                if let Operand::Atom(id) = op {
                    if triggers[*id].last() != Some(&r) {
                        triggers[*id].push(r);
                    }
                }
            }
        }
        let functions = u.signature().functions().filter(|(_, a)| *a > 0).collect();
        Engine {
            u,
            base,
            rules,
            functions,
            triggers,
            deg: vec![Rational01::zero(); base.len()],
            queue: VecDeque::new(),
            queued: vec![false; base.len()],
            schedule,
        }
    }

    fn raise(&mut self, id: usize, value: Rational01) {
        if value > self.deg[id] {
            self.deg[id] = value;
            if !self.queued[id] {
                self.queued[id] = true;
                self.queue.push_back(id);
            }
        }
    }

    fn pop(&mut self) -> Option<usize> {
        let id = match self.schedule {
            Schedule::Fifo => self.queue.pop_front(),
            Schedule::Lifo => self.queue.pop_back(),
        }?;
        self.queued[id] = false;
        Some(id)
    }

    fn sim(&self, a: usize, b: usize) -> &Rational01 {
        &self.deg[self.base.sim_id(a, b)]
    }

    fn fire(&mut self, r: usize) {
        let rule = &self.rules[r];
        if let Operand::Atom(head) = rule.head.0 {
            let bound = rule.bound(&self.deg);
            self.raise(head, bound);
        }
    }

    fn run(mut self) -> Vec<Rational01> {
        if self.base.has_similarity() {
            for t in 0..self.u.len() {
                let id = self.base.sim_id(t, t);
                self.raise(id, Rational01::one());
            }
        }
        for r in 0..self.rules.len() {
            self.fire(r);
        }
        while let Some(id) = self.pop() {
            self.process(id);
        }
        self.deg
    }

    /// Pairs `(x, y)` with non-zero similarity, used for the argument
    /// positions of a congruence instance other than the one that changed.
    fn similar_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.u.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if !self.sim(x, y).is_zero() {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Argument tuple pairs with `(t, s)` at position `i` and similar pairs
    /// elsewhere, with the strong conjunction of their similarities.
    fn congruence_instances(
        &self,
        arity: usize,
        i: usize,
        (t, s): (usize, usize),
        pairs: &[(usize, usize)],
    ) -> Vec<(Vec<usize>, Vec<usize>, Rational01)> {
        let lists: Vec<Vec<(usize, usize)>> = (0..arity)
            .map(|j| if j == i { vec![(t, s)] } else { pairs.to_vec() })
            .collect();
        product(&lists)
            .into_iter()
            .filter_map(|combo| {
                let value = Rational01::strong_conj_all(combo.iter().map(|&(x, y)| self.sim(x, y)));
                if value.is_zero() {
                    return None;
                }
                let (xs, ys) = combo.into_iter().unzip();
                Some((xs, ys, value))
            })
            .collect()
    }

    fn process(&mut self, id: usize) {
        for k in 0..self.triggers[id].len() {
            let r = self.triggers[id][k];
            self.fire(r);
        }
        let Some(sim_block) = self.base.similarity else {
            return;
        };
        let (block, args) = self.base.decode(id);
        let d = self.deg[id].clone();
        if block == sim_block {
            let (t, s) = (args[0], args[1]);
            self.raise(self.base.sim_id(s, t), d.clone());
            for w in 0..self.u.len() {
                let forward = d.strong_conj(self.sim(s, w));
                self.raise(self.base.sim_id(t, w), forward);
                let backward = self.sim(w, t).strong_conj(&d);
                self.raise(self.base.sim_id(w, s), backward);
            }
            let needs_pairs = self.functions.iter().any(|(_, a)| *a > 1)
                || self.base.blocks.iter().any(|b| b.arity > 1 && b.predicate != SIMILARITY);
            let pairs = if needs_pairs { self.similar_pairs() } else { Vec::new() };
            for fi in 0..self.functions.len() {
                let (f, arity) = self.functions[fi];
                for i in 0..arity {
                    for (xs, ys, v) in self.congruence_instances(arity, i, (t, s), &pairs) {
                        let target = self.base.sim_id(self.u.apply(f, &xs), self.u.apply(f, &ys));
                        self.raise(target, v);
                    }
                }
            }
            for b in 0..self.base.blocks.len() {
                let arity = self.base.blocks[b].arity;
                if b == sim_block || arity == 0 {
                    continue;
                }
                for i in 0..arity {
                    for (xs, ys, v) in self.congruence_instances(arity, i, (t, s), &pairs) {
                        let (px, py) = (self.base.block_id(b, &xs), self.base.block_id(b, &ys));
                        let to_x = self.deg[py].strong_conj(&v);
                        self.raise(px, to_x);
                        let to_y = self.deg[px].strong_conj(&v);
                        self.raise(py, to_y);
                    }
                }
            }
        } else if !args.is_empty() {
            let n = self.u.len();
            let lists: Vec<Vec<(usize, usize)>> = args
                .iter()
                .map(|&x| {
                    (0..n)
                        .filter(|&y| !self.sim(x, y).is_zero() || !self.sim(y, x).is_zero())
                        .map(|y| (x, y))
                        .collect()
                })
                .collect();
            for combo in product(&lists) {
                let forward = Rational01::strong_conj_all(combo.iter().map(|&(x, y)| self.sim(x, y)));
                let backward = Rational01::strong_conj_all(combo.iter().map(|&(x, y)| self.sim(y, x)));
                let ys: Vec<usize> = combo.iter().map(|&(_, y)| y).collect();
                let target = self.base.block_id(block, &ys);
                self.raise(target, d.strong_conj(&forward.max(backward)));
            }
        }
    }
}

fn fixpoint_dense(
    rules: &[GroundRule],
    u: &HerbrandUniverse,
    base: &AtomBase,
    schedule: Schedule,
) -> Result<Vec<Rational01>, SolveError> {
    let deg = Engine::new(rules, u, base, schedule).run();
    for rule in rules {
        if rule.head.0 == Operand::Falsum && !rule.bound(&deg).is_zero() {
            let horn = rule.to_basic_horn(u, base);
            let instance = crate::parser::print_formula(&horn.to_formula(false));
            return Err(SolveError::Inconsistent {
                clause: rule.clause,
                instance,
            });
        }
    }
    Ok(deg)
}

/// Least degree assignment closed under the ground rules and, when the
/// signature declares similarity, under reflexivity, symmetry, transitivity
/// and congruence for every function and predicate symbol. Fails when a
/// rule with head `(0̄, s)` cannot be satisfied.
pub fn least_fixpoint(
    rules: &[GroundRule],
    u: &HerbrandUniverse,
    base: &AtomBase,
    schedule: Schedule,
) -> Result<DegreeMap, SolveError> {
    fixpoint_dense(rules, u, base, schedule).map(|d| base.sparse(&d))
}

/// Atoms whose degree some rule instance would still raise, found by
/// applying every rule to every instance.
pub fn closure_violations(
    rules: &[GroundRule],
    u: &HerbrandUniverse,
    base: &AtomBase,
    deg: &DegreeMap,
) -> Vec<GroundAtom> {
    let d = base.dense(deg);
    let mut bad = BTreeSet::new();
    let mut check = |id: usize, bound: Rational01| {
        if bound > d[id] {
            bad.insert(id);
        }
    };
    for rule in rules {
        if let Operand::Atom(h) = rule.head.0 {
            check(h, rule.bound(&d));
        }
    }
    if base.has_similarity() {
        let n = u.len();
        let sim = |a: usize, b: usize| &d[base.sim_id(a, b)];
        for t in 0..n {
            check(base.sim_id(t, t), Rational01::one());
            for s in 0..n {
                check(base.sim_id(s, t), sim(t, s).clone());
                for w in 0..n {
                    check(base.sim_id(t, w), sim(t, s).strong_conj(sim(s, w)));
                }
            }
        }
        let pair_value = |xs: &[usize], ys: &[usize]| {
            Rational01::strong_conj_all(xs.iter().zip(ys).map(|(&x, &y)| sim(x, y)))
        };
        for (f, arity) in u.signature().functions().filter(|(_, a)| *a > 0) {
            for xs in tuples(n, arity) {
                for ys in tuples(n, arity) {
                    check(base.sim_id(u.apply(f, &xs), u.apply(f, &ys)), pair_value(&xs, &ys));
                }
            }
        }
        for (b, block) in base.blocks.iter().enumerate() {
            if block.predicate == SIMILARITY || block.arity == 0 {
                continue;
            }
            for xs in tuples(n, block.arity) {
                for ys in tuples(n, block.arity) {
                    let v = pair_value(&xs, &ys);
                    let (px, py) = (base.block_id(b, &xs), base.block_id(b, &ys));
                    check(px, d[py].strong_conj(&v));
                    check(py, d[px].strong_conj(&v));
                }
            }
        }
    }
    bad.into_iter().map(|id| base.atom(id)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotientError {
    #[error("representatives disagree on {0}")]
    Disagreement(String),
}

/// The quotient of the universe by degree-1 similarity, as a finite
/// structure whose elements are named by class representatives.
#[derive(Debug, Clone)]
pub struct TermStructure {
    universe: HerbrandUniverse,
    degrees: DegreeMap,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    structure: FiniteStructure,
    boundary: BTreeSet<(String, Vec<usize>)>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

pub fn quotient(deg: &DegreeMap, u: &HerbrandUniverse) -> Result<TermStructure, SolveError> {
    let base = AtomBase::new(u)?;
    let d = base.dense(deg);
    let n = u.len();
    let mut parent: Vec<usize> = (0..n).collect();
    if base.has_similarity() {
        for t in 0..n {
            for s in t + 1..n {
                if d[base.sim_id(t, s)].is_one() {
                    let (rt, rs) = (find(&mut parent, t), find(&mut parent, s));
                    parent[rt.max(rs)] = rt.min(rs);
                }
            }
        }
    }
    let mut class_of = vec![0; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_class = HashMap::new();
    for t in 0..n {
        let root = find(&mut parent, t);
        let c = *root_class.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[c].push(t);
        class_of[t] = c;
    }
    let reps: Vec<usize> = classes.iter().map(|c| c[0]).collect();
    let domain = reps.iter().map(|&r| u.term(r).to_string()).collect();
    let mut structure = FiniteStructure::new(domain, u.signature().clone()).expect("non-empty universe");
    let mut boundary = BTreeSet::new();
    let k = classes.len();
    for (f, arity) in u.signature().functions() {
        for cs in tuples(k, arity) {
            let args: Vec<usize> = cs.iter().map(|&c| reps[c]).collect();
            structure.set_function(f, &args_to_classes(&args, &class_of), class_of[u.apply(f, &args)]);
            if u.overflows(f, &args) {
                boundary.insert((f.to_string(), cs));
            }
        }
        for args in tuples(n, arity) {
            let cs = args_to_classes(&args, &class_of);
            if class_of[u.apply(f, &args)] != structure.function_value(f, &cs).expect("declared") {
                let shown: Vec<String> = args.iter().map(|&a| u.term(a).to_string()).collect();
                return Err(QuotientError::Disagreement(format!("{f}({})", shown.join(","))).into());
            }
        }
    }
    for id in 0..base.len() {
        let atom = base.atom(id);
        let cs = args_to_classes(&atom.args, &class_of);
        let rep_args: Vec<usize> = cs.iter().map(|&c| reps[c]).collect();
        let rep_id = base.id(&GroundAtom::new(&atom.predicate, rep_args)).expect("in base");
        if d[id] != d[rep_id] {
            return Err(QuotientError::Disagreement(u.display_atom(&atom)).into());
        }
        if id == rep_id {
            structure.set_predicate(&atom.predicate, &cs, d[id].clone());
        }
    }
    Ok(TermStructure {
        universe: u.clone(),
        degrees: base.sparse(&d),
        classes,
        class_of,
        structure,
        boundary,
    })
}

fn args_to_classes(args: &[usize], class_of: &[usize]) -> Vec<usize> {
    args.iter().map(|&a| class_of[a]).collect()
}

impl TermStructure {
    pub fn universe(&self) -> &HerbrandUniverse {
        &self.universe
    }

    pub fn degrees(&self) -> &DegreeMap {
        &self.degrees
    }

    pub fn structure(&self) -> &FiniteStructure {
        &self.structure
    }

    /// Classes as lists of universe indices, the first being the representative.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, term: usize) -> usize {
        self.class_of[term]
    }

    pub fn class_of_term(&self, t: &Term) -> Option<usize> {
        self.universe.index_of(t).map(|i| self.class_of[i])
    }

    /// Function entries whose composition was saturated at the depth bound.
    pub fn boundary(&self) -> &BTreeSet<(String, Vec<usize>)> {
        &self.boundary
    }

    /// Sends every generator variable to its own class.
    pub fn canonical_evaluation(&self) -> Valuation {
        self.universe
            .terms()
            .iter()
            .enumerate()
            .filter_map(|(i, t)| match t {
                Term::Var(x) => Some((x.clone(), self.class_of[i])),
                Term::App(..) => None,
            })
            .collect()
    }

    /// Structure file text followed by `class` and `degree` lines. Degrees
    /// of 0 and reflexive similarities are left out.
    pub fn listing(&self) -> String {
        let mut out = crate::parser::print_structure(&self.structure.to_file());
        for class in &self.classes {
            let members: Vec<String> = class.iter().map(|&t| self.universe.term(t).to_string()).collect();
            out.push_str(&format!("class {}\n", members.join(" ")));
        }
        for (atom, d) in &self.degrees {
            if d.is_zero() || (atom.is_similarity() && atom.args[0] == atom.args[1]) {
                continue;
            }
            out.push_str(&format!("degree {} = {d}\n", self.universe.display_atom(atom)));
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub depth: usize,
    pub generators: Vec<String>,
    pub schedule: Schedule,
}

impl SolveOptions {
    pub fn with_depth(depth: usize) -> Self {
        SolveOptions {
            depth,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub clauses: Vec<HornClause>,
    pub rules: Vec<GroundRule>,
    pub base: AtomBase,
    pub term_structure: TermStructure,
    /// Fresh constant added when the signature had none.
    pub injected: Option<String>,
}

impl Solution {
    pub fn universe(&self) -> &HerbrandUniverse {
        self.term_structure.universe()
    }

    pub fn degrees(&self) -> &DegreeMap {
        self.term_structure.degrees()
    }

    /// The closed clauses as formulas.
    pub fn theory(&self) -> Vec<Formula> {
        self.clauses.iter().map(HornClause::to_formula).collect()
    }

    pub fn degree(&self, atom: &GroundAtom) -> Rational01 {
        self.degrees().get(atom).cloned().unwrap_or_else(Rational01::zero)
    }
}

fn max_term_depth(clauses: &[HornClause]) -> usize {
    let mut depth = 0;
    for c in clauses {
        c.to_formula().visit_atoms(&mut |a| {
            depth = a.args.iter().map(Term::depth).fold(depth, usize::max);
        });
    }
    depth
}

/// Adds a constant when the signature has none, choosing a name unused by
/// the signature and by the variables of the theory.
pub fn ensure_constant(sig: &mut Signature, formulas: &[Formula]) -> Option<String> {
    if sig.constants().next().is_some() {
        return None;
    }
    let mut taken = BTreeSet::new();
    for f in formulas {
        taken.extend(free_vars(f));
        taken.extend(crate::syntax::bound_vars(f));
    }
    let name = (0..)
        .map(|i| format!("k{i}"))
        .find(|n| !taken.contains(n) && sig.function_arity(n).is_none() && sig.predicate_arity(n).is_none())
        .expect("unbounded supply");
    sig.add_function(&name, 0).expect("fresh name");
    Some(name)
}

/// Grounds, saturates and quotients a Horn theory. The depth bound is raised
/// to the deepest term written in the theory.
pub fn solve(sig: &Signature, formulas: &[Formula], options: &SolveOptions) -> Result<Solution, SolveError> {
    let clauses = horn_clauses(formulas)?;
    let mut sig = sig.clone();
    let injected = if options.generators.is_empty() {
        ensure_constant(&mut sig, formulas)
    } else {
        None
    };
    let depth = options.depth.max(max_term_depth(&clauses));
    let u = build_universe(&sig, depth, &options.generators)?;
    let base = AtomBase::new(&u)?;
    let rules = ground_instances(&clauses, &u, &base)?;
    let deg = least_fixpoint(&rules, &u, &base, options.schedule)?;
    let term_structure = quotient(&deg, &u)?;
    Ok(Solution {
        clauses,
        rules,
        base,
        term_structure,
        injected,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FreeHomError {
    #[error("target does not interpret the theory's signature: {0}")]
    Signature(#[from] StructureError),
    #[error("target is not a model: formula {index} has value {value}")]
    NotModel { index: usize, value: Rational01 },
    #[error("target violates a similarity axiom: {0}")]
    Similarity(AxiomViolation),
    #[error("target is not reduced")]
    NotReduced,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("not reduced: {first} and {second} share a class but evaluate to {first_value} and {second_value}")]
    Disagreement {
        first: String,
        second: String,
        first_value: String,
        second_value: String,
    },
    #[error("map is not a homomorphism: {0}")]
    Homomorphism(HomomorphismViolation),
}

/// The map `class of t ↦ ‖t‖` into a reduced model, with its verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeHomomorphism {
    pub map: Vec<usize>,
    /// Saturated function entries left out of the commutation check.
    pub skipped_boundary: usize,
}

/// Builds the homomorphism from the term structure into `target` induced by
/// `v`, after checking that `target` is a reduced model of `theory`.
/// Function entries saturated at the depth bound are not required to
/// commute.
pub fn free_homomorphism(
    t: &TermStructure,
    theory: &[Formula],
    target: &FiniteStructure,
    v: &Valuation,
) -> Result<FreeHomomorphism, FreeHomError> {
    let n = target.conform(t.structure.signature())?;
    let report = is_model(&n, theory)?;
    if let Some(index) = report.first_failure() {
        return Err(FreeHomError::NotModel {
            index,
            value: report.values[index].clone(),
        });
    }
    check_similarity_axioms(&n).map_err(FreeHomError::Similarity)?;
    if !is_reduced(&n) {
        return Err(FreeHomError::NotReduced);
    }
    let mut map = Vec::with_capacity(t.classes.len());
    for class in &t.classes {
        let values = class
            .iter()
            .map(|&m| eval_term(&n, v, t.universe.term(m)))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(k) = values.iter().position(|&e| e != values[0]) {
            return Err(FreeHomError::Disagreement {
                first: t.universe.term(class[0]).to_string(),
                second: t.universe.term(class[k]).to_string(),
                first_value: n.domain()[values[0]].clone(),
                second_value: n.domain()[values[k]].clone(),
            });
        }
        map.push(values[0]);
    }
    let skipped_boundary = verify(t, &n, &map).map_err(FreeHomError::Homomorphism)?;
    Ok(FreeHomomorphism { map, skipped_boundary })
}

fn verify(t: &TermStructure, n: &FiniteStructure, g: &[usize]) -> Result<usize, HomomorphismViolation> {
    let s = &t.structure;
    let names = |cs: &[usize]| cs.iter().map(|&c| s.domain()[c].clone()).collect::<Vec<_>>();
    let k = s.size();
    let mut skipped = 0;
    for (f, arity) in s.signature().functions() {
        for cs in tuples(k, arity) {
            if t.boundary.contains(&(f.to_string(), cs.clone())) {
                skipped += 1;
                continue;
            }
            let image: Vec<usize> = cs.iter().map(|&c| g[c]).collect();
            let lhs = g[s.function_value(f, &cs).expect("declared")];
            if n.function_value(f, &image) != Ok(lhs) {
                return Err(HomomorphismViolation::Function {
                    symbol: f.to_string(),
                    args: names(&cs),
                });
            }
        }
    }
    let mut preds: Vec<(&str, usize)> = s.signature().predicates().collect();
    if s.signature().has_similarity() {
        preds.push((SIMILARITY, 2));
    }
    for (p, arity) in preds {
        for cs in tuples(k, arity) {
            if !s.predicate_degree(p, &cs).expect("declared").is_one() {
                continue;
            }
            let image: Vec<usize> = cs.iter().map(|&c| g[c]).collect();
            let preserved = if p == SIMILARITY {
                n.similarity(image[0], image[1]).is_one()
            } else {
                n.predicate_degree(p, &image).is_ok_and(Rational01::is_one)
            };
            if !preserved {
                return Err(HomomorphismViolation::Predicate {
                    symbol: p.to_string(),
                    args: names(&cs),
                });
            }
        }
    }
    Ok(skipped)
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |(op, r): &(Operand, Rational01)| match op {
            Operand::Atom(id) => format!("(#{id},{r})"),
            Operand::Falsum => format!("(0,{r})"),
            Operand::Verum => format!("(1,{r})"),
        };
        let body: Vec<String> = self.body.iter().map(show).collect();
        if body.is_empty() {
            write!(f, "{}", show(&self.head))
        } else {
            write!(f, "{} -> {}", body.join(" & "), show(&self.head))
        }
    }
}
