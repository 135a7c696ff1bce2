//! Acceptance suite. Prints one PASS/FAIL line per criterion with its
//! measured runtime against the limit, and exits non-zero on any failure.

mod common;

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{constant_name, horn_theory, rng, TheoryShape};
use fuzzy_horn::algebra::Rational01;
use fuzzy_horn::cli;
use fuzzy_horn::oracle::{for_each_model, oracle_min_model, oracle_truth_degree, Grid, Slot, DEFAULT_CAP};
use fuzzy_horn::parser::{parse_theory, print_theory};
use fuzzy_horn::semantics::{
    check_homomorphism, check_similarity_axioms, is_model, is_reduced, truth_value, tuples, FiniteStructure,
    Valuation,
};
use fuzzy_horn::syntax::{classify_horn, Atom, Formula, HornKind, Signature, Term};
use fuzzy_horn::term_model::{
    build_universe, closure_violations, free_homomorphism, ground_instances, horn_clauses, least_fixpoint, solve,
    AtomBase, HerbrandUniverse, Schedule, SolveOptions, Solution,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Largest candidate count accepted for a random oracle instance.
const ORACLE_BUDGET: u64 = 20_000;

type Outcome = Result<String, String>;

fn criterion(id: u32, name: &str, limit: Duration, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check));
    let elapsed = start.elapsed();
    let (ok, detail) = match result {
        Ok(Ok(detail)) if elapsed <= limit => (true, detail),
        Ok(Ok(detail)) => (false, format!("{detail}; too slow")),
        Ok(Err(detail)) => (false, detail),
        Err(_) => (false, "panicked".to_string()),
    };
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("{verdict} [{id}] {name}: {detail} ({elapsed:.2?}, limit {limit:?})");
    let _ = std::io::stdout().flush();
    ok
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn counterexample() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("m.st");
    std::fs::write(
        &path,
        "domain a b\npred P: (a) = 0.4\npred P: (b) = 0.7\npred R: (a) = 0.7\npred R: (b) = 0.4\n",
    )
    .map_err(|e| e.to_string())?;
    let eval = |formula: &str| {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let args = ["fuzzy-horn", "eval", "--quiet", "--structure", path.to_str().unwrap(), "--formula", formula];
        let code = cli::run(args, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap())
    };
    let joint = eval("forall x. (P(x),1) & (R(x),1)");
    let split = eval("(forall x. (P(x),1)) & (forall x. (R(x),1))");
    ensure(joint == (0, "1/10\n".into()), || format!("joint form gave {joint:?}"))?;
    ensure(split == (0, "0\n".into()), || format!("split form gave {split:?}"))?;
    Ok("joint 1/10, split 0 (exact)".into())
}

const EXAMPLE_THEORY: &str = "\
func a/0
pred P/1
pred R/2
clause c1: (P(a), 0.5)
clause c2: (P(a), 0.6) & (R(a, x), 0.3)
clause c3: (P(a), 0.5) -> (R(a, a), 0.1)
clause c4: (P(a), 0.6) & (R(a, x), 0.3) -> (P(x), 0.8)
clause c5: forall x. (P(x), 0.6) & (R(a, x), 0.3)
clause c6: forall x. (P(x), 0.6) & (R(a, x), 0.3) -> (P(a), 0.9)
";

fn example_corpus() -> Outcome {
    let th = parse_theory(EXAMPLE_THEORY).map_err(|e| e.to_string())?;
    ensure(th.formulas.len() == 6, || "expected six clauses".into())?;
    let kinds = th
        .formulas
        .iter()
        .map(|f| classify_horn(&f.formula, false).map(|(k, _)| k))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    use HornKind::*;
    let expected = vec![Basic, QuantifierFree, Basic, Basic, Quantified, Quantified];
    ensure(kinds == expected, || format!("kinds {kinds:?}"))?;
    let printed = print_theory(&th);
    let again = parse_theory(&printed).map_err(|e| e.to_string())?;
    ensure(again == th, || "reparsed theory differs".into())?;
    ensure(print_theory(&again) == printed, || "printing is not stable".into())?;
    Ok("6 clauses Horn, printer round trip byte-identical".into())
}

fn signature_and_theory(rng: &mut ChaCha8Rng, shape: &TheoryShape) -> (Signature, Vec<Formula>) {
    (shape.signature(), horn_theory(rng, shape))
}

fn term_model_is_reduced_model() -> Outcome {
    let mut rng = rng(3);
    let mut classes = 0;
    let n = 500;
    for i in 0..n {
        let shape = TheoryShape::function_free(&mut rng);
        let (sig, theory) = signature_and_theory(&mut rng, &shape);
        let sol = solve(&sig, &theory, &SolveOptions::with_depth(0)).map_err(|e| format!("theory {i}: {e}"))?;
        let s = sol.term_structure.structure();
        let report = is_model(s, &theory).map_err(|e| e.to_string())?;
        ensure(report.holds(), || format!("theory {i}: not a model, values {:?}", report.values))?;
        ensure(is_reduced(s), || format!("theory {i}: not reduced"))?;
        check_similarity_axioms(s).map_err(|e| format!("theory {i}: {e}"))?;
        classes += sol.term_structure.classes().len();
    }
    Ok(format!("{n} theories, {classes} classes in total"))
}

/// A small theory whose grid enumeration stays within [`ORACLE_BUDGET`].
struct OracleInstance {
    signature: Signature,
    theory: Vec<Formula>,
    grid: Grid,
    depth: usize,
}

fn slot_count(u: &HerbrandUniverse) -> usize {
    let base = AtomBase::new(u).unwrap();
    let n = u.len();
    let sim_atoms = if base.has_similarity() { n * n } else { 0 };
    base.len() - sim_atoms + n * (n - 1) / 2 * usize::from(base.has_similarity())
}

fn oracle_instance(rng: &mut ChaCha8Rng) -> OracleInstance {
    loop {
        let d = rng.gen_range(1..=4u64);
        let constants = rng.gen_range(1..=2);
        let function = constants == 1 && rng.gen_bool(0.3);
        let shape = TheoryShape {
            constants,
            predicates: (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..=2)).collect(),
            similarity: rng.gen_bool(0.5),
            function,
            max_clauses: 4,
            denominators: vec![d],
            variables: vec!["x", "y"],
        };
        let (signature, theory) = signature_and_theory(rng, &shape);
        let depth = usize::from(function);
        let clauses = horn_clauses(&theory).unwrap();
        let deepest = clauses
            .iter()
            .map(|c| {
                let mut m = 0;
                c.to_formula().visit_atoms(&mut |a| m = a.args.iter().map(Term::depth).fold(m, usize::max));
                m
            })
            .max()
            .unwrap_or(0);
        let u = build_universe(&signature, depth.max(deepest), &[]).unwrap();
        let candidates = (d + 1).checked_pow(slot_count(&u) as u32);
        if candidates.is_some_and(|c| c <= ORACLE_BUDGET) {
            return OracleInstance {
                signature,
                theory,
                grid: Grid::new(d).unwrap(),
                depth,
            };
        }
    }
}

fn solve_instance(inst: &OracleInstance) -> Solution {
    solve(&inst.signature, &inst.theory, &SolveOptions::with_depth(inst.depth)).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = rng(4);
    let n = 200;
    let mut atoms = 0;
    let mut with_function = 0;
    for i in 0..n {
        let inst = oracle_instance(&mut rng);
        let sol = solve_instance(&inst);
        let oracle = oracle_min_model(&sol.theory(), sol.universe(), inst.grid, DEFAULT_CAP)
            .map_err(|e| format!("instance {i}: {e}"))?;
        ensure(&oracle == sol.degrees(), || {
            let diff: Vec<String> = oracle
                .iter()
                .filter(|(a, d)| sol.degree(a) != **d)
                .map(|(a, d)| format!("{} fixpoint {} oracle {d}", sol.universe().display_atom(a), sol.degree(a)))
                .collect();
            format!("instance {i}: {}", diff.join("; "))
        })?;
        atoms += oracle.len();
        with_function += usize::from(inst.depth > 0);
    }
    Ok(format!("{n} instances ({with_function} with a function symbol), {atoms} atoms equal"))
}

fn ground_conjunction(rng: &mut ChaCha8Rng, u: &HerbrandUniverse, grid: Grid) -> Formula {
    let sig = u.signature();
    let mut preds: Vec<(String, usize)> = sig.predicates().map(|(p, a)| (p.to_string(), a)).collect();
    if sig.has_similarity() {
        preds.push((fuzzy_horn::syntax::SIMILARITY.to_string(), 2));
    }
    let parts = (0..rng.gen_range(1..=3))
        .map(|_| {
            let (p, arity) = preds.choose(rng).unwrap();
            let args = (0..*arity).map(|_| u.terms().choose(rng).unwrap().clone()).collect();
            let k = rng.gen_range(0..=grid.denominator());
            let r = Rational01::from_grid(k, grid.denominator()).unwrap();
            Formula::evaluated(Formula::Atom(Atom::new(p, args)), r)
        })
        .collect();
    Formula::strong_and(parts)
}

fn conjunction_inequality() -> Outcome {
    let mut rng = rng(5);
    let (theories, per_theory) = (60, 4);
    let mut equal = 0;
    for i in 0..theories {
        let inst = oracle_instance(&mut rng);
        let sol = solve_instance(&inst);
        for _ in 0..per_theory {
            let conj = ground_conjunction(&mut rng, sol.universe(), inst.grid);
            let in_term = truth_value(sol.term_structure.structure(), &conj).map_err(|e| e.to_string())?;
            let oracle = oracle_truth_degree(&sol.theory(), &conj, sol.universe(), inst.grid, DEFAULT_CAP)
                .map_err(|e| format!("instance {i}: {e}"))?;
            ensure(in_term <= oracle, || format!("instance {i}: {in_term} > {oracle} for {conj}"))?;
            equal += usize::from(in_term == oracle);
        }
    }
    let total = theories * per_theory;
    Ok(format!("{total} conjunctions, term value <= oracle degree ({equal} equal)"))
}

/// Reduced grid models of `theory` on a domain of `size` elements with the
/// constants placed by `rng`.
fn reduced_models(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    theory: &[Formula],
    size: usize,
    grid: Grid,
) -> Vec<FiniteStructure> {
    let domain = (0..size).map(|i| format!("e{i}")).collect();
    let mut template = FiniteStructure::new(domain, sig.clone()).unwrap();
    for c in sig.constants() {
        template.set_function(c, &[], rng.gen_range(0..size));
    }
    let mut slots: Vec<Slot> = Vec::new();
    for (p, arity) in sig.predicates() {
        for args in tuples(size, arity) {
            slots.push(vec![(p.to_string(), args)]);
        }
    }
    if sig.has_similarity() {
        for a in 0..size {
            for b in a + 1..size {
                let sim = fuzzy_horn::syntax::SIMILARITY.to_string();
                slots.push(vec![(sim.clone(), vec![a, b]), (sim, vec![b, a])]);
            }
        }
    }
    let mut out = Vec::new();
    for_each_model(&template, &slots, grid, theory, ORACLE_BUDGET * 10, |s, _| {
        if is_reduced(s) {
            out.push(s.clone());
        }
    })
    .unwrap();
    out
}

fn free_homomorphisms() -> Outcome {
    let mut rng = rng(6);
    let target = 100;
    let (mut pairs, mut attempts, mut maps_checked) = (0, 0, 0u64);
    while pairs < target {
        attempts += 1;
        if attempts > 10 * target {
            return Err(format!("only {pairs} pairs after {attempts} attempts"));
        }
        let d = rng.gen_range(1..=2u64);
        let shape = TheoryShape {
            constants: rng.gen_range(1..=2),
            predicates: (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..=1)).collect(),
            similarity: rng.gen_bool(0.7),
            function: false,
            max_clauses: 3,
            denominators: vec![d],
            variables: vec!["x", "y"],
        };
        let (sig, theory) = signature_and_theory(&mut rng, &shape);
        let opts = SolveOptions {
            depth: 0,
            generators: vec!["w".into()],
            ..Default::default()
        };
        let sol = solve(&sig, &theory, &opts).map_err(|e| e.to_string())?;
        let ts = &sol.term_structure;
        let size = rng.gen_range(1..=3);
        let models = reduced_models(&mut rng, &sig, &sol.theory(), size, Grid::new(d).unwrap());
        let Some(n) = models.choose(&mut rng) else {
            continue;
        };
        let v = Valuation::from([("w".to_string(), rng.gen_range(0..size))]);
        let g = free_homomorphism(ts, &sol.theory(), n, &v).map_err(|e| format!("pair {pairs}: {e}"))?;
        check_homomorphism(&g.map, ts.structure(), n).map_err(|e| format!("pair {pairs}: {e}"))?;
        let w_class = ts.class_of_term(&Term::var("w")).unwrap();
        ensure(g.map[w_class] == v["w"], || format!("pair {pairs}: generator not preserved"))?;
        for c in 0..shape.constants {
            let name = constant_name(c);
            let class = ts.class_of_term(&Term::constant(&name)).unwrap();
            let expected = n.function_value(&name, &[]).unwrap();
            ensure(g.map[class] == expected, || format!("pair {pairs}: constant {name} not preserved"))?;
        }
        let k = ts.classes().len();
        let mut homs = Vec::new();
        for h in tuples(size, k) {
            maps_checked += 1;
            if h[w_class] == v["w"] && check_homomorphism(&h, ts.structure(), n).is_ok() {
                homs.push(h);
            }
        }
        ensure(homs == vec![g.map.clone()], || format!("pair {pairs}: {} homomorphisms agree with v", homs.len()))?;
        pairs += 1;
    }
    Ok(format!("{pairs} pairs, unique among {maps_checked} candidate maps"))
}

fn fixpoint_engineering() -> Outcome {
    let mut rng = rng(7);
    let n = 200;
    let mut atoms = 0;
    for i in 0..n {
        let mut shape = TheoryShape::function_free(&mut rng);
        let depth = if rng.gen_bool(0.3) {
            shape.function = true;
            shape.constants = shape.constants.min(2);
            rng.gen_range(1..=2)
        } else {
            0
        };
        let (sig, theory) = signature_and_theory(&mut rng, &shape);
        let d = Grid::for_formulas(&theory).denominator();
        let sol = solve(&sig, &theory, &SolveOptions::with_depth(depth)).map_err(|e| e.to_string())?;
        for (a, v) in sol.degrees() {
            ensure(v.on_grid(d), || format!("theory {i}: {a:?} = {v} is not a multiple of 1/{d}"))?;
        }
        let u = sol.universe();
        let lifo = least_fixpoint(&sol.rules, u, &sol.base, Schedule::Lifo).map_err(|e| e.to_string())?;
        ensure(&lifo == sol.degrees(), || format!("theory {i}: FIFO and LIFO differ"))?;
        let regrounded = ground_instances(&sol.clauses, u, &sol.base).map_err(|e| e.to_string())?;
        let stale = closure_violations(&regrounded, u, &sol.base, sol.degrees());
        ensure(stale.is_empty(), || format!("theory {i}: rules still raise {stale:?}"))?;
        atoms += sol.degrees().len();
    }
    Ok(format!("{n} theories, {atoms} atoms on the 1/D grid, FIFO = LIFO, closed"))
}

fn weak_conjunction_distribution() -> Outcome {
    let mut rng = rng(8);
    let n = 500;
    let mut strong_differs = 0;
    for i in 0..n {
        let size = rng.gen_range(1..=4);
        let s = common::structure(&mut rng, size);
        let phi = common::formula(&mut rng, &["x", "y"], 3);
        let psi = common::formula(&mut rng, &["x", "y"], 3);
        let joint = Formula::forall("x", Formula::weak_and(vec![phi.clone(), psi.clone()]));
        let split = Formula::weak_and(vec![Formula::forall("x", phi.clone()), Formula::forall("x", psi.clone())]);
        let (a, b) = (truth_value(&s, &joint).unwrap(), truth_value(&s, &split).unwrap());
        ensure(a == b, || format!("triple {i}: {a} vs {b}"))?;
        let strong_joint = Formula::forall("x", Formula::strong_and(vec![phi.clone(), psi.clone()]));
        let strong_split = Formula::strong_and(vec![Formula::forall("x", phi), Formula::forall("x", psi)]);
        if truth_value(&s, &strong_joint).unwrap() != truth_value(&s, &strong_split).unwrap() {
            strong_differs += 1;
        }
    }
    ensure(strong_differs > 0, || "strong conjunction never failed to distribute".into())?;
    Ok(format!("{n} triples equal; strong analogue differs on {strong_differs}"))
}

fn main() {
    let results = [
        criterion(1, "counterexample values", Duration::from_secs(1), counterexample),
        criterion(2, "example clause corpus", Duration::from_secs(1), example_corpus),
        criterion(3, "term structure is a reduced model", Duration::from_secs(60), term_model_is_reduced_model),
        criterion(4, "fixpoint equals grid oracle", Duration::from_secs(120), oracle_equivalence),
        criterion(5, "conjunction value below truth degree", Duration::from_secs(60), conjunction_inequality),
        criterion(6, "free homomorphism", Duration::from_secs(120), free_homomorphisms),
        criterion(7, "fixpoint engineering", Duration::from_secs(30), fixpoint_engineering),
        criterion(8, "weak conjunction distributes", Duration::from_secs(30), weak_conjunction_distribution),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
