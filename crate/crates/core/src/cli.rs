//! Command-line interface.
//!
//! Exit codes: 0 on success or agreement, 1 on a semantic failure (not Horn,
//! not a model, disagreement, oracle cap), 2 on usage, I/O or parse errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

use crate::algebra::Rational01;
use crate::oracle::{oracle_min_model, Grid, DEFAULT_CAP};
use crate::parser::{parse_formula, parse_structure, parse_theory, TheoryFile};
use crate::semantics::{check_similarity_axioms, is_model, is_reduced, truth_value, FiniteStructure, Valuation};
use crate::syntax::{classify_horn, free_vars, rank, Formula};
use crate::term_model::{free_homomorphism, solve, GroundAtom, Solution, SolveOptions, DEFAULT_DEPTH};

#[derive(Debug, Parser)]
#[command(name = "fuzzy-horn", version, about = "Horn theories over rational Łukasiewicz predicate logic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print only the essential result.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every formula of a theory as Horn or not.
    Check {
        #[arg(long)]
        theory: PathBuf,
    },
    /// Truth value of a formula in a finite structure.
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
    },
    /// Build the term structure of a Horn theory.
    Solve(SolveArgs),
    /// Map the term structure into a reduced model.
    Freehom {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        structure: PathBuf,
    },
    /// Compare fixpoint degrees with the brute-force grid oracle.
    Oracle {
        #[command(flatten)]
        solve: SolveArgs,
        /// Grid denominator; defaults to the lcm of the theory's denominators.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        grid: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub theory: PathBuf,
    /// Depth bound of the Herbrand universe.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
}

const DECIMAL_PLACES: usize = 6;

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn semantic(message: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_theory(path: &Path) -> Result<TheoryFile, Failure> {
    parse_theory(&read(path)?).map_err(|e| usage(format!("{}:{e}", path.display())))
}

fn load_structure(path: &Path) -> Result<FiniteStructure, Failure> {
    let file = parse_structure(&read(path)?).map_err(|e| usage(format!("{}:{e}", path.display())))?;
    FiniteStructure::from_file(&file).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn formulas(theory: &TheoryFile) -> Vec<Formula> {
    theory.formulas.iter().map(|f| f.formula.clone()).collect()
}

/// Exact fraction followed by a decimal rendering, marked `~` when the
/// decimal is cut off after six places.
pub fn render_degree(r: &Rational01) -> String {
    let full = r.to_decimal(DECIMAL_PLACES);
    let exact = r.to_big() * BigRational::from_integer(BigInt::from(10u32).pow(DECIMAL_PLACES as u32));
    if exact.is_integer() {
        let trimmed = full.trim_end_matches('0').trim_end_matches('.');
        format!("{r} ({trimmed})")
    } else {
        format!("{r} (~{full})")
    }
}

/// Output of one command: report text and exit code.
struct Report {
    text: String,
    code: i32,
}

fn cmd_check(theory: &Path, quiet: bool) -> Result<Report, Failure> {
    let th = load_theory(theory)?;
    let mut text = String::new();
    let mut all_horn = true;
    for f in &th.formulas {
        let line = match classify_horn(&f.formula, false) {
            Ok((kind, _)) => {
                let open = free_vars(&f.formula);
                let mut line = format!("{}: {kind}, rank {}", f.name, rank(&f.formula));
                if !open.is_empty() {
                    let vars: Vec<&str> = open.iter().map(String::as_str).collect();
                    line.push_str(&format!(", closed over {{{}}}", vars.join(", ")));
                }
                line
            }
            Err(e) => {
                all_horn = false;
                format!("{}: NotHorn (line {}), {e}", f.name, f.line)
            }
        };
        if !quiet {
            text.push_str(&line);
            text.push('\n');
        }
    }
    text.push_str(if all_horn { "all Horn\n" } else { "not Horn\n" });
    Ok(Report {
        text,
        code: if all_horn { 0 } else { 1 },
    })
}

fn cmd_eval(structure: &Path, formula: &str, quiet: bool) -> Result<Report, Failure> {
    let s = load_structure(structure)?;
    let f = parse_formula(formula, s.signature()).map_err(|e| usage(format!("formula:{e}")))?;
    let value = truth_value(&s, &f).map_err(usage)?;
    let text = if quiet {
        format!("{value}\n")
    } else {
        format!("{}\n", render_degree(&value))
    };
    Ok(Report { text, code: 0 })
}

fn run_solve(args: &SolveArgs) -> Result<(TheoryFile, Solution), Failure> {
    let th = load_theory(&args.theory)?;
    let sol = solve(&th.signature, &formulas(&th), &SolveOptions::with_depth(args.depth)).map_err(semantic)?;
    Ok((th, sol))
}

/// Number of atoms over the smaller universe whose degree changes when the
/// depth bound grows by one, or `None` if the deeper universe is too large.
fn depth_drift(th: &TheoryFile, sol: &Solution) -> Option<usize> {
    let u = sol.universe();
    let deeper = solve(&th.signature, &formulas(th), &SolveOptions::with_depth(u.depth() + 1)).ok()?;
    let du = deeper.universe();
    let changed = sol
        .degrees()
        .iter()
        .filter(|(atom, d)| {
            let args: Vec<usize> = atom.args.iter().map(|&i| du.index_of(u.term(i)).expect("subuniverse")).collect();
            deeper.degree(&GroundAtom::new(&atom.predicate, args)) != **d
        })
        .count();
    Some(changed)
}

fn cmd_solve(args: &SolveArgs, quiet: bool) -> Result<Report, Failure> {
    let (th, sol) = run_solve(args)?;
    let s = sol.term_structure.structure();
    let model = is_model(s, &sol.theory()).map_err(semantic)?;
    let reduced = is_reduced(s);
    let axioms = check_similarity_axioms(s);
    let mut text = String::new();
    if !quiet {
        let u = sol.universe();
        text.push_str(&format!("# depth {}, {} terms, {} classes\n", u.depth(), u.len(), sol.term_structure.classes().len()));
        if let Some(c) = &sol.injected {
            text.push_str(&format!("# no constants declared; added `{c}`\n"));
        }
        text.push_str(&format!("# is_model: {}\n", model.holds()));
        text.push_str(&format!("# is_reduced: {reduced}\n"));
        match &axioms {
            Ok(()) => text.push_str("# similarity axioms: hold\n"),
            Err(v) => text.push_str(&format!("# similarity axioms: {v}\n")),
        }
        if th.signature.functions().any(|(_, a)| a > 0) {
            match depth_drift(&th, &sol) {
                Some(0) => text.push_str(&format!("# depth check: stable at depth {}\n", u.depth() + 1)),
                Some(k) => text.push_str(&format!(
                    "# depth check: {k} atom degree(s) change at depth {}; results are truncated\n",
                    u.depth() + 1
                )),
                None => text.push_str("# depth check: skipped\n"),
            }
        }
    }
    text.push_str(&sol.term_structure.listing());
    let ok = model.holds() && reduced && axioms.is_ok();
    Ok(Report {
        text,
        code: if ok { 0 } else { 1 },
    })
}

fn cmd_freehom(args: &SolveArgs, structure: &Path, quiet: bool) -> Result<Report, Failure> {
    let (_, sol) = run_solve(args)?;
    let n = load_structure(structure)?;
    let ts = &sol.term_structure;
    let g = free_homomorphism(ts, &sol.theory(), &n, &Valuation::new()).map_err(semantic)?;
    let mut text = String::new();
    if !quiet {
        for (c, &e) in g.map.iter().enumerate() {
            text.push_str(&format!("{} -> {}\n", ts.structure().domain()[c], n.domain()[e]));
        }
        if g.skipped_boundary > 0 {
            text.push_str(&format!("# {} saturated function entries not checked\n", g.skipped_boundary));
        }
    }
    text.push_str("homomorphism: pass\n");
    Ok(Report { text, code: 0 })
}

fn cmd_oracle(args: &SolveArgs, grid: Option<u64>, quiet: bool) -> Result<Report, Failure> {
    let (th, sol) = run_solve(args)?;
    let theory = formulas(&th);
    let grid = match grid {
        Some(d) => Grid::new(d).map_err(usage)?,
        None => Grid::for_formulas(&theory),
    };
    let u = sol.universe();
    let oracle = oracle_min_model(&sol.theory(), u, grid, DEFAULT_CAP).map_err(semantic)?;
    let mut text = String::new();
    let mut agree = true;
    for (atom, o) in &oracle {
        let f = sol.degree(atom);
        let same = f == *o;
        agree &= same;
        if !quiet || !same {
            let mark = if same { "" } else { "  MISMATCH" };
            text.push_str(&format!("{}: fixpoint {f}, oracle {o}{mark}\n", u.display_atom(atom)));
        }
    }
    text.push_str(&format!("grid 1/{}\n", grid.denominator()));
    text.push_str(if agree { "AGREE\n" } else { "DISAGREE\n" });
    Ok(Report {
        text,
        code: if agree { 0 } else { 1 },
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `out` (or `--out`), diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let q = cli.quiet;
    let result = match &cli.command {
        Command::Check { theory } => cmd_check(theory, q),
        Command::Eval { structure, formula } => cmd_eval(structure, formula, q),
        Command::Solve(args) => cmd_solve(args, q),
        Command::Freehom { solve, structure } => cmd_freehom(solve, structure, q),
        Command::Oracle { solve, grid } => cmd_oracle(solve, *grid, q),
    };
    match result {
        Ok(report) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &report.text).map_err(|e| format!("{}: {e}", path.display())),
                None => out.write_all(report.text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => report.code,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    2
                }
            }
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
