//! Brute-force least models over grid-valued Herbrand interpretations.
//!
//! Every assignment of degrees from `{0, 1/D, …, 1}` to the ground atoms of
//! a universe is tried; those satisfying the theory and the similarity
//! axioms are the grid models. For a Horn theory whose constants lie on the
//! grid the least model is itself on the grid (the operations `⊗` and `→`
//! preserve it), so the pointwise minimum over grid models is the least
//! model.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::algebra::{common_denominator, Rational01};
use crate::semantics::{check_similarity_axioms, is_model, truth_value, EvalError, FiniteStructure};
use crate::syntax::Formula;
use crate::term_model::{AtomBase, DegreeMap, GroundAtom, HerbrandUniverse, UniverseError};

/// Largest number of candidate interpretations tried by default.
pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("grid denominator must be positive")]
    ZeroDenominator,
    #[error("{candidates} candidate interpretations exceed the cap of {cap}")]
    CapExceeded { candidates: String, cap: u64 },
    #[error("degree {value} of the theory is not a multiple of 1/{denominator}")]
    OffGrid { value: Rational01, denominator: u64 },
    #[error("no grid model exists")]
    NoModel,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
}

/// Admissible degrees `{0, 1/D, …, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    denominator: u64,
}

impl Grid {
    pub fn new(denominator: u64) -> Result<Self, OracleError> {
        if denominator == 0 {
            return Err(OracleError::ZeroDenominator);
        }
        Ok(Grid { denominator })
    }

    /// The coarsest grid containing every truth constant of `formulas`.
    pub fn for_formulas<'a, I>(formulas: I) -> Grid
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        let mut constants = Vec::new();
        for f in formulas {
            f.visit_constants(&mut |c| constants.push(c.clone()));
        }
        let d = common_denominator(constants.iter());
        Grid {
            denominator: d.to_u64().expect("denominator fits in u64"),
        }
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn levels(&self) -> Vec<Rational01> {
        (0..=self.denominator)
            .map(|k| Rational01::from_grid(k, self.denominator).expect("k ≤ D"))
            .collect()
    }

    /// Fails on the first truth constant of `formulas` off the grid.
    pub fn check_formulas<'a, I>(&self, formulas: I) -> Result<(), OracleError>
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        let mut off = None;
        for f in formulas {
            f.visit_constants(&mut |c| {
                if off.is_none() && !c.on_grid(self.denominator) {
                    off = Some(c.clone());
                }
            });
        }
        match off {
            Some(value) => Err(OracleError::OffGrid {
                value,
                denominator: self.denominator,
            }),
            None => Ok(()),
        }
    }

    /// `(D+1)^atoms`, if within `cap`.
    fn candidates(&self, atoms: usize, cap: u64) -> Result<u64, OracleError> {
        let count = BigUint::from(self.denominator + 1).pow(atoms as u32);
        count.to_u64().filter(|&c| c <= cap).ok_or_else(|| OracleError::CapExceeded {
            candidates: count.to_string(),
            cap,
        })
    }
}

/// Odometer over grid levels, last position fastest.
struct Odometer {
    digits: Vec<u64>,
    top: u64,
    started: bool,
}

impl Odometer {
    fn new(len: usize, top: u64) -> Self {
        Odometer {
            digits: vec![0; len],
            top,
            started: false,
        }
    }

    /// Advances and returns the lowest position that changed, or `None` once
    /// every assignment has been produced.
    fn advance(&mut self) -> Option<usize> {
        if !self.started {
            self.started = true;
            return Some(0);
        }
        for i in (0..self.digits.len()).rev() {
            if self.digits[i] < self.top {
                self.digits[i] += 1;
                return Some(i);
            }
            self.digits[i] = 0;
        }
        None
    }
}

/// Every grid assignment to `base`, in lexicographic order of levels.
pub struct Interpretations {
    base: Vec<GroundAtom>,
    levels: Vec<Rational01>,
    odometer: Odometer,
}

impl Iterator for Interpretations {
    type Item = DegreeMap;

    fn next(&mut self) -> Option<DegreeMap> {
        self.odometer.advance()?;
        Some(
            self.base
                .iter()
                .zip(&self.odometer.digits)
                .map(|(a, &k)| (a.clone(), self.levels[k as usize].clone()))
                .collect(),
        )
    }
}

pub fn enumerate_interpretations(base: &[GroundAtom], grid: Grid, cap: u64) -> Result<Interpretations, OracleError> {
    grid.candidates(base.len(), cap)?;
    Ok(Interpretations {
        base: base.to_vec(),
        levels: grid.levels(),
        odometer: Odometer::new(base.len(), grid.denominator),
    })
}

/// Predicate-table entries (similarity included) that always receive the
/// same degree, by predicate name and element indices.
pub type Slot = Vec<(String, Vec<usize>)>;

/// Tries every grid assignment to `slots` on top of `template` and calls
/// `visit` on each one that is a model of `theory` satisfying the
/// similarity axioms, together with the grid levels of the slots. Returns
/// the number of models.
pub fn for_each_model<F>(
    template: &FiniteStructure,
    slots: &[Slot],
    grid: Grid,
    theory: &[Formula],
    cap: u64,
    mut visit: F,
) -> Result<usize, OracleError>
where
    F: FnMut(&FiniteStructure, &[u64]),
{
    grid.candidates(slots.len(), cap)?;
    let levels = grid.levels();
    let mut s = template.clone();
    let mut odometer = Odometer::new(slots.len(), grid.denominator);
    let mut found = 0;
    while let Some(changed) = odometer.advance() {
        for i in changed..slots.len() {
            for (p, args) in &slots[i] {
                s.set_predicate(p, args, levels[odometer.digits[i] as usize].clone());
            }
        }
        if is_model(&s, theory)?.holds() && check_similarity_axioms(&s).is_ok() {
            found += 1;
            visit(&s, &odometer.digits);
        }
    }
    Ok(found)
}

type HerbrandSlots = (AtomBase, Vec<Slot>, Vec<Option<usize>>);

/// Slots of the Herbrand structure: one per ordinary atom and one per
/// unordered pair of distinct terms for similarity. Reflexive similarity
/// stays at 1 from the template. Every model is reflexive and symmetric, so
/// no model is lost. For each atom of the base, its slot (if any) is given.
fn herbrand_slots(u: &HerbrandUniverse) -> Result<HerbrandSlots, OracleError> {
    let base = AtomBase::new(u)?;
    let mut slots: Vec<Slot> = Vec::new();
    let mut slot_of = Vec::with_capacity(base.len());
    let mut pair_slot = std::collections::HashMap::new();
    for atom in base.atoms() {
        if !atom.is_similarity() {
            slot_of.push(Some(slots.len()));
            slots.push(vec![(atom.predicate, atom.args)]);
            continue;
        }
        let (a, b) = (atom.args[0], atom.args[1]);
        if a == b {
            slot_of.push(None);
            continue;
        }
        let slot = *pair_slot.entry((a.min(b), a.max(b))).or_insert_with(|| {
            slots.push(Vec::new());
            slots.len() - 1
        });
        slots[slot].push((atom.predicate, atom.args));
        slot_of.push(Some(slot));
    }
    Ok((base, slots, slot_of))
}

/// Pointwise minimum of the atom degrees over all grid Herbrand models.
pub fn oracle_min_model(theory: &[Formula], u: &HerbrandUniverse, grid: Grid, cap: u64) -> Result<DegreeMap, OracleError> {
    grid.check_formulas(theory)?;
    let (base, slots, slot_of) = herbrand_slots(u)?;
    let mut least: Option<Vec<u64>> = None;
    for_each_model(&u.structure(), &slots, grid, theory, cap, |_, digits| match &mut least {
        None => least = Some(digits.to_vec()),
        Some(m) => m.iter_mut().zip(digits).for_each(|(a, &b)| *a = (*a).min(b)),
    })?;
    let least = least.ok_or(OracleError::NoModel)?;
    let levels = grid.levels();
    Ok(base
        .atoms()
        .zip(slot_of)
        .map(|(a, slot)| {
            let d = match slot {
                Some(i) => levels[least[i] as usize].clone(),
                None => Rational01::one(),
            };
            (a, d)
        })
        .collect())
}

/// Minimum truth value of `sentence` over all grid Herbrand models.
pub fn oracle_truth_degree(
    theory: &[Formula],
    sentence: &Formula,
    u: &HerbrandUniverse,
    grid: Grid,
    cap: u64,
) -> Result<Rational01, OracleError> {
    grid.check_formulas(theory)?;
    let (_, slots, _) = herbrand_slots(u)?;
    let mut least: Option<Rational01> = None;
    let mut failure = None;
    for_each_model(&u.structure(), &slots, grid, theory, cap, |s, _| match truth_value(s, sentence) {
        Ok(v) => {
            if least.as_ref().is_none_or(|l| v < *l) {
                least = Some(v);
            }
        }
        Err(e) => failure = Some(e),
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    least.ok_or(OracleError::NoModel)
}
