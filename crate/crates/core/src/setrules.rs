//! Ground proof rules `B → G` over the powerset of a finite atom set.
//!
//! The lattice is `(P(A), ⊆)` with `∅` as bottom and `A` as top. A rule
//! holds at `E` when `B ⊆ E` and maps `E` to `E ∪ G`; its witness is `B`.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::kernel::{self, DeadRuleCheck, FiniteLattice, KernelError, Lattice, PropRule};

/// A subset of the atom universe.
pub type AtomSet = FixedBitSet;

/// The powerset of `atoms` ordered by inclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowersetLattice {
    atoms: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetRuleError {
    #[error("line {line}: expected `premises -> conclusions`")]
    MissingArrow { line: usize },
    #[error("line {line}: `{token}` is not an identifier")]
    BadAtom { line: usize, token: String },
    #[error("line {line}: atom `{atom}` is not declared")]
    UnknownAtom { line: usize, atom: String },
    #[error("atom `{0}` declared twice")]
    DuplicateAtom(String),
}

impl PowersetLattice {
    pub fn new<I, S>(atoms: I) -> Result<Self, SetRuleError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, a) in atoms.iter().enumerate() {
            if index.insert(a.clone(), i).is_some() {
                return Err(SetRuleError::DuplicateAtom(a.clone()));
            }
        }
        Ok(Self { atoms, index })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn empty_set(&self) -> AtomSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn set_of<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Option<AtomSet> {
        let mut s = self.empty_set();
        for n in names {
            s.insert(self.atom(n)?);
        }
        Some(s)
    }

    pub fn names(&self, s: &AtomSet) -> Vec<&str> {
        s.ones().map(|i| self.atoms[i].as_str()).collect()
    }
}

impl Lattice for PowersetLattice {
    type Elem = AtomSet;

    fn bottom(&self) -> AtomSet {
        self.empty_set()
    }

    fn is_top(&self, e: &AtomSet) -> bool {
        e.count_ones(..) == self.len()
    }

    fn leq(&self, a: &AtomSet, b: &AtomSet) -> bool {
        a.is_subset(b)
    }
}

impl FiniteLattice for PowersetLattice {
    fn elements(&self) -> Vec<AtomSet> {
        let n = self.len();
        assert!(n < 24, "powerset of {n} atoms is too large to enumerate");
        (0u32..1 << n)
            .map(|bits| {
                let mut s = self.empty_set();
                s.extend((0..n).filter(|i| bits >> i & 1 == 1));
                s
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetRule {
    pub premises: AtomSet,
    pub conclusions: AtomSet,
}

impl PropRule<PowersetLattice> for SetRule {
    fn holds(&self, _: &PowersetLattice, e: &AtomSet) -> bool {
        self.premises.is_subset(e)
    }

    // Every atom can still be added, so a condition never becomes dead
    // below A itself.
    fn can_ever_hold_above(&self, _: &PowersetLattice, _: &AtomSet, _: DeadRuleCheck) -> bool {
        true
    }

    fn apply_body(&self, _: &PowersetLattice, e: &AtomSet) -> AtomSet {
        let mut out = e.clone();
        out.union_with(&self.conclusions);
        out
    }

    fn witness(&self, _: &PowersetLattice) -> Option<AtomSet> {
        Some(self.premises.clone())
    }
}

/// The least superset of `initial` closed under `rules`, computed with the
/// rule scheduler after friends/obviated precomputation.
pub fn closure(
    rules: &[SetRule],
    lattice: &PowersetLattice,
    initial: &AtomSet,
) -> Result<AtomSet, KernelError> {
    let compiled = kernel::compile(rules.to_vec(), lattice)?;
    let live = compiled.full_live();
    Ok(kernel::r_fixpoint(&compiled, lattice, initial.clone(), &live)?.final_store)
}

/// Parses `p q -> r s` lines; `#` starts a comment. Atoms must be declared
/// in `lattice`.
pub fn parse_rules(text: &str, lattice: &PowersetLattice) -> Result<Vec<SetRule>, SetRuleError> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or(SetRuleError::MissingArrow { line: line_no })?;
        let side = |s: &str| -> Result<AtomSet, SetRuleError> {
            let mut set = lattice.empty_set();
            for tok in s.split_whitespace() {
                let ident = tok.chars().all(|c| c.is_alphanumeric() || c == '_')
                    && !tok.starts_with(|c: char| c.is_ascii_digit());
                if !ident {
                    return Err(SetRuleError::BadAtom {
                        line: line_no,
                        token: tok.to_string(),
                    });
                }
                let a = lattice.atom(tok).ok_or_else(|| SetRuleError::UnknownAtom {
                    line: line_no,
                    atom: tok.to_string(),
                })?;
                set.insert(a);
            }
            Ok(set)
        };
        rules.push(SetRule {
            premises: side(lhs)?,
            conclusions: side(rhs)?,
        });
    }
    Ok(rules)
}
