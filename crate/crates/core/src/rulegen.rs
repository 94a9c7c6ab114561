//! Brute-force generation of minimal valid membership and equality rules
//! for a constraint given as a tuple list.
//!
//! A rule is valid for a constraint when applying it can never remove a
//! value that occurs in a solution consistent with the store. Generation
//! works one body atom at a time: an atom `z ≠ a` is kept for a condition
//! set when
//!
//! * the condition matches at least one tuple,
//! * `z` is not a condition variable and no matched tuple has `z = a`,
//! * no single condition can be relaxed without losing validity. For
//!   membership rules a relaxation adds one value to an allowed set (an
//!   allowed set that reaches the full universe drops the condition); for
//!   equality rules it drops the condition.
//!
//! Atoms with identical condition sets are then merged into one rule.

use std::collections::{BTreeMap, HashSet};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::memrules::{Condition, MembershipRule, Removal};
use crate::store::{DomainSet, Signature, Store};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("constraint `{0}` has no tuples")]
    EmptyTupleSet(String),
    #[error("tuple {index} has {found} values, expected {expected}")]
    TupleArity {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("tuple {index} has a value outside the universe of variable {var}")]
    ValueOutOfRange { index: usize, var: usize },
    #[error("tuple {index} repeats an earlier tuple")]
    DuplicateTuple { index: usize },
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}

/// A constraint given extensionally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintDef {
    name: String,
    signature: Signature,
    tuples: Vec<Vec<usize>>,
}

impl ConstraintDef {
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        tuples: Vec<Vec<usize>>,
    ) -> Result<Self, GenError> {
        let name = name.into();
        if tuples.is_empty() {
            return Err(GenError::EmptyTupleSet(name));
        }
        let arity = signature.arity();
        let mut seen = HashSet::new();
        for (index, t) in tuples.iter().enumerate() {
            if t.len() != arity {
                return Err(GenError::TupleArity {
                    index,
                    expected: arity,
                    found: t.len(),
                });
            }
            if let Some(var) = (0..arity).find(|&v| t[v] >= signature.universe(v).len()) {
                return Err(GenError::ValueOutOfRange { index, var });
            }
            if !seen.insert(t.as_slice()) {
                return Err(GenError::DuplicateTuple { index });
            }
        }
        Ok(Self {
            name,
            signature,
            tuples,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.signature.arity()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.tuples.iter().any(|u| u == t)
    }

    /// Tuples whose every value lies in the matching domain of `s`.
    pub fn consistent_tuples<'a>(&'a self, s: &'a Store) -> impl Iterator<Item = &'a Vec<usize>> {
        self.tuples.iter().filter(move |t| match s {
            Store::Top => false,
            Store::Domains(d) => t.iter().zip(d).all(|(&v, dom)| dom.contains(v)),
        })
    }
}

/// Whether every tuple satisfying the condition of `rule` avoids all its
/// body atoms.
pub fn is_valid(rule: &MembershipRule, c: &ConstraintDef) -> bool {
    c.tuples.iter().all(|t| {
        let matched = rule.conditions().iter().all(|k| k.allowed.contains(t[k.var]));
        !matched || rule.body().iter().all(|r| t[r.var] != r.value)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Equality,
    Membership,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenLimits {
    pub max_arity: usize,
    pub max_universe: usize,
    /// Upper bound on the number of candidate conditions enumerated.
    pub max_candidates: u64,
}

impl Default for GenLimits {
    fn default() -> Self {
        Self {
            max_arity: 6,
            max_universe: 11,
            max_candidates: 1 << 24,
        }
    }
}

pub fn generate_equality_rules(c: &ConstraintDef) -> Result<Vec<MembershipRule>, GenError> {
    generate(c, RuleKind::Equality, &GenLimits::default())
}

pub fn generate_membership_rules(c: &ConstraintDef) -> Result<Vec<MembershipRule>, GenError> {
    generate(c, RuleKind::Membership, &GenLimits::default())
}

/// Number of candidate conditions the generator would enumerate.
pub fn candidate_count(sig: &Signature, kind: RuleKind) -> u128 {
    sig.universes()
        .iter()
        .map(|u| {
            let k = u.len() as u128;
            1 + match kind {
                RuleKind::Equality => k,
                RuleKind::Membership => (1u128 << k).saturating_sub(2),
            }
        })
        .fold(1u128, |acc, x| acc.saturating_mul(x))
}

/// Number of conditions, then `(var, allowed bits)` pairs.
type ConditionKey = (usize, Vec<(usize, u64)>);

/// Generates all minimal valid rules of the given kind, merged by condition
/// set. Rules come ordered by number of conditions, then condition
/// variables, then allowed sets; body atoms by variable and value.
pub fn generate(
    c: &ConstraintDef,
    kind: RuleKind,
    limits: &GenLimits,
) -> Result<Vec<MembershipRule>, GenError> {
    let sig = &c.signature;
    if sig.arity() > limits.max_arity {
        return Err(GenError::SizeLimit(format!(
            "arity {} exceeds {}",
            sig.arity(),
            limits.max_arity
        )));
    }
    if let Some(u) = sig.universes().iter().find(|u| u.len() > limits.max_universe) {
        return Err(GenError::SizeLimit(format!(
            "universe of {} values exceeds {}",
            u.len(),
            limits.max_universe
        )));
    }
    let candidates = candidate_count(sig, kind);
    if candidates > limits.max_candidates as u128 {
        return Err(GenError::SizeLimit(format!(
            "{candidates} candidate conditions exceed {}",
            limits.max_candidates
        )));
    }

    let gen = Generator::new(c, kind);
    let mut found: BTreeMap<ConditionKey, Vec<Removal>> = BTreeMap::new();
    let arity = sig.arity();
    for size in 0..=arity {
        for vars in combinations(arity, size) {
            gen.enumerate(&vars, &mut |conds, body| {
                let key = (
                    conds.len(),
                    conds.iter().map(|k| (k.var, k.allowed.bits())).collect(),
                );
                found.entry(key).or_default().extend(body);
            });
        }
    }
    // BTreeMap order is (size, vars then masks), which is the documented order.
    Ok(found
        .into_iter()
        .map(|((_, conds), mut body)| {
            body.sort();
            let conditions = conds
                .into_iter()
                .map(|(var, bits)| Condition {
                    var,
                    allowed: DomainSet::from_bits(bits),
                })
                .collect();
            MembershipRule::new(conditions, body).expect("generated body is never empty")
        })
        .collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

struct Generator<'a> {
    c: &'a ConstraintDef,
    kind: RuleKind,
    /// `column[var][value]`: tuples with `t[var] = value`.
    column: Vec<Vec<FixedBitSet>>,
    all: FixedBitSet,
}

impl<'a> Generator<'a> {
    fn new(c: &'a ConstraintDef, kind: RuleKind) -> Self {
        let n = c.tuples.len();
        let column = (0..c.arity())
            .map(|v| {
                (0..c.signature.universe(v).len())
                    .map(|a| {
                        let mut s = FixedBitSet::with_capacity(n);
                        s.extend(
                            c.tuples
                                .iter()
                                .enumerate()
                                .filter(|(_, t)| t[v] == a)
                                .map(|(i, _)| i),
                        );
                        s
                    })
                    .collect()
            })
            .collect();
        let mut all = FixedBitSet::with_capacity(n);
        all.insert_range(..);
        Self { c, kind, column, all }
    }

    fn universe_len(&self, var: usize) -> usize {
        self.c.signature.universe(var).len()
    }

    /// Tuples matching `var ∈ allowed`.
    fn matching(&self, var: usize, allowed: DomainSet) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.all.len());
        for a in allowed.iter() {
            s.union_with(&self.column[var][a]);
        }
        s
    }

    fn choices(&self, var: usize) -> Vec<DomainSet> {
        let k = self.universe_len(var);
        match self.kind {
            RuleKind::Equality => (0..k).map(DomainSet::singleton).collect(),
            RuleKind::Membership => DomainSet::nonempty_subsets(k).filter(|s| s.len() < k).collect(),
        }
    }

    /// Relaxations of one condition; `None` drops it.
    fn relaxations(&self, cond: Condition) -> Vec<Option<DomainSet>> {
        let full = DomainSet::full(self.universe_len(cond.var));
        match self.kind {
            RuleKind::Equality => vec![None],
            RuleKind::Membership => full
                .iter()
                .filter(|&b| !cond.allowed.contains(b))
                .map(|b| {
                    let s = cond.allowed.with(b);
                    (s != full).then_some(s)
                })
                .collect(),
        }
    }

    fn enumerate(&self, vars: &[usize], emit: &mut impl FnMut(&[Condition], Vec<Removal>)) {
        let mut conds = Vec::with_capacity(vars.len());
        let mut matched = vec![self.all.clone()];
        self.rec(vars, &mut conds, &mut matched, emit);
    }

    fn rec(
        &self,
        vars: &[usize],
        conds: &mut Vec<Condition>,
        matched: &mut Vec<FixedBitSet>,
        emit: &mut impl FnMut(&[Condition], Vec<Removal>),
    ) {
        let depth = conds.len();
        let current = &matched[depth];
        if current.is_clear() {
            return;
        }
        if depth == vars.len() {
            let body = self.minimal_atoms(conds, current);
            if !body.is_empty() {
                emit(conds, body);
            }
            return;
        }
        let var = vars[depth];
        for allowed in self.choices(var) {
            let mut m = self.matching(var, allowed);
            m.intersect_with(&matched[depth]);
            conds.push(Condition { var, allowed });
            matched.push(m);
            self.rec(vars, conds, matched, emit);
            matched.pop();
            conds.pop();
        }
    }

    fn minimal_atoms(&self, conds: &[Condition], matched: &FixedBitSet) -> Vec<Removal> {
        let cond_vars: Vec<usize> = conds.iter().map(|k| k.var).collect();
        let mut atoms: Vec<Removal> = Vec::new();
        for z in (0..self.c.arity()).filter(|z| !cond_vars.contains(z)) {
            for a in 0..self.universe_len(z) {
                if matched.is_disjoint(&self.column[z][a]) {
                    atoms.push(Removal { var: z, value: a });
                }
            }
        }
        if atoms.is_empty() {
            return atoms;
        }
        // Tuples matched by each relaxed condition set.
        let mut relaxed: Vec<FixedBitSet> = Vec::new();
        for (i, &cond) in conds.iter().enumerate() {
            let mut others = self.all.clone();
            for (j, k) in conds.iter().enumerate() {
                if j != i {
                    others.intersect_with(&self.matching(k.var, k.allowed));
                }
            }
            for r in self.relaxations(cond) {
                let mut m = others.clone();
                if let Some(s) = r {
                    m.intersect_with(&self.matching(cond.var, s));
                }
                relaxed.push(m);
            }
        }
        atoms.retain(|r| {
            relaxed
                .iter()
                .all(|m| !m.is_disjoint(&self.column[r.var][r.value]))
        });
        atoms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;

    /// All valid single-atom rules by direct enumeration, then filtered for
    /// minimality by comparing against every other valid candidate.
    fn oracle(c: &ConstraintDef, kind: RuleKind) -> Vec<MembershipRule> {
        let sig = c.signature();
        let n = c.arity();
        let mut valid: Vec<(Vec<Option<DomainSet>>, Removal)> = Vec::new();
        let per_var: Vec<Vec<Option<DomainSet>>> = (0..n)
            .map(|v| {
                let k = sig.universe(v).len();
                let mut opts = vec![None];
                match kind {
                    RuleKind::Equality => opts.extend((0..k).map(|a| Some(DomainSet::singleton(a)))),
                    RuleKind::Membership => {
                        opts.extend(DomainSet::nonempty_subsets(k).filter(|s| s.len() < k).map(Some))
                    }
                }
                opts
            })
            .collect();
        let mut idx = vec![0usize; n];
        loop {
            let cond: Vec<Option<DomainSet>> = (0..n).map(|v| per_var[v][idx[v]]).collect();
            let m: Vec<&Vec<usize>> = c
                .tuples()
                .iter()
                .filter(|t| (0..n).all(|v| cond[v].is_none_or(|s| s.contains(t[v]))))
                .collect();
            if !m.is_empty() {
                for z in (0..n).filter(|&z| cond[z].is_none()) {
                    for a in 0..sig.universe(z).len() {
                        if m.iter().all(|t| t[z] != a) {
                            valid.push((cond.clone(), Removal { var: z, value: a }));
                        }
                    }
                }
            }
            let mut v = 0;
            loop {
                if v == n {
                    let mut out: Vec<MembershipRule> = Vec::new();
                    // Weaker: every allowed set contains the other's.
                    let weaker = |a: &[Option<DomainSet>], b: &[Option<DomainSet>]| {
                        a != b
                            && a.iter().zip(b).all(|(x, y)| match (x, y) {
                                (None, _) => true,
                                (Some(_), None) => false,
                                (Some(s), Some(t)) => t.is_subset(*s),
                            })
                    };
                    for (cond, atom) in &valid {
                        let dominated = valid.iter().any(|(c2, a2)| a2 == atom && weaker(c2, cond));
                        if !dominated {
                            let conditions = cond
                                .iter()
                                .enumerate()
                                .filter_map(|(var, s)| s.map(|allowed| Condition { var, allowed }))
                                .collect();
                            out.push(MembershipRule::new(conditions, vec![*atom]).unwrap());
                        }
                    }
                    return out;
                }
                idx[v] += 1;
                if idx[v] < per_var[v].len() {
                    break;
                }
                idx[v] = 0;
                v += 1;
            }
        }
    }

    fn atoms(rules: &[MembershipRule]) -> HashSet<MembershipRule> {
        rules.iter().flat_map(|r| r.atomic_parts()).collect()
    }

    #[test]
    fn generator_matches_oracle_on_library() {
        for c in library::all() {
            for kind in [RuleKind::Equality, RuleKind::Membership] {
                let gen = generate(&c, kind, &GenLimits::default()).unwrap();
                assert_eq!(atoms(&gen), atoms(&oracle(&c, kind)), "{} {kind:?}", c.name());
                for r in &gen {
                    assert!(is_valid(r, &c));
                    assert!(r.validate(c.signature()).is_ok());
                }
            }
        }
    }

    #[test]
    fn golden_counts() {
        let count = |c: &ConstraintDef, kind| generate(c, kind, &GenLimits::default()).unwrap().len();
        assert_eq!(count(&library::c4(), RuleKind::Equality), 11);
        assert_eq!(count(&library::and2(), RuleKind::Equality), 6);
        assert_eq!(count(&library::equ3(), RuleKind::Membership), 26);
        assert_eq!(count(&library::equ3(), RuleKind::Equality), 20);
        assert_eq!(count(&library::and3(), RuleKind::Equality), 16);
        assert_eq!(count(&library::and3(), RuleKind::Membership), 18);
    }

    #[test]
    fn validity_examples() {
        let c = library::c4();
        let eq = |var, value| Condition {
            var,
            allowed: DomainSet::singleton(value),
        };
        let r11 = MembershipRule::new(vec![eq(0, 1), eq(3, 1)], vec![Removal { var: 1, value: 1 }]).unwrap();
        assert!(is_valid(&r11, &c));
        let weak = MembershipRule::new(vec![eq(0, 1)], vec![Removal { var: 1, value: 1 }]).unwrap();
        assert!(!is_valid(&weak, &c));
        // x1 = 0 and x2 = 0 match no tuple.
        let vacuous =
            MembershipRule::new(vec![eq(0, 0), eq(1, 0)], vec![Removal { var: 2, value: 0 }]).unwrap();
        assert!(is_valid(&vacuous, &c));
    }

    #[test]
    fn full_product_has_no_rules() {
        let sig = Signature::uniform(2, crate::store::Universe::range(2).unwrap());
        let tuples = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let c = ConstraintDef::new("any", sig, tuples).unwrap();
        assert!(generate_membership_rules(&c).unwrap().is_empty());
        assert!(generate_equality_rules(&c).unwrap().is_empty());
    }

    #[test]
    fn size_limits() {
        let sig = Signature::uniform(7, crate::store::Universe::range(2).unwrap());
        let c = ConstraintDef::new("wide", sig, vec![vec![0; 7]]).unwrap();
        assert!(matches!(generate_equality_rules(&c), Err(GenError::SizeLimit(_))));
        let sig = Signature::uniform(3, crate::store::Universe::range(11).unwrap());
        let c = ConstraintDef::new("big", sig, vec![vec![0; 3]]).unwrap();
        assert!(matches!(
            generate_membership_rules(&c),
            Err(GenError::SizeLimit(_))
        ));
        assert!(generate_equality_rules(&c).is_ok());
    }

    #[test]
    fn constraint_validation() {
        let sig = Signature::uniform(2, crate::store::Universe::range(2).unwrap());
        assert!(matches!(
            ConstraintDef::new("e", sig.clone(), vec![]),
            Err(GenError::EmptyTupleSet(_))
        ));
        assert!(matches!(
            ConstraintDef::new("e", sig.clone(), vec![vec![0]]),
            Err(GenError::TupleArity { .. })
        ));
        assert!(matches!(
            ConstraintDef::new("e", sig.clone(), vec![vec![0, 2]]),
            Err(GenError::ValueOutOfRange { index: 0, var: 1 })
        ));
        assert!(matches!(
            ConstraintDef::new("e", sig, vec![vec![0, 1], vec![0, 1]]),
            Err(GenError::DuplicateTuple { index: 1 })
        ));
    }
}
