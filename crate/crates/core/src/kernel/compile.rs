use fixedbitset::FixedBitSet;

use super::{run_gi, DeadRuleCheck, KernelError, Lattice, Options, PropRule};

/// A rule set together with its friends and obviated lists.
///
/// Immutable once built; share it freely between independent runs.
#[derive(Debug, Clone)]
pub struct CompiledRuleSet<R> {
    rules: Vec<R>,
    friends: Vec<Vec<usize>>,
    obviated: Vec<Vec<usize>>,
    removal: Vec<FixedBitSet>,
}

/// Computes friends and obviated lists for every rule.
///
/// For a rule `b → g` with witness `w`, the generic iteration is run from
/// `g(w)`. Its friends are the rules that changed the element during that
/// run, in firing order. Its obviated list holds, in index order, every other
/// rule whose body fixes the reached fixpoint `d` or whose condition can no
/// longer hold above `d`. The rule itself always lands in its own obviated
/// list.
pub fn compile<L, R>(rules: Vec<R>, lattice: &L) -> Result<CompiledRuleSet<R>, KernelError>
where
    L: Lattice + ?Sized,
    R: PropRule<L>,
{
    let n = rules.len();
    let mut friends = Vec::with_capacity(n);
    let mut obviated = Vec::with_capacity(n);
    for (i, rule) in rules.iter().enumerate() {
        let w = rule.witness(lattice).ok_or(KernelError::MissingWitness(i))?;
        let start = rule.apply_body(lattice, &w);
        let mut relevant = Vec::new();
        let trace = run_gi(&rules, lattice, start, &Options::default(), &mut (), |j| {
            relevant.push(j)
        });
        let d = trace.final_store;
        relevant.retain(|&j| j != i);

        let mut is_friend = FixedBitSet::with_capacity(n);
        is_friend.extend(relevant.iter().copied());
        let obv: Vec<usize> = (0..n)
            .filter(|&j| !is_friend.contains(j))
            .filter(|&j| {
                let other = &rules[j];
                lattice.is_top(&d)
                    || other.apply_body(lattice, &d) == d
                    || !other.can_ever_hold_above(lattice, &d, DeadRuleCheck::Always)
            })
            .collect();
        friends.push(relevant);
        obviated.push(obv);
    }
    CompiledRuleSet::from_parts(rules, friends, obviated)
}

impl<R> CompiledRuleSet<R> {
    /// Assembles a compiled set from precomputed lists, checking the
    /// structural invariants (indices in range, a rule is never its own
    /// friend but always obviated by itself, the two lists are disjoint).
    pub fn from_parts(
        rules: Vec<R>,
        friends: Vec<Vec<usize>>,
        obviated: Vec<Vec<usize>>,
    ) -> Result<Self, KernelError> {
        let n = rules.len();
        let bad = |rule, reason: &str| KernelError::InvalidTable {
            rule,
            reason: reason.to_string(),
        };
        if friends.len() != n || obviated.len() != n {
            return Err(bad(n, "table length differs from rule count"));
        }
        let mut removal = Vec::with_capacity(n);
        for i in 0..n {
            let mut f = FixedBitSet::with_capacity(n);
            for &j in &friends[i] {
                if j >= n {
                    return Err(bad(i, "friend index out of range"));
                }
                if f.put(j) {
                    return Err(bad(i, "duplicate friend"));
                }
            }
            if f.contains(i) {
                return Err(bad(i, "rule listed as its own friend"));
            }
            let mut o = FixedBitSet::with_capacity(n);
            for &j in &obviated[i] {
                if j >= n {
                    return Err(bad(i, "obviated index out of range"));
                }
                if o.put(j) {
                    return Err(bad(i, "duplicate obviated entry"));
                }
            }
            if !o.contains(i) {
                return Err(bad(i, "rule missing from its own obviated list"));
            }
            if !f.is_disjoint(&o) {
                return Err(bad(i, "friends and obviated overlap"));
            }
            f.union_with(&o);
            removal.push(f);
        }
        Ok(Self {
            rules,
            friends,
            obviated,
            removal,
        })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[R] {
        &self.rules
    }

    pub fn into_rules(self) -> Vec<R> {
        self.rules
    }

    pub fn friends(&self, i: usize) -> &[usize] {
        &self.friends[i]
    }

    pub fn obviated(&self, i: usize) -> &[usize] {
        &self.obviated[i]
    }

    /// `friends(i) ∪ obviated(i)` as a bitset.
    pub fn removal_set(&self, i: usize) -> &FixedBitSet {
        &self.removal[i]
    }

    pub fn union_size(&self, i: usize) -> usize {
        self.removal[i].count_ones(..)
    }

    /// `|friends(i) ∪ obviated(i)| / |rules|`.
    pub fn solving_degree(&self, i: usize) -> f64 {
        self.union_size(i) as f64 / self.len() as f64
    }

    /// Firing a solving rule leaves no live rule behind.
    pub fn is_solving(&self, i: usize) -> bool {
        self.union_size(i) == self.len()
    }

    /// The live set containing every rule.
    pub fn full_live(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.len());
        s.insert_range(..);
        s
    }
}
