//! Redundancy testing and rule-set minimization.
//!
//! A rule is redundant with respect to a set `F` when adding it to `F`
//! changes no common fixpoint. For a prop rule `b → g` this is decided by a
//! single fixpoint run: compute `e`, the least common fixpoint of `F` above
//! the witness of `b`; the rule is redundant exactly when `g(e) = e`.

use std::fmt::Write as _;

use crate::kernel::{gi_fixpoint, CompiledRuleSet};
use crate::memrules::MembershipRule;
use crate::store::Signature;

/// Whether `rule` is redundant with respect to `others`.
pub fn is_redundant(rule: &MembershipRule, others: &[MembershipRule], sig: &Signature) -> bool {
    let w = rule.witness(sig);
    let e = gi_fixpoint(others, sig, w).final_store;
    e.is_top() || rule.apply_body(&e) == e
}

/// Order in which atomic conclusions are tested.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SelectionOrder {
    /// Most expensive rules first: more conditions, then larger allowed
    /// sets, then higher rule index. Atoms of one rule in body order.
    #[default]
    Cost,
    /// `(rule, atom)` pairs tested first in the given order; atoms not
    /// listed follow in cost order.
    Explicit(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleStatus {
    Kept,
    Removed,
    PartiallyReduced,
}

impl RuleStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleStatus::Kept => "kept",
            RuleStatus::Removed => "removed",
            RuleStatus::PartiallyReduced => "partially_reduced",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RedundancyReport {
    /// Input rules all of whose atoms were removed.
    pub removed_rules: Vec<usize>,
    /// Removed body-atom indices per input rule.
    pub removed_atoms: Vec<Vec<usize>>,
    /// Surviving atoms re-merged by condition set, in input order.
    pub kept: Vec<MembershipRule>,
    pub total_atoms: usize,
}

impl RedundancyReport {
    pub fn removed_atom_count(&self) -> usize {
        self.removed_atoms.iter().map(Vec::len).sum()
    }

    pub fn kept_atom_count(&self) -> usize {
        self.total_atoms - self.removed_atom_count()
    }

    /// Removed atomic conclusions over all atomic conclusions.
    pub fn ratio(&self) -> f64 {
        if self.total_atoms == 0 {
            0.0
        } else {
            self.removed_atom_count() as f64 / self.total_atoms as f64
        }
    }

    pub fn status(&self, rule: usize, body_len: usize) -> RuleStatus {
        match self.removed_atoms[rule].len() {
            0 => RuleStatus::Kept,
            n if n == body_len => RuleStatus::Removed,
            _ => RuleStatus::PartiallyReduced,
        }
    }

    /// `rule_id,status,removed_atoms,degree`, one row per input rule.
    /// Rule and atom ids are 1-based; removed atoms are `;`-separated.
    /// `degrees` may be empty, leaving the column blank.
    pub fn to_csv(&self, rules: &[MembershipRule], degrees: &[f64]) -> String {
        let mut out = String::from("rule_id,status,removed_atoms,degree\n");
        for (i, r) in rules.iter().enumerate() {
            let atoms: Vec<String> = self.removed_atoms[i]
                .iter()
                .map(|a| (a + 1).to_string())
                .collect();
            let degree = degrees.get(i).map(|d| format!("{d:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                i + 1,
                self.status(i, r.body().len()).as_str(),
                atoms.join(";"),
                degree
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "removed {} of {} atomic conclusions, {} remain (ratio {:.4})",
            self.removed_atom_count(),
            self.total_atoms,
            self.kept_atom_count(),
            self.ratio()
        )
    }
}

/// Removes redundant atomic conclusions in one pass over `order`.
///
/// Each atom is tested against all atoms still present. A kept atom stays
/// non-redundant as later removals only shrink the reference set, so the
/// result is minimal.
pub fn minimize(rules: &[MembershipRule], sig: &Signature, order: &SelectionOrder) -> RedundancyReport {
    let mut atoms: Vec<(usize, usize, MembershipRule)> = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        for (j, part) in r.atomic_parts().into_iter().enumerate() {
            atoms.push((i, j, part));
        }
    }
    let total_atoms = atoms.len();

    let mut cost_order: Vec<usize> = (0..atoms.len()).collect();
    cost_order.sort_by(|&a, &b| {
        let (ra, ja, _) = &atoms[a];
        let (rb, jb, _) = &atoms[b];
        let key = |r: usize| (rules[r].conditions().len(), rules[r].condition_weight(), r);
        key(*rb).cmp(&key(*ra)).then(ja.cmp(jb))
    });
    let sequence: Vec<usize> = match order {
        SelectionOrder::Cost => cost_order,
        SelectionOrder::Explicit(pairs) => {
            let mut seq: Vec<usize> = Vec::new();
            for &(r, j) in pairs {
                if let Some(k) = atoms.iter().position(|(ri, ji, _)| *ri == r && *ji == j) {
                    if !seq.contains(&k) {
                        seq.push(k);
                    }
                }
            }
            let listed = seq.clone();
            seq.extend(cost_order.into_iter().filter(|k| !listed.contains(k)));
            seq
        }
    };

    let mut alive = vec![true; atoms.len()];
    for k in sequence {
        let others: Vec<MembershipRule> = atoms
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != k && alive[m])
            .map(|(_, (_, _, r))| r.clone())
            .collect();
        if is_redundant(&atoms[k].2, &others, sig) {
            alive[k] = false;
        }
    }

    let mut removed_atoms = vec![Vec::new(); rules.len()];
    let mut kept: Vec<MembershipRule> = Vec::new();
    for (k, (i, j, part)) in atoms.into_iter().enumerate() {
        if !alive[k] {
            removed_atoms[i].push(j);
            continue;
        }
        match kept.iter_mut().find(|r| r.conditions() == part.conditions()) {
            Some(r) => {
                let mut body = r.body().to_vec();
                body.extend_from_slice(part.body());
                *r = MembershipRule::new(r.conditions().to_vec(), body).expect("nonempty body");
            }
            None => kept.push(part),
        }
    }
    let removed_rules = (0..rules.len())
        .filter(|&i| removed_atoms[i].len() == rules[i].body().len())
        .collect();
    RedundancyReport {
        removed_rules,
        removed_atoms,
        kept,
        total_atoms,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvingRow {
    pub rule: usize,
    pub degree: f64,
    pub friends: usize,
    pub obviated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvingStats {
    pub rows: Vec<SolvingRow>,
    pub rule_count: usize,
    pub solving: usize,
    /// Mean of `|friends ∪ obviated|` over all rules.
    pub average_union: f64,
}

impl SolvingStats {
    /// `rule_id,degree,friends_size,obviated_size`, 1-based rule ids.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rule_id,degree,friends_size,obviated_size\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.6},{},{}", r.rule + 1, r.degree, r.friends, r.obviated);
        }
        out
    }

    /// Non-solving union sizes with their multiplicities, largest first.
    pub fn union_histogram(&self) -> Vec<(usize, usize)> {
        let mut sizes: Vec<usize> = self.rows.iter().map(|r| r.friends + r.obviated).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let mut out: Vec<(usize, usize)> = Vec::new();
        for s in sizes {
            match out.last_mut() {
                Some((size, n)) if *size == s => *n += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "{} solving / {}, average friends∪obviated {:.3}",
            self.solving, self.rule_count, self.average_union
        )
    }
}

pub fn solving_stats<R>(compiled: &CompiledRuleSet<R>) -> SolvingStats {
    let n = compiled.len();
    let rows: Vec<SolvingRow> = (0..n)
        .map(|i| SolvingRow {
            rule: i,
            degree: compiled.solving_degree(i),
            friends: compiled.friends(i).len(),
            obviated: compiled.obviated(i).len(),
        })
        .collect();
    let total: usize = (0..n).map(|i| compiled.union_size(i)).sum();
    SolvingStats {
        solving: (0..n).filter(|&i| compiled.is_solving(i)).count(),
        average_union: if n == 0 { 0.0 } else { total as f64 / n as f64 },
        rule_count: n,
        rows,
    }
}
