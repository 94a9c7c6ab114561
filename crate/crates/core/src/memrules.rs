//! Membership rules over finite-domain stores.
//!
//! A membership rule `y1 ∈ S1, …, yk ∈ Sk → z1 ≠ a1, …, zm ≠ am` fires when
//! the current domain of every `yi` is included in `Si`, and then removes
//! each `aj` from the domain of `zj`. Every membership rule is a prop rule
//! on the store lattice: its witness is the store that narrows each `yi` to
//! `Si` and leaves all other variables at their full universe.

use std::fmt;

use log::warn;
use thiserror::Error;

use crate::kernel::{self, DeadRuleCheck, PropReport, PropRule};
use crate::store::{DomainSet, Signature, Store};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule body is empty")]
    EmptyBody,
    #[error("variable {0} appears in more than one condition")]
    DuplicateConditionVar(usize),
    #[error("condition on variable {0} allows no value")]
    EmptyAllowedSet(usize),
    #[error("variable {var} out of range for arity {arity}")]
    VariableOutOfRange { var: usize, arity: usize },
    #[error("value #{value} is outside the universe of variable {var}")]
    ValueOutOfUniverse { var: usize, value: usize },
}

/// `var ∈ allowed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Condition {
    pub var: usize,
    pub allowed: DomainSet,
}

/// `var ≠ value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Removal {
    pub var: usize,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MembershipRule {
    /// Sorted by variable; variables pairwise distinct.
    conditions: Vec<Condition>,
    body: Vec<Removal>,
}

impl MembershipRule {
    /// Builds a rule. Conditions are sorted by variable; repeated body atoms
    /// are dropped with a warning.
    pub fn new(mut conditions: Vec<Condition>, body: Vec<Removal>) -> Result<Self, RuleError> {
        conditions.sort_by_key(|c| c.var);
        for pair in conditions.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(RuleError::DuplicateConditionVar(pair[0].var));
            }
        }
        if let Some(c) = conditions.iter().find(|c| c.allowed.is_empty()) {
            return Err(RuleError::EmptyAllowedSet(c.var));
        }
        let mut deduped: Vec<Removal> = Vec::with_capacity(body.len());
        for atom in body {
            if deduped.contains(&atom) {
                warn!("dropping repeated body atom x{} ≠ #{}", atom.var + 1, atom.value);
            } else {
                deduped.push(atom);
            }
        }
        if deduped.is_empty() {
            return Err(RuleError::EmptyBody);
        }
        Ok(Self {
            conditions,
            body: deduped,
        })
    }

    /// Checks variable indices and values against a signature.
    pub fn validate(&self, sig: &Signature) -> Result<(), RuleError> {
        let arity = sig.arity();
        for c in &self.conditions {
            if c.var >= arity {
                return Err(RuleError::VariableOutOfRange { var: c.var, arity });
            }
            let full = sig.universe(c.var).full();
            if let Some(value) = c.allowed.iter().find(|&v| !full.contains(v)) {
                return Err(RuleError::ValueOutOfUniverse { var: c.var, value });
            }
        }
        for r in &self.body {
            if r.var >= arity {
                return Err(RuleError::VariableOutOfRange { var: r.var, arity });
            }
            if r.value >= sig.universe(r.var).len() {
                return Err(RuleError::ValueOutOfUniverse {
                    var: r.var,
                    value: r.value,
                });
            }
        }
        Ok(())
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn body(&self) -> &[Removal] {
        &self.body
    }

    /// Every condition set is a singleton.
    pub fn is_equality(&self) -> bool {
        self.conditions.iter().all(|c| c.allowed.is_singleton())
    }

    /// `Top` satisfies every condition.
    pub fn holds(&self, s: &Store) -> bool {
        match s {
            Store::Top => true,
            Store::Domains(d) => self.conditions.iter().all(|c| d[c.var].is_subset(c.allowed)),
        }
    }

    /// Removes the body values in order, collapsing to `Top` on an empty domain.
    pub fn apply_body(&self, s: &Store) -> Store {
        let mut out = s.clone();
        for r in &self.body {
            if out.is_top() {
                break;
            }
            out.remove_value_in_place(r.var, r.value);
        }
        out
    }

    pub fn apply(&self, s: &Store) -> Store {
        if self.holds(s) {
            self.apply_body(s)
        } else {
            s.clone()
        }
    }

    /// The least store satisfying the condition.
    pub fn witness(&self, sig: &Signature) -> Store {
        let mut domains: Vec<DomainSet> = sig.universes().iter().map(|u| u.full()).collect();
        for c in &self.conditions {
            domains[c.var] = c.allowed;
        }
        Store::Domains(domains)
    }

    /// Whether some non-`Top` store above `s` may still satisfy the
    /// condition. With [`DeadRuleCheck::SingletonOnly`] only conditions on
    /// variables with a singleton domain are inspected.
    pub fn can_ever_hold_above(&self, s: &Store, mode: DeadRuleCheck) -> bool {
        let Store::Domains(d) = s else {
            return true;
        };
        !self.conditions.iter().any(|c| {
            let dom = d[c.var];
            let inspect = match mode {
                DeadRuleCheck::Always => true,
                DeadRuleCheck::SingletonOnly => dom.is_singleton(),
            };
            inspect && !dom.intersects(c.allowed)
        })
    }

    /// The rule split into single-atom rules sharing its condition.
    pub fn atomic_parts(&self) -> Vec<MembershipRule> {
        self.body
            .iter()
            .map(|&atom| MembershipRule {
                conditions: self.conditions.clone(),
                body: vec![atom],
            })
            .collect()
    }

    /// Same rule with body atoms sorted, for order-insensitive comparison.
    pub fn canonical(&self) -> MembershipRule {
        let mut body = self.body.clone();
        body.sort();
        MembershipRule {
            conditions: self.conditions.clone(),
            body,
        }
    }

    /// Sum of the allowed-set sizes; part of the minimization cost.
    pub fn condition_weight(&self) -> usize {
        self.conditions.iter().map(|c| c.allowed.len()).sum()
    }

    /// Renders the rule with value names from `sig`, as
    /// `x1 ∈ {a,b}, x2 ∈ {b} → x3 ≠ a`.
    pub fn display<'a>(&'a self, sig: &'a Signature) -> RuleDisplay<'a> {
        RuleDisplay { rule: self, sig }
    }
}

pub struct RuleDisplay<'a> {
    rule: &'a MembershipRule,
    sig: &'a Signature,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let conds: Vec<String> = self
            .rule
            .conditions
            .iter()
            .map(|c| format!("x{} ∈ {}", c.var + 1, self.sig.format_domain(c.var, c.allowed)))
            .collect();
        let body: Vec<String> = self
            .rule
            .body
            .iter()
            .map(|r| format!("x{} ≠ {}", r.var + 1, self.sig.universe(r.var).name(r.value)))
            .collect();
        write!(f, "{} → {}", conds.join(", "), body.join(", "))
    }
}

impl PropRule<Signature> for MembershipRule {
    fn holds(&self, _sig: &Signature, e: &Store) -> bool {
        MembershipRule::holds(self, e)
    }

    fn can_ever_hold_above(&self, _sig: &Signature, e: &Store, check: DeadRuleCheck) -> bool {
        MembershipRule::can_ever_hold_above(self, e, check)
    }

    fn apply_body(&self, _sig: &Signature, e: &Store) -> Store {
        MembershipRule::apply_body(self, e)
    }

    fn witness(&self, sig: &Signature) -> Option<Store> {
        Some(MembershipRule::witness(self, sig))
    }
}

/// Exhaustively checks that `rule` is a prop rule with an inflationary,
/// monotonic body on the stores of `sig`.
pub fn verify_prop_rule(rule: &MembershipRule, sig: &Signature) -> PropReport<Store> {
    kernel::verify_prop_rule(rule, sig)
}
