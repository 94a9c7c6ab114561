#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use proprules::{Condition, DomainSet, MembershipRule, Removal, Signature, Store, Universe};

pub fn sig(arity: usize, k: usize) -> Signature {
    Signature::uniform(arity, Universe::range(k).unwrap())
}

/// Equality rule from `(var, value)` conditions and removals.
pub fn eq_rule(conditions: &[(usize, usize)], body: &[(usize, usize)]) -> MembershipRule {
    MembershipRule::new(
        conditions
            .iter()
            .map(|&(var, v)| Condition {
                var,
                allowed: DomainSet::singleton(v),
            })
            .collect(),
        body.iter().map(|&(var, value)| Removal { var, value }).collect(),
    )
    .unwrap()
}

/// The eleven rules for `c` over `x y z u`, written out by hand in the
/// reference numbering (1)..(11) with bodies in the reference atom order.
pub fn c4_reference_rules() -> Vec<MembershipRule> {
    const X: usize = 0;
    const Y: usize = 1;
    const Z: usize = 2;
    const U: usize = 3;
    vec![
        eq_rule(&[(U, 0)], &[(X, 0), (Y, 0), (Z, 0)]),
        eq_rule(&[(Z, 1)], &[(U, 1), (X, 0), (Y, 0)]),
        eq_rule(&[(X, 0)], &[(U, 0), (Y, 0), (Z, 1)]),
        eq_rule(&[(Y, 0)], &[(U, 0), (X, 0), (Z, 1)]),
        eq_rule(&[(U, 1)], &[(Z, 1)]),
        eq_rule(&[(Z, 0)], &[(U, 0)]),
        eq_rule(&[(X, 1), (Y, 1)], &[(U, 1), (Z, 0)]),
        eq_rule(&[(Y, 1), (Z, 0)], &[(X, 1)]),
        eq_rule(&[(Y, 1), (U, 1)], &[(X, 1)]),
        eq_rule(&[(X, 1), (Z, 0)], &[(Y, 1)]),
        eq_rule(&[(X, 1), (U, 1)], &[(Y, 1)]),
    ]
}

pub fn random_rule(rng: &mut ChaCha8Rng, sig: &Signature) -> MembershipRule {
    let arity = sig.arity();
    loop {
        let mut conditions = Vec::new();
        for var in 0..arity {
            if rng.gen_bool(0.4) {
                let k = sig.universe(var).len();
                let allowed = DomainSet::from_bits(rng.gen_range(1..(1u64 << k)));
                conditions.push(Condition { var, allowed });
            }
        }
        let body: Vec<Removal> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let var = rng.gen_range(0..arity);
                Removal {
                    var,
                    value: rng.gen_range(0..sig.universe(var).len()),
                }
            })
            .collect();
        let mut unique = body.clone();
        unique.sort();
        unique.dedup();
        if unique.len() == body.len() {
            return MembershipRule::new(conditions, body).unwrap();
        }
    }
}

pub fn random_rules(rng: &mut ChaCha8Rng, sig: &Signature, count: usize) -> Vec<MembershipRule> {
    (0..count).map(|_| random_rule(rng, sig)).collect()
}

pub fn random_store(rng: &mut ChaCha8Rng, sig: &Signature) -> Store {
    Store::Domains(
        sig.universes()
            .iter()
            .map(|u| DomainSet::from_bits(rng.gen_range(1..(1u64 << u.len()))))
            .collect(),
    )
}

/// Least common fixpoint above `start` by naive round-robin iteration.
pub fn brute_force_fixpoint(rules: &[MembershipRule], start: &Store) -> Store {
    let mut d = start.clone();
    loop {
        let mut changed = false;
        for r in rules {
            if d.is_top() {
                return d;
            }
            let next = r.apply(&d);
            if next != d {
                d = next;
                changed = true;
            }
        }
        if !changed {
            return d;
        }
    }
}

/// All stores fixed by every rule, by enumeration of the carrier.
pub fn common_fixpoints(rules: &[MembershipRule], sig: &Signature) -> Vec<Store> {
    sig.all_stores()
        .into_iter()
        .filter(|s| rules.iter().all(|r| r.apply(s) == *s))
        .collect()
}

/// Rules as order-independent canonical forms.
pub fn rule_set(rules: &[MembershipRule]) -> HashSet<MembershipRule> {
    rules.iter().map(MembershipRule::canonical).collect()
}
