//! Exhaustive property checks over finite carriers.

use super::{CompiledRuleSet, FiniteLattice, PropRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropProperty {
    /// `holds(d) ∧ d ⊑ e ⇒ holds(e)`.
    ConditionMonotonic,
    /// A witness exists, satisfies the condition and is below every element
    /// that does.
    ConditionPrecise,
    /// `g(d) ⊑ e ⇒ g(e) = e`.
    BodyStable,
    /// `d ⊑ g(d)`.
    BodyInflationary,
    /// `d ⊑ e ⇒ g(d) ⊑ g(e)`.
    BodyMonotonic,
}

#[derive(Debug, Clone)]
pub struct PropViolation<E> {
    pub property: PropProperty,
    /// Counterexample elements, in the order the property names them.
    pub elements: Vec<E>,
}

/// Result of [`verify_prop_rule`]: the first counterexample of every
/// property that failed.
#[derive(Debug, Clone)]
pub struct PropReport<E> {
    pub violations: Vec<PropViolation<E>>,
}

impl<E> PropReport<E> {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn failed(&self, property: PropProperty) -> bool {
        self.violations.iter().any(|v| v.property == property)
    }
}

/// Checks every prop-rule property of `rule` over the whole carrier.
pub fn verify_prop_rule<L, R>(rule: &R, lattice: &L) -> PropReport<L::Elem>
where
    L: FiniteLattice + ?Sized,
    R: PropRule<L> + ?Sized,
{
    let elems = lattice.elements();
    let holds: Vec<bool> = elems.iter().map(|d| rule.holds(lattice, d)).collect();
    let body: Vec<L::Elem> = elems.iter().map(|d| rule.apply_body(lattice, d)).collect();
    let fixed: Vec<bool> = elems.iter().zip(&body).map(|(d, g)| d == g).collect();

    let mut found: Vec<PropViolation<L::Elem>> = Vec::new();
    let mut report = |property, elements: Vec<L::Elem>| {
        if !found.iter().any(|v| v.property == property) {
            found.push(PropViolation { property, elements });
        }
    };

    match rule.witness(lattice) {
        None => report(PropProperty::ConditionPrecise, vec![]),
        Some(w) => {
            if !rule.holds(lattice, &w) {
                report(PropProperty::ConditionPrecise, vec![w.clone()]);
            }
            for (d, &h) in elems.iter().zip(&holds) {
                if h && !lattice.leq(&w, d) {
                    report(PropProperty::ConditionPrecise, vec![w.clone(), d.clone()]);
                    break;
                }
            }
        }
    }

    for (a, d) in elems.iter().enumerate() {
        if !lattice.leq(d, &body[a]) {
            report(PropProperty::BodyInflationary, vec![d.clone()]);
        }
        for (b, e) in elems.iter().enumerate() {
            if lattice.leq(d, e) {
                if holds[a] && !holds[b] {
                    report(PropProperty::ConditionMonotonic, vec![d.clone(), e.clone()]);
                }
                if !lattice.leq(&body[a], &body[b]) {
                    report(PropProperty::BodyMonotonic, vec![d.clone(), e.clone()]);
                }
            }
            if !fixed[b] && lattice.leq(&body[a], e) {
                report(PropProperty::BodyStable, vec![d.clone(), e.clone()]);
            }
        }
    }
    PropReport { violations: found }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    /// A rule of `friends ∪ obviated` is not stable above the element reached
    /// after the fired rule and all its friends.
    Stability,
    /// A friend's condition fails somewhere above `g(d)`.
    FriendHoldsAfterBody,
    /// A friend's condition fails somewhere above the element reached after
    /// the fired rule and the friends listed before it.
    FriendHoldsInSequence,
}

#[derive(Debug, Clone)]
pub struct ConditionViolation<E> {
    pub kind: ConditionKind,
    /// The rule whose condition held.
    pub rule: usize,
    /// The friend or removed rule that broke the condition.
    pub other: usize,
    pub d: E,
    pub e: E,
}

/// Exhaustively checks the friends/obviated tables of `compiled`.
///
/// For every rule `b → g` and every `d` with `holds(b, d)` this verifies that
/// each rule of `friends ∪ obviated` fixes every element above
/// `g_k(…g_1(g(d)))`, and that each friend's condition holds everywhere above
/// `g(d)` as well as above the element reached just before it is applied.
pub fn verify_conditions<L, R>(compiled: &CompiledRuleSet<R>, lattice: &L) -> Vec<ConditionViolation<L::Elem>>
where
    L: FiniteLattice + ?Sized,
    R: PropRule<L>,
{
    let elems = lattice.elements();
    let n = elems.len();
    let rules = compiled.rules();
    let leq: Vec<Vec<bool>> = elems
        .iter()
        .map(|a| elems.iter().map(|b| lattice.leq(a, b)).collect())
        .collect();
    let holds: Vec<Vec<bool>> = rules
        .iter()
        .map(|r| elems.iter().map(|d| r.holds(lattice, d)).collect())
        .collect();
    let fixes: Vec<Vec<bool>> = rules
        .iter()
        .map(|r| elems.iter().map(|d| r.apply(lattice, d) == *d).collect())
        .collect();
    let index_of = |x: &L::Elem| {
        elems
            .iter()
            .position(|y| y == x)
            .expect("element outside carrier")
    };

    let mut out = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        for (di, d) in elems.iter().enumerate() {
            if !holds[i][di] {
                continue;
            }
            let gd = rule.apply_body(lattice, d);
            let gdi = index_of(&gd);
            let mut s = gd.clone();
            let mut si = gdi;
            for &j in compiled.friends(i) {
                for ei in 0..n {
                    if leq[gdi][ei] && !holds[j][ei] {
                        out.push(ConditionViolation {
                            kind: ConditionKind::FriendHoldsAfterBody,
                            rule: i,
                            other: j,
                            d: d.clone(),
                            e: elems[ei].clone(),
                        });
                        break;
                    }
                }
                for ei in 0..n {
                    if leq[si][ei] && !holds[j][ei] {
                        out.push(ConditionViolation {
                            kind: ConditionKind::FriendHoldsInSequence,
                            rule: i,
                            other: j,
                            d: d.clone(),
                            e: elems[ei].clone(),
                        });
                        break;
                    }
                }
                s = rules[j].apply_body(lattice, &s);
                si = index_of(&s);
            }
            for j in compiled.removal_set(i).ones() {
                for ei in 0..n {
                    if leq[si][ei] && !fixes[j][ei] {
                        out.push(ConditionViolation {
                            kind: ConditionKind::Stability,
                            rule: i,
                            other: j,
                            d: d.clone(),
                            e: elems[ei].clone(),
                        });
                        break;
                    }
                }
            }
        }
    }
    out
}
