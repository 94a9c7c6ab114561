//! Solving-rule and redundancy counts for the bundled constraints.
//! Averages are compared after truncation to an integer.

use proprules::redundancy::{minimize, solving_stats, RedundancyReport, SelectionOrder, SolvingStats};
use proprules::rulegen::{generate, GenLimits, RuleKind};
use proprules::{compile, library, ConstraintDef, MembershipRule};

fn rules(c: &ConstraintDef, kind: RuleKind) -> Vec<MembershipRule> {
    generate(c, kind, &GenLimits::default()).unwrap()
}

fn stats(c: &ConstraintDef, rules: Vec<MembershipRule>) -> SolvingStats {
    solving_stats(&compile(rules, c.signature()).unwrap())
}

fn partial(rep: &RedundancyReport, rules: &[MembershipRule]) -> usize {
    (0..rules.len())
        .filter(|&i| !rep.removed_atoms[i].is_empty() && rep.removed_atoms[i].len() < rules[i].body().len())
        .count()
}

#[test]
fn and2_both_kinds_all_solving() {
    let c = library::and2();
    for kind in [RuleKind::Equality, RuleKind::Membership] {
        let s = stats(&c, rules(&c, kind));
        assert_eq!((s.solving, s.rule_count), (6, 6));
        assert_eq!(s.average_union, 6.0);
    }
}

#[test]
fn and3_equality_13_of_16_solving() {
    let c = library::and3();
    let s = stats(&c, rules(&c, RuleKind::Equality));
    assert_eq!((s.solving, s.rule_count), (13, 16));
    assert_eq!(s.average_union.trunc(), 14.0);
}

#[test]
fn and3_membership_minimized_4_of_13_solving() {
    let c = library::and3();
    let full = rules(&c, RuleKind::Membership);
    let kept = minimize(&full, c.signature(), &SelectionOrder::Cost).kept;
    let s = stats(&c, kept);
    assert_eq!((s.solving, s.rule_count), (4, 13));
    assert_eq!(s.average_union.trunc(), 7.0);
}

#[test]
fn equ3_membership_redundancy() {
    let c = library::equ3();
    let full = rules(&c, RuleKind::Membership);
    let rep = minimize(&full, c.signature(), &SelectionOrder::Cost);
    assert_eq!(full.len(), 26);
    assert_eq!(rep.removed_rules.len(), 8);
    assert_eq!(partial(&rep, &full), 0);
    assert_eq!((rep.ratio() * 100.0).round(), 26.0);
}

#[test]
fn and3_membership_redundancy() {
    let c = library::and3();
    let full = rules(&c, RuleKind::Membership);
    let rep = minimize(&full, c.signature(), &SelectionOrder::Cost);
    assert_eq!(full.len(), 18);
    assert_eq!(rep.removed_rules.len(), 5);
    assert_eq!(partial(&rep, &full), 0);
    assert_eq!((rep.ratio() * 100.0).round(), 30.0);
}

#[test]
fn equality_sets_of_three_valued_constraints_are_minimal() {
    for c in [library::equ3(), library::and3()] {
        let full = rules(&c, RuleKind::Equality);
        let rep = minimize(&full, c.signature(), &SelectionOrder::Cost);
        assert_eq!(rep.removed_atom_count(), 0, "{}", c.name());
    }
}
