//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Exits 0 even when a criterion fails so that `cargo test` reports the
//! suite's output without aborting; set `ACCEPTANCE_STRICT=1` to turn any
//! FAIL into a nonzero exit.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use proprules::kernel::{r_fixpoint_with, verify_conditions};
use proprules::library;
use proprules::redundancy::{is_redundant, minimize, solving_stats, SelectionOrder};
use proprules::rulegen::{generate, generate_equality_rules, generate_membership_rules, GenLimits, RuleKind};
use proprules::{
    compile, gi_fixpoint, r_fixpoint, resume, Condition, DomainSet, MembershipRule, Options, Removal, Store,
};

use common::*;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Suite {
    failed: usize,
}

impl Suite {
    fn run(&mut self, id: u32, title: &str, limit: Duration, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let timing = format!("{:.3} s, limit {} s", elapsed.as_secs_f64(), limit.as_secs());
        let (status, detail) = match result {
            Ok(_) if elapsed > limit => ("FAIL", "exceeded time limit".to_string()),
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            self.failed += 1;
        }
        println!("{status} [{id:>2}] {title}: {detail} ({timing})");
    }
}

fn c1_generated_c() -> Check {
    let c = library::c4();
    let generated = generate_equality_rules(&c).map_err(|e| e.to_string())?;
    ensure(generated.len() == 11, || {
        format!("{} rules, expected 11", generated.len())
    })?;
    let expected = c4_reference_rules();
    let (g, e) = (rule_set(&generated), rule_set(&expected));
    ensure(g == e, || {
        let sig = c.signature();
        let extra: Vec<String> = g.difference(&e).map(|r| r.display(sig).to_string()).collect();
        let missing: Vec<String> = e.difference(&g).map(|r| r.display(sig).to_string()).collect();
        format!("extra {extra:?}, missing {missing:?}")
    })?;
    Ok("11 rules, set-equal to the reference list".into())
}

fn c2_equ3_stats() -> Check {
    let c = library::equ3();
    let rules = generate_membership_rules(&c).map_err(|e| e.to_string())?;
    ensure(rules.len() == 26, || {
        format!("{} rules, expected 26", rules.len())
    })?;
    let compiled = compile(rules, c.signature()).map_err(|e| e.to_string())?;
    let stats = solving_stats(&compiled);
    ensure(stats.solving == 12, || {
        format!("{} solving, expected 12", stats.solving)
    })?;
    let mut sizes: Vec<usize> = (0..compiled.len())
        .filter(|&i| !compiled.is_solving(i))
        .map(|i| compiled.union_size(i))
        .collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let mut expected = vec![17; 8];
    expected.extend([14; 4]);
    expected.extend([6; 2]);
    ensure(sizes == expected, || format!("non-solving union sizes {sizes:?}"))?;
    Ok("26 rules, 12 solving, non-solving sizes {17×8, 14×4, 6×2}".into())
}

fn c3_trace() -> Check {
    let c = library::equ3();
    let sig = c.signature();
    let o = |v: &str| sig.ordinal(0, v).unwrap();
    let (t, f, u) = (o("t"), o("f"), o("u"));
    let rules = generate_membership_rules(&c).map_err(|e| e.to_string())?;
    // r := x ∈ {f}, z ∈ {f,u} → y ≠ f
    let r = MembershipRule::new(
        vec![
            Condition {
                var: 0,
                allowed: DomainSet::singleton(f),
            },
            Condition {
                var: 2,
                allowed: DomainSet::from_values([f, u]),
            },
        ],
        vec![Removal { var: 1, value: f }],
    )
    .unwrap();
    let ri = rules.iter().position(|x| *x == r).ok_or("rule r not generated")?;
    let compiled = compile(rules, sig).map_err(|e| e.to_string())?;
    ensure(compiled.union_size(ri) == 17, || {
        format!("friends∪obviated of r has {} rules", compiled.union_size(ri))
    })?;
    let start = Store::Domains(vec![
        DomainSet::singleton(f),
        DomainSet::full(3),
        DomainSet::from_values([f, u]),
    ]);
    let opts = Options {
        first: Some(ri),
        ..Options::default()
    };
    let mut after_r: Option<usize> = None;
    let mut views = 0;
    let mut observer = |v: proprules::kernel::IterationView<'_, Store>| {
        views += 1;
        if views == 2 {
            after_r = Some(v.live.count_ones(..));
        }
    };
    let trace = r_fixpoint_with(&compiled, sig, start, &compiled.full_live(), &opts, &mut observer)
        .map_err(|e| e.to_string())?;
    let expected = Store::Domains(vec![
        DomainSet::singleton(f),
        DomainSet::from_values([t, u]),
        DomainSet::from_values([f, u]),
    ]);
    ensure(after_r == Some(9), || format!("{after_r:?} live rules after r"))?;
    ensure(trace.live_count() == 9, || {
        format!("{} live rules at the end", trace.live_count())
    })?;
    ensure(trace.final_store == expected, || {
        format!("final store {}", sig.format_store(&trace.final_store))
    })?;
    Ok(format!(
        "9 live rules, final store {}",
        sig.format_store(&trace.final_store)
    ))
}

fn c4_redundancy() -> Check {
    let c = library::c4();
    let sig = c.signature();
    let rules = c4_reference_rules();
    ensure(is_redundant(&rules[10], &rules[..10], sig), || {
        "(11) not redundant w.r.t. (1)–(10)".into()
    })?;
    let without_10: Vec<MembershipRule> = rules
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != 9)
        .map(|(_, r)| r.clone())
        .collect();
    ensure(is_redundant(&rules[9], &without_10, sig), || {
        "(10) not redundant w.r.t. the other rules".into()
    })?;

    // Underlined atoms, 0-based (rule, body position).
    let replay = vec![(10, 0), (8, 0), (1, 1), (1, 2), (2, 2), (3, 2), (6, 1)];
    let rep = minimize(&rules, sig, &SelectionOrder::Explicit(replay.clone()));
    let removed: BTreeSet<(usize, usize)> = rep
        .removed_atoms
        .iter()
        .enumerate()
        .flat_map(|(i, atoms)| atoms.iter().map(move |&j| (i, j)))
        .collect();
    let expected: BTreeSet<(usize, usize)> = replay.into_iter().collect();
    ensure(rep.total_atoms == 20 && rep.kept_atom_count() == 13, || {
        format!("{} of {} atoms remain", rep.kept_atom_count(), rep.total_atoms)
    })?;
    ensure(removed == expected, || format!("removed atoms {removed:?}"))?;
    let ratio = (rep.ratio() * 100.0).round();
    ensure(ratio == 35.0, || format!("ratio {ratio}%"))?;

    // Exactly one of (10), (11) survives in every outcome; cost order plus
    // 500 random orders over all 20 atoms.
    let atoms: Vec<(usize, usize)> = rules
        .iter()
        .enumerate()
        .flat_map(|(i, r)| (0..r.body().len()).map(move |j| (i, j)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut orders = vec![SelectionOrder::Cost];
    for _ in 0..500 {
        let mut a = atoms.clone();
        a.shuffle(&mut rng);
        orders.push(SelectionOrder::Explicit(a));
    }
    let n_orders = orders.len();
    for order in orders {
        let rep = minimize(&rules, sig, &order);
        let kept10 = rep.removed_atoms[9].is_empty();
        let kept11 = rep.removed_atoms[10].is_empty();
        ensure(kept10 != kept11, || {
            format!("order {order:?} keeps (10)={kept10}, (11)={kept11}")
        })?;
    }
    Ok(format!(
        "(11) and (10) redundant, replay keeps 13 of 20 (35%), one of (10)/(11) in all {n_orders} orders"
    ))
}

fn c5_and2() -> Check {
    let c = library::and2();
    let rules = generate_equality_rules(&c).map_err(|e| e.to_string())?;
    ensure(rules.len() == 6, || format!("{} rules", rules.len()))?;
    let compiled = compile(rules, c.signature()).map_err(|e| e.to_string())?;
    let stats = solving_stats(&compiled);
    ensure(stats.solving == 6, || format!("{} solving", stats.solving))?;
    ensure(stats.average_union == 6.0, || {
        format!("average {}", stats.average_union)
    })?;
    Ok(stats.summary())
}

fn c6_c4hecks() -> Check {
    let c = library::c4();
    let sig = c.signature();
    let rules = c4_reference_rules();
    let compiled = compile(rules.clone(), sig).map_err(|e| e.to_string())?;
    let non_solving: Vec<usize> = (0..11)
        .filter(|&i| !compiled.is_solving(i))
        .map(|i| i + 1)
        .collect();
    ensure(non_solving == vec![5, 6], || {
        format!("non-solving rules {non_solving:?}")
    })?;
    for (i, expect) in [(4, false), (5, false), (9, true), (10, true)] {
        let others: Vec<MembershipRule> = rules
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r.clone())
            .collect();
        ensure(is_redundant(&rules[i], &others, sig) == expect, || {
            format!("({}) redundant = {}", i + 1, !expect)
        })?;
    }
    let reference: BTreeSet<usize> = [1, 3, 5, 6].into();
    for i in [4, 5] {
        let union: BTreeSet<usize> = compiled.removal_set(i).ones().map(|j| j + 1).collect();
        ensure(union == reference, || {
            format!(
                "solving and redundancy checks hold, but friends∪obviated of ({}) is {union:?}, reference {reference:?}",
                i + 1
            )
        })?;
    }
    Ok("all but (5),(6) solving; sets of (5),(6) = {1,3,5,6}; (10),(11) redundant".into())
}

fn c7_scheduler_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut instances = 0usize;
    let mut fewer = 0usize;
    for set in 0..250 {
        let arity = rng.gen_range(1..=4);
        let k = rng.gen_range(2..=3);
        let s = sig(arity, k);
        let count = rng.gen_range(1..=14);
        let rules = random_rules(&mut rng, &s, count);
        let compiled = compile(rules.clone(), &s).map_err(|e| e.to_string())?;
        for _ in 0..8 {
            let start = random_store(&mut rng, &s);
            let oracle = brute_force_fixpoint(&rules, &start);
            let gi = gi_fixpoint(&rules, &s, start.clone());
            let r =
                r_fixpoint(&compiled, &s, start.clone(), &compiled.full_live()).map_err(|e| e.to_string())?;
            ensure(gi.final_store == oracle && r.final_store == oracle, || {
                format!("set {set}: GI/R/oracle disagree from {}", s.format_store(&start))
            })?;
            ensure(r.counters.condition_tests <= gi.counters.condition_tests, || {
                format!(
                    "set {set}: R made {} condition tests, GI {}",
                    r.counters.condition_tests, gi.counters.condition_tests
                )
            })?;
            if r.counters.condition_tests < gi.counters.condition_tests {
                fewer += 1;
            }
            instances += 1;
        }
    }
    Ok(format!(
        "{instances} instances over 250 rule sets agree; R ≤ GI tests on all, strictly fewer on {fewer}"
    ))
}

fn bundled_sets() -> Result<Vec<(String, Vec<MembershipRule>, proprules::Signature)>, String> {
    let mut out = Vec::new();
    for c in library::all() {
        for kind in [RuleKind::Equality, RuleKind::Membership] {
            let rules = generate(&c, kind, &GenLimits::default()).map_err(|e| e.to_string())?;
            out.push((format!("{}/{kind:?}", c.name()), rules, c.signature().clone()));
        }
    }
    Ok(out)
}

fn c8_conditions() -> Check {
    let mut checked = 0;
    for (name, rules, s) in bundled_sets()? {
        let compiled = compile(rules, &s).map_err(|e| e.to_string())?;
        let bad = verify_conditions(&compiled, &s);
        ensure(bad.is_empty(), || {
            let v = &bad[0];
            format!(
                "{name}: {} violations, first {:?} rule {} other {}",
                bad.len(),
                v.kind,
                v.rule + 1,
                v.other + 1
            )
        })?;
        checked += 1;
    }
    Ok(format!("{checked} compiled rule sets, zero violations"))
}

fn c9_resume() -> Check {
    let c = library::equ3();
    let s = c.signature();
    let stores = s.all_stores();
    let mut pairs = 0usize;
    for kind in [RuleKind::Membership, RuleKind::Equality] {
        let rules = generate(&c, kind, &GenLimits::default()).map_err(|e| e.to_string())?;
        let compiled = compile(rules.clone(), s).map_err(|e| e.to_string())?;
        let full: Vec<Store> = stores
            .iter()
            .map(|e| gi_fixpoint(&rules, s, e.clone()).final_store)
            .collect();
        for start in &stores {
            let prior =
                r_fixpoint(&compiled, s, start.clone(), &compiled.full_live()).map_err(|e| e.to_string())?;
            for (ei, e) in stores.iter().enumerate() {
                if !prior.final_store.leq_unchecked(e) {
                    continue;
                }
                let r = resume(&compiled, s, &prior, e.clone(), &Options::default())
                    .map_err(|e| e.to_string())?;
                ensure(r.final_store == full[ei], || {
                    format!("{kind:?}: resume from {} differs", s.format_store(e))
                })?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} (fixpoint, store) pairs agree"))
}

fn c10_minimized_fixpoints() -> Check {
    let mut summary = Vec::new();
    for (name, rules, s) in bundled_sets()? {
        let rep = minimize(&rules, &s, &SelectionOrder::Cost);
        ensure(
            common_fixpoints(&rep.kept, &s) == common_fixpoints(&rules, &s),
            || format!("{name}: fixpoint sets differ"),
        )?;
        summary.push(format!("{name} {}/{}", rep.kept_atom_count(), rep.total_atoms));
    }
    Ok(format!(
        "fixpoint sets preserved; atoms kept: {}",
        summary.join(", ")
    ))
}

fn main() {
    let mut suite = Suite { failed: 0 };
    let s = Duration::from_secs;
    suite.run(1, "generated rules for c", s(1), c1_generated_c);
    suite.run(2, "equ3 membership statistics", s(10), c2_equ3_stats);
    suite.run(3, "equ3 trace from rule r", s(1), c3_trace);
    suite.run(4, "redundancy on the rules for c", s(5), c4_redundancy);
    suite.run(5, "and2 equality rules", s(1), c5_and2);
    suite.run(6, "solving and redundancy on the rules for c", s(60), c6_c4hecks);
    suite.run(
        7,
        "GI = R = oracle, R tests ≤ GI tests",
        s(60),
        c7_scheduler_equivalence,
    );
    suite.run(
        8,
        "friends/obviated conditions, bundled sets",
        s(60),
        c8_conditions,
    );
    suite.run(9, "resume equals full GI on equ3", s(30), c9_resume);
    suite.run(
        10,
        "minimized sets keep fixpoints",
        s(60),
        c10_minimized_fixpoints,
    );
    println!("{} of 10 criteria passed", 10 - suite.failed);
    if suite.failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
