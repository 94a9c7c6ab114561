//! Generic fixpoint schedulers over finite partial orderings.
//!
//! The entry points are:
//!
//! * [`gi_fixpoint`]: the generic chaotic iteration. Every rule stays
//!   scheduled for the whole run.
//! * [`compile`]: precomputes, for each rule, the *friends* (rules whose
//!   bodies may be applied unconditionally right after it fires) and the
//!   *obviated* rules (rules that can never change the store again once it
//!   has fired).
//! * [`r_fixpoint`]: the rule scheduler that exploits those lists to drop
//!   rules from the live set permanently.
//! * [`resume`]: restarts the rule scheduler from a larger element using only
//!   the rules that survived an earlier run.
//!
//! All schedulers share the same `update` policy: when a fired rule changes
//! the current element, every live rule that is not already pending is
//! rescheduled.

mod check;
mod compile;
mod worklist;

use std::fmt::Debug;

use fixedbitset::FixedBitSet;
use thiserror::Error;

pub use check::{
    verify_conditions, verify_prop_rule, ConditionKind, ConditionViolation, PropProperty, PropReport,
    PropViolation,
};
pub use compile::{compile, CompiledRuleSet};
use worklist::Worklist;

/// A finite partial ordering with a least element and a greatest element.
pub trait Lattice {
    type Elem: Clone + Eq + Debug;

    fn bottom(&self) -> Self::Elem;
    fn is_top(&self, e: &Self::Elem) -> bool;
    /// The order `a ⊑ b`.
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
}

/// A lattice whose carrier can be enumerated, for exhaustive checks.
pub trait FiniteLattice: Lattice {
    fn elements(&self) -> Vec<Self::Elem>;
}

/// How eagerly the rule scheduler tests whether a rule whose condition
/// failed can ever fire again.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeadRuleCheck {
    /// Run the full test every time a condition fails.
    #[default]
    Always,
    /// Only run a cheap partial test; rules it cannot decide stay live.
    SingletonOnly,
}

/// A rule `b → g` with a monotonic, precise condition `b` and a stable body `g`.
pub trait PropRule<L: Lattice + ?Sized> {
    fn holds(&self, lattice: &L, e: &L::Elem) -> bool;

    /// Returns false only if no element `e' ⊒ e` other than top satisfies
    /// the condition. Returning true is always sound. Top is excluded because
    /// every condition holds there and every rule fixes it.
    fn can_ever_hold_above(&self, lattice: &L, e: &L::Elem, check: DeadRuleCheck) -> bool;

    fn apply_body(&self, lattice: &L, e: &L::Elem) -> L::Elem;

    /// The least element satisfying the condition, if there is one.
    fn witness(&self, lattice: &L) -> Option<L::Elem>;

    /// Conditional application: the body if the condition holds, else identity.
    fn apply(&self, lattice: &L, e: &L::Elem) -> L::Elem {
        if self.holds(lattice, e) {
            self.apply_body(lattice, e)
        } else {
            e.clone()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("rule {0} has no witness: its condition is not precise")]
    MissingWitness(usize),
    #[error("resume target is not above the previous fixpoint")]
    NotAbovePrior,
    #[error("live set has {found} slots but the rule set has {expected} rules")]
    LiveSetSize { expected: usize, found: usize },
    #[error("invalid friends/obviated table for rule {rule}: {reason}")]
    InvalidTable { rule: usize, reason: String },
}

/// Order in which pending rules are picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Choose {
    /// First scheduled, first picked. Deterministic.
    #[default]
    Fifo,
    /// Uniformly random among pending rules, from the given seed.
    Random(u64),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub choose: Choose,
    pub dead_check: DeadRuleCheck,
    /// Rule picked first, ahead of the `choose` order.
    pub first: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub condition_tests: u64,
    pub body_applications: u64,
    /// Rules no longer live at the end of the run, relative to the full rule
    /// set (so rules dropped by an earlier run that was resumed count too).
    pub rules_removed: u64,
}

impl std::ops::AddAssign for Counters {
    fn add_assign(&mut self, rhs: Self) {
        self.condition_tests += rhs.condition_tests;
        self.body_applications += rhs.body_applications;
        self.rules_removed += rhs.rules_removed;
    }
}

/// Outcome of one scheduler run.
#[derive(Debug, Clone)]
pub struct SchedulerTrace<E> {
    pub final_store: E,
    /// Rules still live at the end (`F_fin`).
    pub live: FixedBitSet,
    pub counters: Counters,
    pub reached_top: bool,
}

impl<E> SchedulerTrace<E> {
    pub fn f_fin(&self) -> Vec<usize> {
        self.live.ones().collect()
    }

    pub fn live_count(&self) -> usize {
        self.live.count_ones(..)
    }
}

/// Snapshot handed to an [`Observer`] at the head of every loop iteration
/// and once after the loop exits.
pub struct IterationView<'a, E> {
    pub store: &'a E,
    /// Rules currently scheduled (`G`).
    pub pending: &'a FixedBitSet,
    /// Rules currently live (`F`).
    pub live: &'a FixedBitSet,
    pub finished: bool,
}

pub trait Observer<E> {
    fn observe(&mut self, view: IterationView<'_, E>);
}

impl<E> Observer<E> for () {
    fn observe(&mut self, _view: IterationView<'_, E>) {}
}

impl<E, F: FnMut(IterationView<'_, E>)> Observer<E> for F {
    fn observe(&mut self, view: IterationView<'_, E>) {
        self(view)
    }
}

/// Runs the generic iteration from `start` with FIFO scheduling.
pub fn gi_fixpoint<L, R>(rules: &[R], lattice: &L, start: L::Elem) -> SchedulerTrace<L::Elem>
where
    L: Lattice + ?Sized,
    R: PropRule<L>,
{
    gi_fixpoint_with(rules, lattice, start, &Options::default(), &mut ())
}

pub fn gi_fixpoint_with<L, R, O>(
    rules: &[R],
    lattice: &L,
    start: L::Elem,
    opts: &Options,
    observer: &mut O,
) -> SchedulerTrace<L::Elem>
where
    L: Lattice + ?Sized,
    R: PropRule<L>,
    O: Observer<L::Elem>,
{
    run_gi(rules, lattice, start, opts, observer, |_| {})
}

/// Generic iteration; `on_relevant` is called with the index of every rule
/// whose application changed the current element, in firing order.
pub(crate) fn run_gi<L, R, O>(
    rules: &[R],
    lattice: &L,
    start: L::Elem,
    opts: &Options,
    observer: &mut O,
    mut on_relevant: impl FnMut(usize),
) -> SchedulerTrace<L::Elem>
where
    L: Lattice + ?Sized,
    R: PropRule<L>,
    O: Observer<L::Elem>,
{
    let n = rules.len();
    let mut live = FixedBitSet::with_capacity(n);
    live.insert_range(..);
    let mut work = Worklist::new(n, opts.choose);
    work.extend_from(&live);
    if let Some(i) = opts.first {
        work.prioritize(i);
    }

    let mut d = start;
    let mut counters = Counters::default();
    loop {
        observer.observe(IterationView {
            store: &d,
            pending: work.pending(),
            live: &live,
            finished: false,
        });
        if lattice.is_top(&d) {
            break;
        }
        let Some(i) = work.pop() else { break };
        counters.condition_tests += 1;
        if !rules[i].holds(lattice, &d) {
            continue;
        }
        counters.body_applications += 1;
        let next = rules[i].apply_body(lattice, &d);
        if next != d {
            on_relevant(i);
            work.extend_from(&live);
            d = next;
        }
    }
    observer.observe(IterationView {
        store: &d,
        pending: work.pending(),
        live: &live,
        finished: true,
    });
    let reached_top = lattice.is_top(&d);
    SchedulerTrace {
        final_store: d,
        live,
        counters,
        reached_top,
    }
}

/// Runs the rule scheduler from `start` over the rules in `live`.
///
/// `live` must be either the full rule set or the surviving set of an
/// earlier run whose final element is below `start`; in both cases the
/// result equals the least common fixpoint of the full rule set above
/// `start`.
pub fn r_fixpoint<L, R>(
    compiled: &CompiledRuleSet<R>,
    lattice: &L,
    start: L::Elem,
    live: &FixedBitSet,
) -> Result<SchedulerTrace<L::Elem>, KernelError>
where
    L: Lattice + ?Sized,
    R: PropRule<L>,
{
    r_fixpoint_with(compiled, lattice, start, live, &Options::default(), &mut ())
}

pub fn r_fixpoint_with<L, R, O>(
    compiled: &CompiledRuleSet<R>,
    lattice: &L,
    start: L::Elem,
    live: &FixedBitSet,
    opts: &Options,
    observer: &mut O,
) -> Result<SchedulerTrace<L::Elem>, KernelError>
where
    L: Lattice + ?Sized,
    R: PropRule<L>,
    O: Observer<L::Elem>,
{
    let n = compiled.len();
    if live.len() != n {
        return Err(KernelError::LiveSetSize {
            expected: n,
            found: live.len(),
        });
    }
    let rules = compiled.rules();
    let mut live = live.clone();
    let mut work = Worklist::new(n, opts.choose);
    work.extend_from(&live);
    if let Some(i) = opts.first {
        work.prioritize(i);
    }

    let mut d = start;
    let mut counters = Counters::default();
    loop {
        observer.observe(IterationView {
            store: &d,
            pending: work.pending(),
            live: &live,
            finished: false,
        });
        if lattice.is_top(&d) {
            break;
        }
        let Some(i) = work.pop() else { break };
        let rule = &rules[i];
        counters.condition_tests += 1;
        if rule.holds(lattice, &d) {
            // Friends still live are applied below; the others are stable
            // above the current element already.
            let friends: Vec<usize> = compiled
                .friends(i)
                .iter()
                .copied()
                .filter(|&j| live.contains(j))
                .collect();
            let removal = compiled.removal_set(i);
            live.difference_with(removal);
            work.remove_all(removal);

            let mut next = rule.apply_body(lattice, &d);
            counters.body_applications += 1;
            for j in friends {
                if lattice.is_top(&next) {
                    break;
                }
                next = rules[j].apply_body(lattice, &next);
                counters.body_applications += 1;
            }
            if next != d {
                work.extend_from(&live);
                d = next;
            }
        } else if !rule.can_ever_hold_above(lattice, &d, opts.dead_check) {
            live.set(i, false);
        }
    }
    observer.observe(IterationView {
        store: &d,
        pending: work.pending(),
        live: &live,
        finished: true,
    });
    counters.rules_removed = (n - live.count_ones(..)) as u64;
    let reached_top = lattice.is_top(&d);
    Ok(SchedulerTrace {
        final_store: d,
        live,
        counters,
        reached_top,
    })
}

/// Continues from `e ⊒ prior.final_store` using only the rules that survived
/// `prior`.
pub fn resume<L, R>(
    compiled: &CompiledRuleSet<R>,
    lattice: &L,
    prior: &SchedulerTrace<L::Elem>,
    e: L::Elem,
    opts: &Options,
) -> Result<SchedulerTrace<L::Elem>, KernelError>
where
    L: Lattice + ?Sized,
    R: PropRule<L>,
{
    if !lattice.leq(&prior.final_store, &e) {
        return Err(KernelError::NotAbovePrior);
    }
    r_fixpoint_with(compiled, lattice, e, &prior.live, opts, &mut ())
}
