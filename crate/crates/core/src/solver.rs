//! Multi-constraint propagation and a depth-first splitting search.
//!
//! Each posted constraint carries a compiled membership rule set over its
//! own local signature. Propagation projects the store onto a constraint's
//! scope, runs that constraint's scheduler and writes the result back, until
//! no constraint changes the store. Under the rule scheduler every constraint
//! keeps its live rule set between runs, which is sound as long as the
//! store only grows: along one propagation and down one search branch.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::kernel::{self, CompiledRuleSet, Counters, KernelError, Options};
use crate::memrules::MembershipRule;
use crate::rulegen::{self, ConstraintDef, GenError, RuleKind};
use crate::store::{DomainSet, Signature, Store};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("constraint `{name}` has arity {arity} but is posted on {found} variables")]
    ScopeArity {
        name: String,
        arity: usize,
        found: usize,
    },
    #[error("constraint `{name}` refers to variable index {var}, the CSP has {count}")]
    UnknownVariable { name: String, var: usize, count: usize },
    #[error("constraint `{name}` mentions a variable twice")]
    RepeatedVariable { name: String },
    #[error(
        "constraint `{name}` expects universe {expected:?} at position {position}, variable has {found:?}"
    )]
    UniverseMismatch {
        name: String,
        position: usize,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("record limit must be positive")]
    ZeroLimit,
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheduler {
    Gi,
    #[default]
    R,
}

impl Scheduler {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheduler::Gi => "GI",
            Scheduler::R => "R",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PostedConstraint {
    pub name: String,
    /// CSP variable for each argument position.
    pub scope: Vec<usize>,
    pub rules: Arc<CompiledRuleSet<MembershipRule>>,
    pub local: Signature,
}

#[derive(Debug, Clone)]
pub struct Csp {
    names: Vec<String>,
    signature: Signature,
    constraints: Vec<PostedConstraint>,
    /// Constraints mentioning each variable.
    watchers: Vec<Vec<usize>>,
}

impl Csp {
    pub fn new(names: Vec<String>, signature: Signature) -> Self {
        assert_eq!(names.len(), signature.arity(), "one name per variable");
        let watchers = vec![Vec::new(); signature.arity()];
        Self {
            names,
            signature,
            constraints: Vec::new(),
            watchers,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn constraints(&self) -> &[PostedConstraint] {
        &self.constraints
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Posts a compiled rule set on `scope`.
    pub fn post(
        &mut self,
        name: impl Into<String>,
        scope: Vec<usize>,
        rules: Arc<CompiledRuleSet<MembershipRule>>,
        local: Signature,
    ) -> Result<(), SolverError> {
        let name = name.into();
        if scope.len() != local.arity() {
            return Err(SolverError::ScopeArity {
                name,
                arity: local.arity(),
                found: scope.len(),
            });
        }
        let count = self.signature.arity();
        if let Some(&var) = scope.iter().find(|&&v| v >= count) {
            return Err(SolverError::UnknownVariable { name, var, count });
        }
        let distinct: HashSet<usize> = scope.iter().copied().collect();
        if distinct.len() != scope.len() {
            return Err(SolverError::RepeatedVariable { name });
        }
        for (position, &v) in scope.iter().enumerate() {
            let expected = local.universe(position).values();
            let found = self.signature.universe(v).values();
            if expected != found {
                return Err(SolverError::UniverseMismatch {
                    name,
                    position,
                    expected: expected.to_vec(),
                    found: found.to_vec(),
                });
            }
        }
        let index = self.constraints.len();
        for &v in &scope {
            self.watchers[v].push(index);
        }
        self.constraints.push(PostedConstraint {
            name,
            scope,
            rules,
            local,
        });
        Ok(())
    }

    /// Generates and compiles rules for `def`, then posts them on `scope`.
    pub fn post_constraint(
        &mut self,
        def: &ConstraintDef,
        scope: Vec<usize>,
        kind: RuleKind,
    ) -> Result<(), SolverError> {
        let rules = rulegen::generate(def, kind, &rulegen::GenLimits::default())?;
        let compiled = kernel::compile(rules, def.signature())?;
        self.post(def.name(), scope, Arc::new(compiled), def.signature().clone())
    }

    /// Every rule live, no constraint solved.
    pub fn initial_state(&self) -> PropState {
        PropState {
            live: self.constraints.iter().map(|c| c.rules.full_live()).collect(),
            solved: vec![false; self.constraints.len()],
        }
    }

    fn project(&self, c: &PostedConstraint, d: &[DomainSet]) -> Store {
        Store::Domains(c.scope.iter().map(|&v| d[v]).collect())
    }
}

/// Per-constraint scheduler state carried between propagations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropState {
    pub live: Vec<FixedBitSet>,
    /// Constraints that can no longer change any store above the current one.
    pub solved: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub store: Store,
    pub state: PropState,
    /// `rules_removed` counts rules dropped from live sets during this call.
    pub counters: Counters,
}

/// Runs all constraints to a joint fixpoint above `store`.
pub fn propagate(
    csp: &Csp,
    store: &Store,
    state: &PropState,
    scheduler: Scheduler,
    opts: &Options,
) -> Result<Propagation, SolverError> {
    let mut state = state.clone();
    let mut counters = Counters::default();
    let n = csp.constraints.len();
    let live_before: usize = state.live.iter().map(|l| l.count_ones(..)).sum();

    let mut d = match store {
        Store::Top => Vec::new(),
        Store::Domains(d) => d.clone(),
    };
    let mut top = store.is_top();
    let mut queue: VecDeque<usize> = (0..n).collect();
    let mut queued = vec![true; n];
    while !top {
        let Some(ci) = queue.pop_front() else { break };
        queued[ci] = false;
        if state.solved[ci] {
            continue;
        }
        let c = &csp.constraints[ci];
        let local = csp.project(c, &d);
        let trace = match scheduler {
            Scheduler::Gi => kernel::gi_fixpoint(c.rules.rules(), &c.local, local.clone()),
            Scheduler::R => {
                kernel::r_fixpoint_with(&c.rules, &c.local, local.clone(), &state.live[ci], opts, &mut ())?
            }
        };
        counters.condition_tests += trace.counters.condition_tests;
        counters.body_applications += trace.counters.body_applications;
        if scheduler == Scheduler::R {
            state.live[ci] = trace.live;
        }
        let Store::Domains(out) = trace.final_store else {
            top = true;
            break;
        };
        if state.live[ci].is_clear() || out.iter().all(|x| x.is_singleton()) {
            state.solved[ci] = true;
        }
        for (pos, &v) in c.scope.iter().enumerate() {
            if out[pos] != d[v] {
                d[v] = out[pos];
                for &other in &csp.watchers[v] {
                    if other != ci && !queued[other] {
                        queued[other] = true;
                        queue.push_back(other);
                    }
                }
            }
        }
    }
    let live_after: usize = state.live.iter().map(|l| l.count_ones(..)).sum();
    counters.rules_removed = (live_before - live_after) as u64;
    Ok(Propagation {
        store: if top { Store::Top } else { Store::Domains(d) },
        state,
        counters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Labelling {
    /// Random variable, value and action (assign or remove).
    #[default]
    Random,
    /// First unfixed variable, its smallest value, assign first.
    Lexicographic,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub seed: u64,
    pub labelling: Labelling,
    /// Search stops once this many distinct fixpoints have been recorded.
    pub record_limit: usize,
    pub scheduler: Scheduler,
    pub options: Options,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            labelling: Labelling::Random,
            record_limit: 10_000,
            scheduler: Scheduler::R,
            options: Options::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub seed: u64,
    pub scheduler: Scheduler,
    /// Solutions in discovery order.
    pub solutions: Vec<Vec<usize>>,
    /// Distinct fixpoints in recording order, solutions included.
    pub fixpoints: Vec<Store>,
    pub counters: Counters,
    pub limit_reached: bool,
}

impl SearchReport {
    pub const CSV_HEADER: &'static str =
        "seed,scheduler,solutions,fixpoints,condition_tests,body_apps,rules_removed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.seed,
            self.scheduler.as_str(),
            self.solutions.len(),
            self.fixpoints.len(),
            self.counters.condition_tests,
            self.counters.body_applications,
            self.counters.rules_removed
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", Self::CSV_HEADER);
        let _ = writeln!(out, "{}", self.csv_row());
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Assign,
    Remove,
}

struct Search<'a> {
    csp: &'a Csp,
    config: SearchConfig,
    rng: ChaCha8Rng,
    seen: HashSet<Store>,
    report: SearchReport,
}

/// Depth-first search that records every distinct fixpoint it reaches and
/// backtracks on failure, on solutions and on fixpoints seen before. Each
/// node stores the propagation state of its fixpoint, and both children
/// start from a copy of it.
pub fn search(csp: &Csp, config: SearchConfig) -> Result<SearchReport, SolverError> {
    if config.record_limit == 0 {
        return Err(SolverError::ZeroLimit);
    }
    let mut s = Search {
        csp,
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        seen: HashSet::new(),
        report: SearchReport {
            seed: config.seed,
            scheduler: config.scheduler,
            solutions: Vec::new(),
            fixpoints: Vec::new(),
            counters: Counters::default(),
            limit_reached: false,
        },
    };
    s.node(csp.signature.bottom(), &csp.initial_state())?;
    Ok(s.report)
}

impl Search<'_> {
    fn node(&mut self, store: Store, state: &PropState) -> Result<(), SolverError> {
        if self.report.limit_reached {
            return Ok(());
        }
        let p = propagate(
            self.csp,
            &store,
            state,
            self.config.scheduler,
            &self.config.options,
        )?;
        self.report.counters += p.counters;
        let Store::Domains(d) = &p.store else {
            return Ok(());
        };
        if !self.seen.insert(p.store.clone()) {
            return Ok(());
        }
        self.report.fixpoints.push(p.store.clone());
        if let Some(a) = p.store.assignment() {
            self.report.solutions.push(a);
        }
        if self.report.fixpoints.len() >= self.config.record_limit {
            self.report.limit_reached = true;
            return Ok(());
        }
        let open: Vec<usize> = (0..d.len()).filter(|&v| !d[v].is_singleton()).collect();
        if open.is_empty() {
            return Ok(());
        }
        let (var, value, action) = match self.config.labelling {
            Labelling::Lexicographic => {
                let v = open[0];
                (v, d[v].first().expect("nonempty domain"), Action::Assign)
            }
            Labelling::Random => {
                let v = open[self.rng.gen_range(0..open.len())];
                let values: Vec<usize> = d[v].iter().collect();
                let a = values[self.rng.gen_range(0..values.len())];
                let act = if self.rng.gen_bool(0.5) {
                    Action::Assign
                } else {
                    Action::Remove
                };
                (v, a, act)
            }
        };
        let assign = p.store.restrict(var, DomainSet::singleton(value));
        let remove = p.store.remove_value(var, value);
        let (first, second) = match action {
            Action::Assign => (assign, remove),
            Action::Remove => (remove, assign),
        };
        self.node(first, &p.state)?;
        self.node(second, &p.state)
    }
}
