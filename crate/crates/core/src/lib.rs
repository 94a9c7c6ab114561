//! Constraint propagation with prop rules.
//!
//! [`kernel`] holds the generic schedulers over any finite lattice. [`store`]
//! and [`memrules`] instantiate them for finite-domain CSPs, [`setrules`] for
//! ground proof rules over a powerset. [`rulegen`], [`redundancy`] and
//! [`solver`] build on the membership-rule instance.

pub mod kernel;
pub mod library;
pub mod memrules;
pub mod redundancy;
pub mod rulegen;
pub mod setrules;
pub mod solver;
pub mod store;

pub use kernel::{
    compile, gi_fixpoint, r_fixpoint, resume, Choose, CompiledRuleSet, Counters, DeadRuleCheck, KernelError,
    Lattice, Options, PropRule, SchedulerTrace,
};
pub use memrules::{Condition, MembershipRule, Removal, RuleError};
pub use rulegen::ConstraintDef;
pub use store::{DomainSet, Signature, Store, StoreError, Universe};
