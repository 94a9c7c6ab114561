//! Bundled constraints.
//!
//! Three-valued constraints use the universe `t f u` in that order.

use crate::rulegen::ConstraintDef;
use crate::store::{Signature, Universe};

const T: usize = 0;
const F: usize = 1;
const U: usize = 2;

fn boolean(arity: usize) -> Signature {
    Signature::uniform(arity, Universe::range(2).expect("two values"))
}

fn kleene(arity: usize) -> Signature {
    Signature::uniform(arity, Universe::new(["t", "f", "u"]).expect("three values"))
}

/// A 4-ary Boolean constraint with the solutions 0101, 1001 and 1110.
pub fn c4() -> ConstraintDef {
    let tuples = vec![vec![0, 1, 0, 1], vec![1, 0, 0, 1], vec![1, 1, 1, 0]];
    ConstraintDef::new("c", boolean(4), tuples).expect("valid constraint")
}

/// Boolean conjunction `z = x ∧ y`.
pub fn and2() -> ConstraintDef {
    let tuples = vec![vec![0, 0, 0], vec![0, 1, 0], vec![1, 0, 0], vec![1, 1, 1]];
    ConstraintDef::new("and2", boolean(3), tuples).expect("valid constraint")
}

/// Three-valued equivalence `z = (x ≡ y)`: `u` if either side is `u`,
/// otherwise `t` exactly when both sides agree.
pub fn equ3() -> ConstraintDef {
    kleene_table("equ3", |x, y| {
        if x == U || y == U {
            U
        } else if x == y {
            T
        } else {
            F
        }
    })
}

/// Three-valued conjunction `z = x ∧ y`: `f` if either side is `f`, `t` if
/// both are `t`, `u` otherwise.
pub fn and3() -> ConstraintDef {
    kleene_table("and3", |x, y| {
        if x == F || y == F {
            F
        } else if x == T && y == T {
            T
        } else {
            U
        }
    })
}

fn kleene_table(name: &str, op: impl Fn(usize, usize) -> usize) -> ConstraintDef {
    let mut tuples = Vec::with_capacity(9);
    for x in [T, F, U] {
        for y in [T, F, U] {
            tuples.push(vec![x, y, op(x, y)]);
        }
    }
    ConstraintDef::new(name, kleene(3), tuples).expect("valid constraint")
}

pub fn all() -> Vec<ConstraintDef> {
    vec![c4(), and2(), equ3(), and3()]
}

pub fn by_name(name: &str) -> Option<ConstraintDef> {
    all().into_iter().find(|c| c.name() == name)
}
