//! Finite-domain constraint stores.
//!
//! A [`Store`] is either the failed store [`Store::Top`] or a sequence of
//! nonempty domains, one per variable. Any operation that would leave a
//! variable with an empty domain yields `Top` instead, so a non-`Top` store
//! never holds an empty domain.
//!
//! Stores are ordered by information content: `s ⊑ t` when `t` is `Top` or
//! every domain of `t` is a subset of the matching domain of `s`. The least
//! store assigns every variable its full universe.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::kernel::{FiniteLattice, Lattice};

/// Maximum number of values a single universe may hold.
pub const MAX_UNIVERSE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("universe must contain at least one value")]
    EmptyUniverse,
    #[error("universe has {0} values, at most {MAX_UNIVERSE} are supported")]
    UniverseTooLarge(usize),
    #[error("value `{0}` occurs twice in a universe")]
    DuplicateValue(String),
    #[error("value `{value}` is not in the universe of variable {var}")]
    UnknownValue { var: usize, value: String },
    #[error("variable index {var} out of range for arity {arity}")]
    VariableOutOfRange { var: usize, arity: usize },
    #[error("domain of variable {var} contains values outside its universe")]
    DomainOutOfUniverse { var: usize },
    #[error("store signature mismatch: expected {expected} variables, found {found}")]
    SignatureMismatch { expected: usize, found: usize },
}

/// An ordered set of named values a variable may range over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    values: Vec<String>,
    index: HashMap<String, usize>,
}

impl Universe {
    pub fn new<I, S>(values: I) -> Result<Self, StoreError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(StoreError::EmptyUniverse);
        }
        if values.len() > MAX_UNIVERSE {
            return Err(StoreError::UniverseTooLarge(values.len()));
        }
        let mut index = HashMap::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(StoreError::DuplicateValue(v.clone()));
            }
        }
        Ok(Self { values, index })
    }

    /// The universe `{0, 1, ..., n-1}` with decimal value names.
    pub fn range(n: usize) -> Result<Self, StoreError> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn ordinal(&self, value: &str) -> Option<usize> {
        self.index.get(value).copied()
    }

    pub fn name(&self, ordinal: usize) -> &str {
        &self.values[ordinal]
    }

    pub fn full(&self) -> DomainSet {
        DomainSet::full(self.len())
    }
}

/// A subset of a universe, stored as a bitmask over value ordinals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DomainSet(u64);

impl DomainSet {
    pub const EMPTY: DomainSet = DomainSet(0);

    pub fn from_bits(bits: u64) -> Self {
        DomainSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn full(width: usize) -> Self {
        debug_assert!(width <= MAX_UNIVERSE);
        if width == 64 {
            DomainSet(u64::MAX)
        } else {
            DomainSet((1u64 << width) - 1)
        }
    }

    pub fn singleton(value: usize) -> Self {
        DomainSet(1u64 << value)
    }

    pub fn from_values<I: IntoIterator<Item = usize>>(values: I) -> Self {
        DomainSet(values.into_iter().fold(0, |acc, v| acc | (1u64 << v)))
    }

    pub fn contains(self, value: usize) -> bool {
        value < 64 && self.0 & (1u64 << value) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_singleton(self) -> bool {
        self.0 != 0 && self.0 & (self.0 - 1) == 0
    }

    pub fn is_subset(self, other: DomainSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: DomainSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn intersection(self, other: DomainSet) -> DomainSet {
        DomainSet(self.0 & other.0)
    }

    pub fn union(self, other: DomainSet) -> DomainSet {
        DomainSet(self.0 | other.0)
    }

    pub fn without(self, value: usize) -> DomainSet {
        DomainSet(self.0 & !(1u64 << value))
    }

    pub fn with(self, value: usize) -> DomainSet {
        DomainSet(self.0 | (1u64 << value))
    }

    /// Smallest value in the set.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(v)
            }
        })
    }

    /// All nonempty subsets of a universe of the given width, in increasing
    /// bitmask order.
    pub fn nonempty_subsets(width: usize) -> impl Iterator<Item = DomainSet> {
        let full = DomainSet::full(width).0;
        (1..=full).map(DomainSet)
    }
}

impl fmt::Debug for DomainSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An element of the store lattice.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Store {
    /// The failed store: some variable has no value left.
    Top,
    Domains(Vec<DomainSet>),
}

impl Store {
    /// Builds a store, collapsing to `Top` when any domain is empty.
    pub fn from_domains(domains: Vec<DomainSet>) -> Store {
        if domains.iter().any(|d| d.is_empty()) {
            Store::Top
        } else {
            Store::Domains(domains)
        }
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Store::Top)
    }

    pub fn domains(&self) -> Option<&[DomainSet]> {
        match self {
            Store::Top => None,
            Store::Domains(d) => Some(d),
        }
    }

    /// Domain of `var`, or `None` for `Top`.
    pub fn domain(&self, var: usize) -> Option<DomainSet> {
        self.domains().map(|d| d[var])
    }

    /// Removes `value` from the domain of `var`. `Top` stays `Top`.
    pub fn remove_value(&self, var: usize, value: usize) -> Store {
        let mut out = self.clone();
        out.remove_value_in_place(var, value);
        out
    }

    /// In-place variant of [`Store::remove_value`]. Returns true when the
    /// store changed.
    pub fn remove_value_in_place(&mut self, var: usize, value: usize) -> bool {
        let Store::Domains(domains) = self else {
            return false;
        };
        let before = domains[var];
        if !before.contains(value) {
            return false;
        }
        let after = before.without(value);
        if after.is_empty() {
            *self = Store::Top;
        } else {
            domains[var] = after;
        }
        true
    }

    /// Replaces the domain of `var` by its intersection with `keep`.
    pub fn restrict(&self, var: usize, keep: DomainSet) -> Store {
        match self {
            Store::Top => Store::Top,
            Store::Domains(d) => {
                let mut d = d.clone();
                d[var] = d[var].intersection(keep);
                Store::from_domains(d)
            }
        }
    }

    /// True when every domain is a singleton (a complete assignment).
    pub fn is_assignment(&self) -> bool {
        self.domains().is_some_and(|d| d.iter().all(|x| x.is_singleton()))
    }

    /// The value of each variable when the store is a complete assignment.
    pub fn assignment(&self) -> Option<Vec<usize>> {
        let d = self.domains()?;
        d.iter()
            .map(|x| x.is_singleton().then(|| x.first().unwrap()))
            .collect()
    }

    /// Order test without signature checking; callers guarantee equal arity.
    pub fn leq_unchecked(&self, other: &Store) -> bool {
        match (self, other) {
            (_, Store::Top) => true,
            (Store::Top, _) => false,
            (Store::Domains(a), Store::Domains(b)) => a.iter().zip(b).all(|(x, y)| y.is_subset(*x)),
        }
    }
}

/// The per-variable universes of a store lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    universes: Vec<Universe>,
}

impl Signature {
    pub fn new(universes: Vec<Universe>) -> Self {
        Self { universes }
    }

    /// `arity` variables sharing one universe.
    pub fn uniform(arity: usize, universe: Universe) -> Self {
        Self {
            universes: vec![universe; arity],
        }
    }

    pub fn arity(&self) -> usize {
        self.universes.len()
    }

    pub fn universes(&self) -> &[Universe] {
        &self.universes
    }

    pub fn universe(&self, var: usize) -> &Universe {
        &self.universes[var]
    }

    /// The least store: every variable ranges over its whole universe.
    pub fn bottom(&self) -> Store {
        Store::Domains(self.universes.iter().map(Universe::full).collect())
    }

    pub fn leq(&self, s: &Store, t: &Store) -> Result<bool, StoreError> {
        self.check(s)?;
        self.check(t)?;
        Ok(s.leq_unchecked(t))
    }

    /// Checks that a store has this signature's arity and only in-universe values.
    pub fn check(&self, s: &Store) -> Result<(), StoreError> {
        if let Some(d) = s.domains() {
            if d.len() != self.arity() {
                return Err(StoreError::SignatureMismatch {
                    expected: self.arity(),
                    found: d.len(),
                });
            }
            for (var, (dom, u)) in d.iter().zip(&self.universes).enumerate() {
                if !dom.is_subset(u.full()) {
                    return Err(StoreError::DomainOutOfUniverse { var });
                }
            }
        }
        Ok(())
    }

    /// `remove_value` addressed by value name.
    pub fn remove_named(&self, s: &Store, var: usize, value: &str) -> Result<Store, StoreError> {
        let ordinal = self.ordinal(var, value)?;
        Ok(s.remove_value(var, ordinal))
    }

    pub fn ordinal(&self, var: usize, value: &str) -> Result<usize, StoreError> {
        let u = self.universes.get(var).ok_or(StoreError::VariableOutOfRange {
            var,
            arity: self.arity(),
        })?;
        u.ordinal(value).ok_or_else(|| StoreError::UnknownValue {
            var,
            value: value.to_string(),
        })
    }

    /// Number of elements of the lattice, `Top` included.
    pub fn carrier_size(&self) -> u128 {
        self.universes
            .iter()
            .map(|u| (1u128 << u.len()) - 1)
            .product::<u128>()
            + 1
    }

    /// Every element of the lattice: all non-`Top` stores in lexicographic
    /// bitmask order, followed by `Top`.
    pub fn all_stores(&self) -> Vec<Store> {
        let mut out = vec![Vec::with_capacity(self.arity())];
        for u in &self.universes {
            let mut next = Vec::with_capacity(out.len() * ((1 << u.len()) - 1));
            for prefix in &out {
                for d in DomainSet::nonempty_subsets(u.len()) {
                    let mut p = prefix.clone();
                    p.push(d);
                    next.push(p);
                }
            }
            out = next;
        }
        let mut stores: Vec<Store> = out.into_iter().map(Store::Domains).collect();
        stores.push(Store::Top);
        stores
    }

    /// Renders a domain as `{a,b}` using value names.
    pub fn format_domain(&self, var: usize, d: DomainSet) -> String {
        let u = &self.universes[var];
        let names: Vec<&str> = d.iter().map(|v| u.name(v)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Renders a store as `⟨{a},{b,c}⟩`, or `⊤`.
    pub fn format_store(&self, s: &Store) -> String {
        match s {
            Store::Top => "⊤".to_string(),
            Store::Domains(d) => {
                let parts: Vec<String> = d
                    .iter()
                    .enumerate()
                    .map(|(i, x)| self.format_domain(i, *x))
                    .collect();
                format!("⟨{}⟩", parts.join(","))
            }
        }
    }
}

impl Lattice for Signature {
    type Elem = Store;

    fn bottom(&self) -> Store {
        Signature::bottom(self)
    }

    fn is_top(&self, e: &Store) -> bool {
        e.is_top()
    }

    fn leq(&self, a: &Store, b: &Store) -> bool {
        a.leq_unchecked(b)
    }
}

impl FiniteLattice for Signature {
    fn elements(&self) -> Vec<Store> {
        self.all_stores()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc(arity: usize) -> Signature {
        Signature::uniform(arity, Universe::new(["a", "b", "c"]).unwrap())
    }

    fn st(sig: &Signature, doms: &[&str]) -> Store {
        Store::Domains(
            doms.iter()
                .enumerate()
                .map(|(i, s)| {
                    DomainSet::from_values(s.chars().map(|c| sig.ordinal(i, &c.to_string()).unwrap()))
                })
                .collect(),
        )
    }

    #[test]
    fn bottom_is_full_universes() {
        let bool2 = Signature::uniform(2, Universe::range(2).unwrap());
        assert_eq!(
            bool2.bottom(),
            Store::Domains(vec![DomainSet::from_bits(0b11); 2])
        );
        let empty = Signature::new(vec![]);
        assert_eq!(empty.bottom(), Store::Domains(vec![]));
        let sig = abc(4);
        assert_eq!(sig.bottom(), st(&sig, &["abc", "abc", "abc", "abc"]));
    }

    #[test]
    fn leq_examples() {
        let sig = abc(2);
        assert!(sig.leq(&st(&sig, &["ab", "b"]), &Store::Top).unwrap());
        assert!(sig.leq(&st(&sig, &["abc", "b"]), &st(&sig, &["a", "b"])).unwrap());
        assert!(!sig.leq(&st(&sig, &["a", "b"]), &st(&sig, &["ab", "b"])).unwrap());
        assert!(!sig.leq(&Store::Top, &st(&sig, &["a", "b"])).unwrap());
    }

    #[test]
    fn leq_rejects_signature_mismatch() {
        let sig = abc(2);
        let other = abc(3).bottom();
        assert_eq!(
            sig.leq(&sig.bottom(), &other),
            Err(StoreError::SignatureMismatch {
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn remove_value_examples() {
        let sig = abc(4);
        let s = st(&sig, &["a", "b", "abc", "ab"]);
        let b = sig.ordinal(2, "b").unwrap();
        assert_eq!(s.remove_value(2, b), st(&sig, &["a", "b", "ac", "ab"]));
        // Emptying a domain collapses to Top.
        assert_eq!(s.remove_value(0, 0), Store::Top);
        assert_eq!(Store::Top.remove_value(0, 0), Store::Top);
        assert_eq!(sig.remove_named(&s, 3, "c").unwrap(), s);
        assert!(sig.remove_named(&s, 3, "z").is_err());
    }

    #[test]
    fn from_domains_collapses_empty() {
        assert_eq!(
            Store::from_domains(vec![DomainSet::singleton(0), DomainSet::EMPTY]),
            Store::Top
        );
    }

    #[test]
    fn carrier_enumeration() {
        let sig = Signature::uniform(3, Universe::range(3).unwrap());
        let all = sig.all_stores();
        assert_eq!(all.len() as u128, sig.carrier_size());
        assert_eq!(all.len(), 344);
        assert!(all.iter().all(|s| s.is_top() || sig.check(s).is_ok()));
    }

    #[test]
    fn leq_agrees_with_subset_comparison() {
        let sig = Signature::new(vec![Universe::range(2).unwrap(), Universe::range(3).unwrap()]);
        let all = sig.all_stores();
        for s in &all {
            for t in &all {
                let brute = match (s.domains(), t.domains()) {
                    (_, None) => true,
                    (None, Some(_)) => false,
                    (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| {
                        let xs: Vec<usize> = x.iter().collect();
                        y.iter().all(|v| xs.contains(&v))
                    }),
                };
                assert_eq!(sig.leq(s, t).unwrap(), brute);
            }
        }
    }

    #[test]
    fn remove_value_is_inflationary_and_monotonic() {
        let sig = abc(2);
        let all = sig.all_stores();
        for var in 0..2 {
            for val in 0..3 {
                for s in &all {
                    let rs = s.remove_value(var, val);
                    assert!(s.leq_unchecked(&rs));
                    for t in &all {
                        if s.leq_unchecked(t) {
                            assert!(rs.leq_unchecked(&t.remove_value(var, val)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn universe_validation() {
        assert_eq!(
            Universe::new(Vec::<String>::new()),
            Err(StoreError::EmptyUniverse)
        );
        assert_eq!(
            Universe::new(["t", "t"]),
            Err(StoreError::DuplicateValue("t".into()))
        );
        assert!(Universe::range(65).is_err());
        assert_eq!(DomainSet::full(64).len(), 64);
    }

    #[test]
    fn format_store() {
        let sig = abc(2);
        assert_eq!(sig.format_store(&st(&sig, &["a", "bc"])), "⟨{a},{b,c}⟩");
        assert_eq!(sig.format_store(&Store::Top), "⊤");
    }
}
