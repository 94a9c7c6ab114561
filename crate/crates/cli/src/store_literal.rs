//! Command-line store literals: `x={0,1},y={1},z=0`.
//!
//! Variables may be named by their declared name or positionally as `x1`,
//! `x2`, …; omitted variables keep their full universe.

use proprules::{DomainSet, Signature, Store};

use crate::error::ParseError;

pub fn parse_store(text: &str, names: &[String], sig: &Signature) -> Result<Store, ParseError> {
    let mut domains: Vec<DomainSet> = sig.universes().iter().map(|u| u.full()).collect();
    let mut seen = vec![false; sig.arity()];
    for (part, col) in split_top_level(text) {
        let trimmed = part.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = col + part.len() - part.trim_start().len();
        let err = |msg: String| ParseError::new(1, col, msg);
        let (name, value) = trimmed
            .split_once('=')
            .ok_or_else(|| err(format!("expected `name={{…}}`, found `{trimmed}`")))?;
        let name = name.trim();
        let var = resolve(name, names).ok_or_else(|| err(format!("unknown variable `{name}`")))?;
        if std::mem::replace(&mut seen[var], true) {
            return Err(err(format!("variable `{name}` given twice")));
        }
        let value = value.trim();
        let items: Vec<&str> = match value.strip_prefix('{').and_then(|v| v.strip_suffix('}')) {
            Some(inner) => inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect(),
            None => vec![value],
        };
        if items.is_empty() {
            return Err(err(format!("empty domain for `{name}`")));
        }
        let mut d = DomainSet::EMPTY;
        for it in items {
            let v = sig
                .ordinal(var, it)
                .map_err(|_| err(format!("`{it}` is not a value of `{name}`")))?;
            d = d.with(v);
        }
        domains[var] = d;
    }
    Ok(Store::Domains(domains))
}

fn resolve(name: &str, names: &[String]) -> Option<usize> {
    if let Some(i) = names.iter().position(|n| n == name) {
        return Some(i);
    }
    let idx: usize = name.strip_prefix(['x', 'X'])?.parse().ok()?;
    (1..=names.len()).contains(&idx).then(|| idx - 1)
}

/// Splits on commas outside braces, with the 1-based column of each part.
fn split_top_level(text: &str) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push((&text[start..i], text[..start].chars().count() + 1));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((&text[start..], text[..start].chars().count() + 1));
    out
}

pub fn format_store(s: &Store, names: &[String], sig: &Signature) -> String {
    match s {
        Store::Top => "top".to_string(),
        Store::Domains(d) => d
            .iter()
            .enumerate()
            .map(|(i, x)| format!("{}={}", names[i], sig.format_domain(i, *x)))
            .collect::<Vec<_>>()
            .join(","),
    }
}
