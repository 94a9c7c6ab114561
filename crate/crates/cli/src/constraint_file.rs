//! Line-oriented constraint definitions.
//!
//! ```text
//! constraint c 4        # name and arity
//! values 0 1            # universe of every variable
//! values@3 t f u        # universe of variable 3 (1-based)
//! tuple 0 1 0 1
//! ```

use proprules::{ConstraintDef, Signature, Universe};

use crate::error::ParseError;

pub fn parse_constraint(text: &str) -> Result<ConstraintDef, ParseError> {
    let mut header: Option<(String, usize, usize)> = None;
    let mut default: Option<(Vec<String>, usize)> = None;
    let mut overrides: Vec<Option<(Vec<String>, usize)>> = Vec::new();
    let mut raw_tuples: Vec<(Vec<(String, usize)>, usize)> = Vec::new();

    for (li, raw) in text.lines().enumerate() {
        let line_no = li + 1;
        let line = raw.split('#').next().unwrap_or("");
        let words = words_with_columns(line);
        let Some(((kw, kw_col), args)) = words.split_first() else {
            continue;
        };
        let err = |col: usize, msg: String| ParseError::new(line_no, col, msg);
        if *kw != "constraint" && header.is_none() {
            return Err(err(*kw_col, "expected `constraint NAME ARITY` first".into()));
        }
        match *kw {
            "constraint" => {
                if header.is_some() {
                    return Err(err(*kw_col, "second `constraint` line".into()));
                }
                let [(name, _), (arity, arity_col)] = args else {
                    return Err(err(*kw_col, "expected `constraint NAME ARITY`".into()));
                };
                let arity: usize = arity
                    .parse()
                    .map_err(|_| err(*arity_col, format!("`{arity}` is not an arity")))?;
                header = Some((name.to_string(), arity, line_no));
                overrides = vec![None; arity];
            }
            "values" => {
                if args.is_empty() {
                    return Err(err(*kw_col, "`values` needs at least one value".into()));
                }
                default = Some((args.iter().map(|(w, _)| w.to_string()).collect(), line_no));
            }
            "tuple" => {
                raw_tuples.push((args.iter().map(|(w, c)| (w.to_string(), *c)).collect(), line_no));
            }
            other => {
                let Some(pos) = other.strip_prefix("values@") else {
                    return Err(err(*kw_col, format!("unknown directive `{other}`")));
                };
                let arity = overrides.len();
                let var: usize = pos
                    .parse()
                    .ok()
                    .filter(|&v| (1..=arity).contains(&v))
                    .ok_or_else(|| {
                        err(
                            *kw_col,
                            format!("`{pos}` is not a variable position in 1..={arity}"),
                        )
                    })?;
                if args.is_empty() {
                    return Err(err(*kw_col, "`values@` needs at least one value".into()));
                }
                overrides[var - 1] = Some((args.iter().map(|(w, _)| w.to_string()).collect(), line_no));
            }
        }
    }

    let Some((name, arity, header_line)) = header else {
        return Err(ParseError::new(1, 1, "missing `constraint NAME ARITY` line"));
    };
    let mut universes = Vec::with_capacity(arity);
    for (i, o) in overrides.into_iter().enumerate() {
        let (values, line) = o
            .or_else(|| default.clone())
            .ok_or_else(|| ParseError::new(header_line, 1, format!("no universe for variable {}", i + 1)))?;
        universes.push(Universe::new(values).map_err(|e| ParseError::new(line, 1, e.to_string()))?);
    }
    let sig = Signature::new(universes);
    let mut tuples = Vec::with_capacity(raw_tuples.len());
    for (words, line) in &raw_tuples {
        if words.len() != arity {
            return Err(ParseError::new(
                *line,
                1,
                format!("tuple has {} values, expected {arity}", words.len()),
            ));
        }
        let t = words
            .iter()
            .enumerate()
            .map(|(v, (w, col))| {
                sig.ordinal(v, w).map_err(|_| {
                    ParseError::new(*line, *col, format!("`{w}` is not a value of variable {}", v + 1))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        tuples.push(t);
    }
    ConstraintDef::new(name, sig, tuples).map_err(|e| {
        let line = match &e {
            proprules::rulegen::GenError::DuplicateTuple { index } => raw_tuples[*index].1,
            _ => header_line,
        };
        ParseError::new(line, 1, e.to_string())
    })
}

/// Inverse of [`parse_constraint`].
pub fn render_constraint(c: &ConstraintDef) -> String {
    let sig = c.signature();
    let mut out = format!("constraint {} {}\n", c.name(), c.arity());
    let first = sig.universes().first();
    let uniform = first.is_some_and(|u0| sig.universes().iter().all(|u| u == u0));
    if uniform {
        out.push_str(&format!("values {}\n", first.unwrap().values().join(" ")));
    } else {
        for (i, u) in sig.universes().iter().enumerate() {
            out.push_str(&format!("values@{} {}\n", i + 1, u.values().join(" ")));
        }
    }
    for t in c.tuples() {
        let vals: Vec<&str> = t
            .iter()
            .enumerate()
            .map(|(v, &a)| sig.universe(v).name(a))
            .collect();
        out.push_str(&format!("tuple {}\n", vals.join(" ")));
    }
    out
}

fn words_with_columns(line: &str) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((&line[s..i], line[..s].chars().count() + 1));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((&line[s..], line[..s].chars().count() + 1));
    }
    out
}
