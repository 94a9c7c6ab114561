//! Text serialization of compiled rule sets.
//!
//! ```text
//! proprules-compiled 1
//! constraint equ3 3
//! vars x y z
//! values@1 t f u      # quoted as in rule files when needed
//! ...
//! rule equ3(X,f,Z) ==> ... .
//! ...
//! friends 1: 2 5
//! obviated 1: 1 3
//! ...
//! ```
//!
//! Rule indices in the tables are 1-based.

use proprules::{CompiledRuleSet, MembershipRule, Signature, Universe};

use crate::error::ParseError;
use crate::lexer::{quote_constant, tokenize, Tok};
use crate::rule_file::{parse_rules, render_rules};

pub const MAGIC: &str = "proprules-compiled 1";

#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub vars: Vec<String>,
    pub signature: Signature,
    pub compiled: CompiledRuleSet<MembershipRule>,
}

pub fn write_artifact(a: &Artifact) -> String {
    let mut out = format!(
        "{MAGIC}\nconstraint {} {}\nvars {}\n",
        a.name,
        a.signature.arity(),
        a.vars.join(" ")
    );
    for (i, u) in a.signature.universes().iter().enumerate() {
        let values: Vec<String> = u.values().iter().map(|v| quote_constant(v)).collect();
        out.push_str(&format!("values@{} {}\n", i + 1, values.join(" ")));
    }
    let rules = render_rules(a.compiled.rules(), &a.name, &a.signature);
    for line in rules.lines().filter(|l| !l.starts_with('%')) {
        out.push_str(&format!("rule {line}\n"));
    }
    let list = |v: &[usize]| {
        v.iter()
            .map(|j| (j + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    for i in 0..a.compiled.len() {
        out.push_str(format!("friends {}: {}\n", i + 1, list(a.compiled.friends(i))).trim_end());
        out.push('\n');
        out.push_str(&format!("obviated {}: {}\n", i + 1, list(a.compiled.obviated(i))));
    }
    out
}

pub fn read_artifact(text: &str) -> Result<Artifact, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let err = |line: usize, msg: String| ParseError::new(line, 1, msg);
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(err(1, format!("not a compiled rule set (expected `{MAGIC}`)"))),
    }
    let mut name = None;
    let mut arity = 0usize;
    let mut vars: Vec<String> = Vec::new();
    let mut universes: Vec<Option<Universe>> = Vec::new();
    let mut rule_text = String::new();
    let mut rule_lines: Vec<usize> = Vec::new();
    let mut friends: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut obviated: Vec<(usize, Vec<usize>)> = Vec::new();
    for (no, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(' ').unwrap_or((line, ""));
        match kw {
            "constraint" => {
                let mut w = rest.split_whitespace();
                name = w.next().map(str::to_string);
                arity = w
                    .next()
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| err(no, "expected `constraint NAME ARITY`".into()))?;
                universes = vec![None; arity];
            }
            "vars" => vars = rest.split_whitespace().map(str::to_string).collect(),
            "rule" => {
                rule_text.push_str(rest);
                rule_text.push('\n');
                rule_lines.push(no);
            }
            "friends" | "obviated" => {
                let (idx, list) = rest
                    .split_once(':')
                    .ok_or_else(|| err(no, format!("expected `{kw} N: …`")))?;
                let parse_idx = |s: &str| -> Result<usize, ParseError> {
                    s.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&v| v >= 1)
                        .map(|v| v - 1)
                        .ok_or_else(|| err(no, format!("`{s}` is not a rule number")))
                };
                let i = parse_idx(idx)?;
                let items = list
                    .split_whitespace()
                    .map(parse_idx)
                    .collect::<Result<Vec<_>, _>>()?;
                if kw == "friends" {
                    friends.push((i, items));
                } else {
                    obviated.push((i, items));
                }
            }
            other => {
                let var = other
                    .strip_prefix("values@")
                    .and_then(|p| p.parse::<usize>().ok())
                    .filter(|&p| (1..=arity).contains(&p))
                    .ok_or_else(|| err(no, format!("unexpected `{other}`")))?;
                let values = tokenize(rest)
                    .map_err(|e| err(no, e.message))?
                    .into_iter()
                    .map(|t| match t.tok {
                        Tok::Atom(a) => Ok(a),
                        other => Err(err(no, format!("expected a value, found {}", other.describe()))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let u = Universe::new(values).map_err(|e| err(no, e.to_string()))?;
                universes[var - 1] = Some(u);
            }
        }
    }
    let name = name.ok_or_else(|| err(1, "missing `constraint` line".into()))?;
    let universes = universes
        .into_iter()
        .enumerate()
        .map(|(i, u)| u.ok_or_else(|| err(1, format!("missing universe of variable {}", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    if vars.len() != arity {
        return Err(err(
            1,
            format!("`vars` lists {} names for arity {arity}", vars.len()),
        ));
    }
    let signature = Signature::new(universes);
    let rules = parse_rules(&rule_text, &name, &signature).map_err(|mut e| {
        e.line = rule_lines.get(e.line - 1).copied().unwrap_or(e.line);
        e.column += "rule ".len();
        e
    })?;
    let n = rules.len();
    let table = |entries: Vec<(usize, Vec<usize>)>, what: &str| -> Result<Vec<Vec<usize>>, ParseError> {
        let mut t: Vec<Option<Vec<usize>>> = vec![None; n];
        for (i, items) in entries {
            let slot = t
                .get_mut(i)
                .ok_or_else(|| err(1, format!("{what} entry for unknown rule {}", i + 1)))?;
            *slot = Some(items);
        }
        t.into_iter()
            .enumerate()
            .map(|(i, x)| x.ok_or_else(|| err(1, format!("missing {what} entry for rule {}", i + 1))))
            .collect()
    };
    let friends = table(friends, "friends")?;
    let obviated = table(obviated, "obviated")?;
    let compiled =
        CompiledRuleSet::from_parts(rules, friends, obviated).map_err(|e| err(1, e.to_string()))?;
    Ok(Artifact {
        name,
        vars,
        signature,
        compiled,
    })
}
