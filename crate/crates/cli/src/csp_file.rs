//! CSP files.
//!
//! ```text
//! domain kleene3 t f u
//! var x y z : kleene3
//! var a b : {0,1}
//! include "gates.con"
//! post equ3(x, y, z)
//! post and2(a, b, a2) with equality
//! ```
//!
//! `#` starts a comment. Rules default to membership rules.

use std::collections::HashMap;

use proprules::rulegen::RuleKind;
use proprules::Universe;

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub constraint: String,
    pub args: Vec<String>,
    pub kind: RuleKind,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CspSpec {
    pub vars: Vec<(String, Universe)>,
    /// Included constraint files with the line that names them.
    pub includes: Vec<(String, usize)>,
    pub posts: Vec<Post>,
}

pub fn parse_csp(text: &str) -> Result<CspSpec, ParseError> {
    let mut domains: HashMap<String, Universe> = HashMap::new();
    let mut spec = CspSpec {
        vars: Vec::new(),
        includes: Vec::new(),
        posts: Vec::new(),
    };
    for (li, raw) in text.lines().enumerate() {
        let no = li + 1;
        let line = raw.split('#').next().unwrap_or("");
        let indent = line.len() - line.trim_start().len();
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest_col = indent + kw.len() + 2;
        let err = |col: usize, msg: String| ParseError::new(no, col, msg);
        match kw {
            "domain" => {
                let mut w = rest.split_whitespace();
                let name = w
                    .next()
                    .ok_or_else(|| err(rest_col, "expected `domain NAME v…`".into()))?;
                let u = Universe::new(w).map_err(|e| err(rest_col, e.to_string()))?;
                domains.insert(name.to_string(), u);
            }
            "var" => {
                let (names, dom) = rest
                    .split_once(':')
                    .ok_or_else(|| err(rest_col, "expected `var NAMES : DOMAIN`".into()))?;
                let dom = dom.trim();
                let u = if let Some(inner) = dom.strip_prefix('{').and_then(|d| d.strip_suffix('}')) {
                    Universe::new(inner.split(',').map(str::trim).filter(|s| !s.is_empty()))
                        .map_err(|e| err(rest_col, e.to_string()))?
                } else {
                    domains
                        .get(dom)
                        .cloned()
                        .ok_or_else(|| err(rest_col + names.len() + 1, format!("unknown domain `{dom}`")))?
                };
                let names: Vec<&str> = names.split_whitespace().collect();
                if names.is_empty() {
                    return Err(err(rest_col, "no variable names".into()));
                }
                for n in names {
                    if spec.vars.iter().any(|(v, _)| v == n) {
                        return Err(err(rest_col, format!("variable `{n}` declared twice")));
                    }
                    spec.vars.push((n.to_string(), u.clone()));
                }
            }
            "include" => {
                let path = rest
                    .trim()
                    .strip_prefix('"')
                    .and_then(|p| p.strip_suffix('"'))
                    .ok_or_else(|| err(rest_col, "expected `include \"PATH\"`".into()))?;
                spec.includes.push((path.to_string(), no));
            }
            "post" => {
                let open = rest
                    .find('(')
                    .ok_or_else(|| err(rest_col, "expected `post NAME(ARGS)`".into()))?;
                let close = rest
                    .rfind(')')
                    .ok_or_else(|| err(rest_col + open, "missing `)`".into()))?;
                let constraint = rest[..open].trim().to_string();
                if constraint.is_empty() {
                    return Err(err(rest_col, "missing constraint name".into()));
                }
                let args: Vec<String> = rest[open + 1..close]
                    .split(',')
                    .map(|a| a.trim().to_string())
                    .collect();
                for a in &args {
                    if !spec.vars.iter().any(|(v, _)| v == a) {
                        return Err(err(rest_col + open + 1, format!("unknown variable `{a}`")));
                    }
                }
                let tail: Vec<&str> = rest[close + 1..].split_whitespace().collect();
                let kind = match tail.as_slice() {
                    [] => RuleKind::Membership,
                    ["with", "membership"] => RuleKind::Membership,
                    ["with", "equality"] => RuleKind::Equality,
                    _ => {
                        return Err(err(
                            rest_col + close + 1,
                            "expected `with equality` or `with membership`".into(),
                        ))
                    }
                };
                spec.posts.push(Post {
                    constraint,
                    args,
                    kind,
                    line: no,
                });
            }
            other => return Err(err(indent + 1, format!("unknown directive `{other}`"))),
        }
    }
    Ok(spec)
}
