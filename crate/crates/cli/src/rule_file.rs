//! CHR-style rule files.
//!
//! ```text
//! % comment
//! c(0,Y,Z) ==> in(Y,[1,2]) | Z ## 2.
//! c(X,Y,Z,0) ==> X ## 0, Y ## 0, Z ## 0.
//! ```
//!
//! A constant in head position `i` is the condition `xi ∈ {a}`, a guard
//! `in(Y,[a,b])` is `Y ∈ {a,b}`, and a body atom `Z ## a` removes `a` from
//! `Z`. Identifiers starting with an uppercase letter or `_` are variables;
//! `_` alone is anonymous.

use std::collections::HashMap;

use proprules::{Condition, DomainSet, MembershipRule, Removal, Signature};

use crate::error::ParseError;
use crate::lexer::{quote_constant, tokenize, Spanned, Tok};

/// Variable names used in rendered output: `x y z u` up to arity 4,
/// `x1 … xn` beyond.
pub fn default_var_names(arity: usize) -> Vec<String> {
    if arity <= 4 {
        ["x", "y", "z", "u"][..arity]
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        (1..=arity).map(|i| format!("x{i}")).collect()
    }
}

pub fn parse_rules(text: &str, name: &str, sig: &Signature) -> Result<Vec<MembershipRule>, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        name,
        sig,
    };
    let mut rules = Vec::new();
    while p.pos < toks.len() {
        rules.push(p.rule()?);
    }
    Ok(rules)
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    name: &'a str,
    sig: &'a Signature,
}

impl Parser<'_> {
    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        }
    }

    fn err_at(&self, at: &Spanned, msg: impl Into<String>) -> ParseError {
        ParseError::new(at.line, at.column, msg)
    }

    fn next(&mut self, what: &str) -> Result<Spanned, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => {
                let (l, c) = self.here();
                Err(ParseError::new(
                    l,
                    c,
                    format!("unexpected end of input, expected {what}"),
                ))
            }
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let t = self.next(&tok.describe())?;
        if t.tok == tok {
            Ok(())
        } else {
            Err(ParseError::new(
                t.line,
                t.column,
                format!("expected {}, found {}", tok.describe(), t.tok.describe()),
            ))
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn value(&mut self, var: usize) -> Result<usize, ParseError> {
        let t = self.next("a constant")?;
        let Tok::Atom(v) = &t.tok else {
            return Err(self.err_at(&t, format!("expected a constant, found {}", t.tok.describe())));
        };
        self.sig
            .ordinal(var, v)
            .map_err(|_| self.err_at(&t, format!("`{v}` is not a value of argument {}", var + 1)))
    }

    fn head_var(&mut self, vars: &HashMap<String, usize>) -> Result<(usize, Spanned), ParseError> {
        let t = self.next("a variable")?;
        let Tok::Var(v) = &t.tok else {
            return Err(self.err_at(&t, format!("expected a variable, found {}", t.tok.describe())));
        };
        match vars.get(v) {
            Some(&i) => Ok((i, t.clone())),
            None => Err(self.err_at(&t, format!("variable {v} does not occur in the head"))),
        }
    }

    fn rule(&mut self) -> Result<MembershipRule, ParseError> {
        let start = self.next("a rule head")?.clone();
        match &start.tok {
            Tok::Atom(n) if n == self.name => {}
            other => {
                return Err(self.err_at(
                    &start,
                    format!("expected head `{}(…)`, found {}", self.name, other.describe()),
                ))
            }
        }
        self.expect(Tok::LParen)?;
        let arity = self.sig.arity();
        let mut vars: HashMap<String, usize> = HashMap::new();
        let mut conds: Vec<Option<DomainSet>> = vec![None; arity];
        let mut pos = 0;
        loop {
            if pos >= arity {
                let (l, c) = self.here();
                return Err(ParseError::new(
                    l,
                    c,
                    format!("head has more than {arity} arguments"),
                ));
            }
            let t = self.next("a head argument")?.clone();
            match &t.tok {
                Tok::Var(v) if v == "_" => {}
                Tok::Var(v) => {
                    if vars.insert(v.clone(), pos).is_some() {
                        return Err(self.err_at(&t, format!("variable {v} repeated in the head")));
                    }
                }
                Tok::Atom(_) => {
                    self.pos -= 1;
                    conds[pos] = Some(DomainSet::singleton(self.value(pos)?));
                }
                other => return Err(self.err_at(&t, format!("unexpected {} in head", other.describe()))),
            }
            pos += 1;
            let t = self.next("`,` or `)`")?.clone();
            match &t.tok {
                Tok::Comma => continue,
                Tok::RParen => break,
                other => {
                    return Err(self.err_at(&t, format!("expected `,` or `)`, found {}", other.describe())))
                }
            }
        }
        if pos != arity {
            return Err(self.err_at(
                &start,
                format!("head has {pos} arguments, `{}` has arity {arity}", self.name),
            ));
        }
        self.expect(Tok::Arrow)?;

        let mut guards: Vec<(usize, DomainSet, Spanned)> = Vec::new();
        let mut body: Vec<Removal> = Vec::new();
        let mut in_body = false;
        loop {
            let is_guard = matches!(self.peek(), Some(Tok::Atom(a)) if a == "in");
            if is_guard {
                let at = self.next("a guard")?.clone();
                if in_body {
                    return Err(self.err_at(&at, "guard after `|` or after a body atom"));
                }
                self.expect(Tok::LParen)?;
                let (var, _) = self.head_var(&vars)?;
                self.expect(Tok::Comma)?;
                self.expect(Tok::LBracket)?;
                let mut set = DomainSet::EMPTY;
                loop {
                    set = set.with(self.value(var)?);
                    let t = self.next("`,` or `]`")?.clone();
                    match &t.tok {
                        Tok::Comma => continue,
                        Tok::RBracket => break,
                        other => {
                            return Err(
                                self.err_at(&t, format!("expected `,` or `]`, found {}", other.describe()))
                            )
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                guards.push((var, set, at));
            } else {
                in_body = true;
                let (var, _) = self.head_var(&vars)?;
                self.expect(Tok::NotEq)?;
                let value = self.value(var)?;
                body.push(Removal { var, value });
            }
            let t = self.next("`,`, `|` or `.`")?.clone();
            match &t.tok {
                Tok::Comma => continue,
                Tok::Bar if !in_body && !guards.is_empty() => {
                    in_body = true;
                    continue;
                }
                Tok::Dot if in_body => break,
                Tok::Dot => return Err(self.err_at(&t, "rule has guards but no body")),
                other => return Err(self.err_at(&t, format!("unexpected {}", other.describe()))),
            }
        }
        for (var, set, at) in guards {
            if conds[var].is_some() {
                return Err(self.err_at(&at, format!("second condition on argument {}", var + 1)));
            }
            conds[var] = Some(set);
        }
        let conditions = conds
            .into_iter()
            .enumerate()
            .filter_map(|(var, s)| s.map(|allowed| Condition { var, allowed }))
            .collect();
        MembershipRule::new(conditions, body).map_err(|e| self.err_at(&start, e.to_string()))
    }
}

/// Canonical text: singleton conditions on variables the body does not
/// mention go into the head, other conditions become `in` guards in
/// variable order, body atoms keep rule order.
pub fn render_rules(rules: &[MembershipRule], name: &str, sig: &Signature) -> String {
    let arity = sig.arity();
    let vars: Vec<String> = default_var_names(arity)
        .iter()
        .map(|v| v.to_uppercase())
        .collect();
    let mut out = format!("% {name}/{arity}: {} rules\n", rules.len());
    for r in rules {
        let mut head: Vec<String> = vars.clone();
        let mut guards = Vec::new();
        for c in r.conditions() {
            let in_body = r.body().iter().any(|b| b.var == c.var);
            let u = sig.universe(c.var);
            if c.allowed.is_singleton() && !in_body {
                head[c.var] = quote_constant(u.name(c.allowed.first().unwrap()));
            } else {
                let vals: Vec<String> = c.allowed.iter().map(|v| quote_constant(u.name(v))).collect();
                guards.push(format!("in({},[{}])", vars[c.var], vals.join(",")));
            }
        }
        let body: Vec<String> = r
            .body()
            .iter()
            .map(|b| {
                format!(
                    "{} ## {}",
                    vars[b.var],
                    quote_constant(sig.universe(b.var).name(b.value))
                )
            })
            .collect();
        out.push_str(&format!("{name}({}) ==> ", head.join(",")));
        if !guards.is_empty() {
            out.push_str(&format!("{} | ", guards.join(", ")));
        }
        out.push_str(&format!("{}.\n", body.join(", ")));
    }
    out
}
