//! Tokens of the rule-file language.

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Starts with an uppercase letter or `_`.
    Var(String),
    /// Lowercase identifier, number, or quoted constant.
    Atom(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    Dot,
    Arrow,
    NotEq,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Atom(a) => format!("constant `{a}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Arrow => "`==>`".into(),
            Tok::NotEq => "`##`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

/// Splits `text` into tokens; `%` starts a comment running to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line_no, col) = (li + 1, i + 1);
            let push = |out: &mut Vec<Spanned>, tok| {
                out.push(Spanned {
                    tok,
                    line: line_no,
                    column: col,
                })
            };
            if c == '%' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let rest: String = chars[i..].iter().take(3).collect();
            if rest.starts_with("==>") {
                push(&mut out, Tok::Arrow);
                i += 3;
                continue;
            }
            if rest.starts_with("##") {
                push(&mut out, Tok::NotEq);
                i += 2;
                continue;
            }
            let single = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '[' => Some(Tok::LBracket),
                ']' => Some(Tok::RBracket),
                ',' => Some(Tok::Comma),
                '|' => Some(Tok::Bar),
                '.' => Some(Tok::Dot),
                _ => None,
            };
            if let Some(t) = single {
                push(&mut out, t);
                i += 1;
                continue;
            }
            if c == '\'' {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None => return Err(ParseError::new(line_no, col, "unterminated quoted constant")),
                        Some('\'') if chars.get(j + 1) == Some(&'\'') => {
                            s.push('\'');
                            j += 2;
                        }
                        Some('\'') => break,
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                push(&mut out, Tok::Atom(s));
                i = j + 1;
                continue;
            }
            if c.is_alphanumeric() || c == '_' {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = if c.is_uppercase() || c == '_' {
                    Tok::Var(word)
                } else {
                    Tok::Atom(word)
                };
                push(&mut out, tok);
                i = j;
                continue;
            }
            return Err(ParseError::new(
                line_no,
                col,
                format!("unexpected character `{c}`"),
            ));
        }
    }
    Ok(out)
}

/// Renders a constant so that [`tokenize`] reads it back as the same atom.
pub fn quote_constant(value: &str) -> String {
    let mut chars = value.chars();
    let plain = match chars.next() {
        Some(c) => {
            (c.is_lowercase() || c.is_ascii_digit()) && value.chars().all(|c| c.is_alphanumeric() || c == '_')
        }
        None => false,
    };
    if plain {
        value.to_string()
    } else {
        format!("'{}'", value.replace('\'', "''"))
    }
}
