//! Reading inputs from disk and mapping failures to exit codes.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use proprules::rulegen::{self, GenError, GenLimits, RuleKind};
use proprules::solver::{Csp, SolverError};
use proprules::{compile, library, ConstraintDef, MembershipRule, Signature};
use thiserror::Error;

use crate::constraint_file::parse_constraint;
use crate::csp_file::parse_csp;
use crate::error::ParseError;
use crate::rule_file::parse_rules;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    SizeLimit(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Failed(_) => 1,
            CliError::Parse { .. } => 2,
            CliError::SizeLimit(_) => 3,
        }
    }

    pub fn parse(path: impl AsRef<Path>, source: ParseError) -> Self {
        CliError::Parse {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::SizeLimit(m) => CliError::SizeLimit(format!("size limit exceeded: {m}")),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Generation(g) => g.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

pub fn read(path: impl AsRef<Path>) -> Result<String, CliError> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write(path: impl AsRef<Path>, text: &str) -> Result<(), CliError> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A constraint file, or the name of a bundled constraint when no such
/// file exists.
pub fn load_constraint(arg: &str) -> Result<ConstraintDef, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        let text = read(path)?;
        return parse_constraint(&text).map_err(|e| CliError::parse(path, e));
    }
    library::by_name(arg).ok_or_else(|| CliError::Io {
        path: arg.to_string(),
        source: std::io::Error::new(
            std::io::ErrorKind::NotFound,
            "no such file and no bundled constraint of that name",
        ),
    })
}

pub fn load_rules(path: &Path, c: &ConstraintDef) -> Result<Vec<MembershipRule>, CliError> {
    let text = read(path)?;
    parse_rules(&text, c.name(), c.signature()).map_err(|e| CliError::parse(path, e))
}

/// Reads a CSP file. Constraints are looked up among included files, then
/// as `<name>.con` next to the CSP file, then in the bundled library.
pub fn load_csp(path: &Path) -> Result<Csp, CliError> {
    let text = read(path)?;
    let spec = parse_csp(&text).map_err(|e| CliError::parse(path, e))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut defs: HashMap<String, ConstraintDef> = HashMap::new();
    for (inc, line) in &spec.includes {
        let p: PathBuf = dir.join(inc);
        let t = fs::read_to_string(&p).map_err(|e| {
            CliError::parse(
                path,
                ParseError::new(*line, 1, format!("cannot include `{inc}`: {e}")),
            )
        })?;
        let c = parse_constraint(&t).map_err(|e| CliError::parse(&p, e))?;
        defs.insert(c.name().to_string(), c);
    }

    let names: Vec<String> = spec.vars.iter().map(|(n, _)| n.clone()).collect();
    let sig = Signature::new(spec.vars.iter().map(|(_, u)| u.clone()).collect());
    let mut csp = Csp::new(names, sig);
    let mut cache: HashMap<(String, bool), Arc<proprules::CompiledRuleSet<MembershipRule>>> = HashMap::new();
    for post in &spec.posts {
        if !defs.contains_key(&post.constraint) {
            let file = dir.join(format!("{}.con", post.constraint));
            let c = if file.exists() {
                let t = read(&file)?;
                parse_constraint(&t).map_err(|e| CliError::parse(&file, e))?
            } else {
                library::by_name(&post.constraint).ok_or_else(|| {
                    CliError::parse(
                        path,
                        ParseError::new(post.line, 1, format!("unknown constraint `{}`", post.constraint)),
                    )
                })?
            };
            defs.insert(post.constraint.clone(), c);
        }
        let def = &defs[&post.constraint];
        let key = (post.constraint.clone(), post.kind == RuleKind::Equality);
        let compiled = match cache.get(&key) {
            Some(c) => c.clone(),
            None => {
                let rules = rulegen::generate(def, post.kind, &GenLimits::default())?;
                let c =
                    Arc::new(compile(rules, def.signature()).map_err(|e| CliError::Failed(e.to_string()))?);
                cache.insert(key, c.clone());
                c
            }
        };
        let scope: Vec<usize> = post
            .args
            .iter()
            .map(|a| csp.var_index(a).expect("checked by the parser"))
            .collect();
        csp.post(def.name(), scope, compiled, def.signature().clone())
            .map_err(|e| CliError::parse(path, ParseError::new(post.line, 1, e.to_string())))?;
    }
    Ok(csp)
}
