use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;

use proprules::kernel::{r_fixpoint_with, Choose, DeadRuleCheck, Options};
use proprules::redundancy::{minimize, solving_stats, SelectionOrder};
use proprules::rulegen::{self, GenLimits, RuleKind};
use proprules::solver::{search, Labelling, Scheduler, SearchConfig, SearchReport};
use proprules::{compile, Store};
use proprules_cli::artifact::{read_artifact, write_artifact, Artifact};
use proprules_cli::load::{load_constraint, load_csp, load_rules, read, write, CliError};
use proprules_cli::rule_file::{default_var_names, render_rules};
use proprules_cli::store_literal::{format_store, parse_store};
use proprules_cli::ParseError;

#[derive(Parser)]
#[command(
    name = "proprules",
    version,
    about = "Propagation rules for finite-domain constraints"
)]
struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Equality,
    Membership,
}

impl From<KindArg> for RuleKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Equality => RuleKind::Equality,
            KindArg::Membership => RuleKind::Membership,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    #[value(name = "GI", alias = "gi")]
    Gi,
    #[value(name = "R", alias = "r")]
    R,
}

impl From<SchedulerArg> for Scheduler {
    fn from(s: SchedulerArg) -> Self {
        match s {
            SchedulerArg::Gi => Scheduler::Gi,
            SchedulerArg::R => Scheduler::R,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DeadCheckArg {
    Always,
    SingletonOnly,
}

impl From<DeadCheckArg> for DeadRuleCheck {
    fn from(d: DeadCheckArg) -> Self {
        match d {
            DeadCheckArg::Always => DeadRuleCheck::Always,
            DeadCheckArg::SingletonOnly => DeadRuleCheck::SingletonOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LabellingArg {
    Random,
    Lex,
}

impl From<LabellingArg> for Labelling {
    fn from(l: LabellingArg) -> Self {
        match l {
            LabellingArg::Random => Labelling::Random,
            LabellingArg::Lex => Labelling::Lexicographic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate all minimal valid rules for a constraint.
    Generate {
        /// Constraint file, or the name of a bundled constraint.
        constraint: String,
        #[arg(long, value_enum, default_value = "membership")]
        kind: KindArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute friends and obviated tables and write a compiled artifact.
    Compile {
        rules: PathBuf,
        constraint: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Remove redundant atomic conclusions from a rule file.
    Minimize {
        rules: PathBuf,
        constraint: String,
        /// `cost`, or `file:<path>` listing `rule atom` pairs (1-based) to test first.
        /// `paper:<path>` is accepted as an alias.
        #[arg(long, default_value = "cost")]
        order: String,
        /// Write the per-rule CSV report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a compiled rule set to its fixpoint from a store.
    Propagate {
        artifact: PathBuf,
        /// Store literal such as `x={0,1},y={1}`; omitted variables are unrestricted.
        #[arg(long, default_value = "")]
        store: String,
        #[arg(long, value_enum, default_value = "R")]
        scheduler: SchedulerArg,
        #[arg(long, value_enum, default_value = "always")]
        dead_check: DeadCheckArg,
        /// Rule number (1-based) to select first.
        #[arg(long)]
        first: Option<usize>,
        /// Pick pending rules at random from this seed instead of FIFO.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Search a CSP and report counters as CSV.
    Solve {
        csp: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        limit: usize,
        #[arg(long, value_enum, default_value = "R")]
        scheduler: SchedulerArg,
        #[arg(long, value_enum, default_value = "random")]
        labelling: LabellingArg,
        /// Also print every solution found.
        #[arg(long)]
        solutions: bool,
    },
    /// Solving-degree CSV of a compiled artifact.
    Stats { artifact: PathBuf },
    /// Run searches for a range of seeds under both schedulers.
    Bench {
        csp: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, default_value_t = 10_000)]
        limit: usize,
        #[arg(long, value_enum, default_value = "random")]
        labelling: LabellingArg,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn load_artifact(path: &Path) -> Result<Artifact, CliError> {
    read_artifact(&read(path)?).map_err(|e| CliError::parse(path, e))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate {
            constraint,
            kind,
            output,
        } => {
            let c = load_constraint(&constraint)?;
            let rules = rulegen::generate(&c, kind.into(), &GenLimits::default())?;
            info!("generated {} rules for {}", rules.len(), c.name());
            emit(output.as_deref(), &render_rules(&rules, c.name(), c.signature()))
        }
        Command::Compile {
            rules,
            constraint,
            output,
        } => {
            let c = load_constraint(&constraint)?;
            let rules = load_rules(&rules, &c)?;
            let started = Instant::now();
            let compiled = compile(rules, c.signature()).map_err(|e| CliError::Failed(e.to_string()))?;
            let elapsed = started.elapsed();
            let stats = solving_stats(&compiled);
            let artifact = Artifact {
                name: c.name().to_string(),
                vars: default_var_names(c.arity()),
                signature: c.signature().clone(),
                compiled,
            };
            write(&output, &write_artifact(&artifact))?;
            println!(
                "compiled {} rules in {:.3} ms: {}",
                stats.rule_count,
                elapsed.as_secs_f64() * 1e3,
                stats.summary()
            );
            Ok(())
        }
        Command::Minimize {
            rules: rules_path,
            constraint,
            order,
            report,
            output,
        } => {
            let c = load_constraint(&constraint)?;
            let rules = load_rules(&rules_path, &c)?;
            let order = parse_order(&order, &rules)?;
            let rep = minimize(&rules, c.signature(), &order);
            let compiled =
                compile(rules.clone(), c.signature()).map_err(|e| CliError::Failed(e.to_string()))?;
            let degrees: Vec<f64> = (0..compiled.len()).map(|i| compiled.solving_degree(i)).collect();
            if let Some(p) = report {
                write(p, &rep.to_csv(&rules, &degrees))?;
            }
            eprintln!("{}", rep.summary());
            emit(
                output.as_deref(),
                &render_rules(&rep.kept, c.name(), c.signature()),
            )
        }
        Command::Propagate {
            artifact,
            store,
            scheduler,
            dead_check,
            first,
            seed,
        } => {
            let a = load_artifact(&artifact)?;
            let start =
                parse_store(&store, &a.vars, &a.signature).map_err(|e| CliError::parse("--store", e))?;
            let n = a.compiled.len();
            let first = match first {
                Some(f) if f == 0 || f > n => {
                    return Err(CliError::Usage(format!(
                        "--first must be a rule number in 1..={n}"
                    )))
                }
                Some(f) => Some(f - 1),
                None => None,
            };
            let opts = Options {
                choose: seed.map_or(Choose::Fifo, Choose::Random),
                dead_check: dead_check.into(),
                first,
            };
            let trace = match Scheduler::from(scheduler) {
                Scheduler::R => r_fixpoint_with(
                    &a.compiled,
                    &a.signature,
                    start,
                    &a.compiled.full_live(),
                    &opts,
                    &mut (),
                )
                .map_err(|e| CliError::Failed(e.to_string()))?,
                Scheduler::Gi => proprules::kernel::gi_fixpoint_with(
                    a.compiled.rules(),
                    &a.signature,
                    start,
                    &opts,
                    &mut (),
                ),
            };
            println!(
                "store: {}",
                format_store(&trace.final_store, &a.vars, &a.signature)
            );
            println!(
                "condition_tests={} body_applications={} rules_removed={} live={}",
                trace.counters.condition_tests,
                trace.counters.body_applications,
                trace.counters.rules_removed,
                trace.live_count()
            );
            Ok(())
        }
        Command::Solve {
            csp,
            seed,
            limit,
            scheduler,
            labelling,
            solutions,
        } => {
            let csp_def = load_csp(&csp)?;
            if limit == 0 {
                return Err(CliError::Usage("--limit must be positive".into()));
            }
            let config = SearchConfig {
                seed,
                labelling: labelling.into(),
                record_limit: limit,
                scheduler: scheduler.into(),
                options: Options::default(),
            };
            let rep = search(&csp_def, config)?;
            let mut out = rep.to_csv();
            if solutions {
                for s in &rep.solutions {
                    let store =
                        Store::Domains(s.iter().map(|&v| proprules::DomainSet::singleton(v)).collect());
                    out.push_str(&format!(
                        "# {}\n",
                        format_store(&store, csp_def.names(), csp_def.signature())
                    ));
                }
            }
            emit(None, &out)
        }
        Command::Stats { artifact } => {
            let a = load_artifact(&artifact)?;
            let stats = solving_stats(&a.compiled);
            eprintln!("{}", stats.summary());
            emit(None, &stats.to_csv())
        }
        Command::Bench {
            csp,
            seeds,
            first_seed,
            limit,
            labelling,
        } => {
            let csp_def = load_csp(&csp)?;
            if limit == 0 {
                return Err(CliError::Usage("--limit must be positive".into()));
            }
            let runs: Vec<Result<(SearchReport, SearchReport), CliError>> = (first_seed..first_seed + seeds)
                .into_par_iter()
                .map(|seed| {
                    let cfg = |scheduler| SearchConfig {
                        seed,
                        labelling: labelling.into(),
                        record_limit: limit,
                        scheduler,
                        options: Options::default(),
                    };
                    Ok((
                        search(&csp_def, cfg(Scheduler::Gi))?,
                        search(&csp_def, cfg(Scheduler::R))?,
                    ))
                })
                .collect();
            let mut out = format!("{}\n", SearchReport::CSV_HEADER);
            let mut fewer = 0;
            for r in runs {
                let (gi, r) = r?;
                if r.counters.condition_tests <= gi.counters.condition_tests {
                    fewer += 1;
                }
                out.push_str(&format!("{}\n{}\n", gi.csv_row(), r.csv_row()));
            }
            eprintln!("R used no more condition tests than GI on {fewer}/{seeds} seeds");
            emit(None, &out)
        }
    }
}

fn parse_order(arg: &str, rules: &[proprules::MembershipRule]) -> Result<SelectionOrder, CliError> {
    if arg == "cost" {
        return Ok(SelectionOrder::Cost);
    }
    let Some(file) = arg.strip_prefix("file:").or_else(|| arg.strip_prefix("paper:")) else {
        return Err(CliError::Usage(format!(
            "unknown order `{arg}`, expected `cost` or `file:<path>`"
        )));
    };
    let text = read(file)?;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| CliError::parse(file, ParseError::new(i + 1, 1, m));
        let nums: Vec<usize> = line
            .split_whitespace()
            .map(|w| {
                w.parse::<usize>()
                    .map_err(|_| err(format!("`{w}` is not a number")))
            })
            .collect::<Result<_, _>>()?;
        let [r, a] = nums[..] else {
            return Err(err("expected `RULE ATOM`".into()));
        };
        if r == 0 || r > rules.len() || a == 0 || a > rules[r - 1].body().len() {
            return Err(err(format!("no atom {a} in rule {r}")));
        }
        pairs.push((r - 1, a - 1));
    }
    Ok(SelectionOrder::Explicit(pairs))
}
