use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use forkwait::denote::{adequacy_check, denote};
use forkwait::ids::ParamContext;
use forkwait::lang::{prepare, Comp, Type};
use forkwait::opsem::{explore, run, Policy, DEFAULT_FUEL};
use forkwait::poset::{
    decide_equal, from_json, interp, reify, to_dot, to_json, to_json_value, Equality, Poset,
};
use forkwait::syntax::{parse_program, parse_term_file, TermFile};
use forkwait::term::{scope_check, CompContext};

#[derive(Parser)]
#[command(
    name = "forkwait",
    version,
    about = "Dynamic threads with fork and wait: terms, posets and programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    /// Always step the least enabled thread
    Lowest,
    /// Step a uniformly random enabled thread; needs --seed
    Random,
    /// Every schedule
    Exhaustive,
}

#[derive(clap::Args)]
struct Schedule {
    #[arg(long, value_enum, default_value = "lowest")]
    policy: PolicyArg,
    #[arg(long)]
    seed: Option<u64>,
    /// Step limit for a run, or state limit for exhaustive exploration
    #[arg(long, env = "FORKWAIT_FUEL", default_value_t = DEFAULT_FUEL)]
    fuel: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check a program or scope-check a term
    Check { path: PathBuf },
    /// Print the normal form of a term
    Normalize {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Decide whether two terms are equal
    Eq { left: PathBuf, right: PathBuf },
    /// Run a closed program and print its trace and observation
    Run {
        path: PathBuf,
        #[command(flatten)]
        schedule: Schedule,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Explore every schedule of a closed program
    Explore {
        path: PathBuf,
        /// State limit
        #[arg(long, env = "FORKWAIT_FUEL", default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Print the denotation of a closed program of first-order type
    Denote {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Compare the observed and denoted posets of a closed program of type 0
    Adequacy {
        path: PathBuf,
        #[command(flatten)]
        schedule: Schedule,
    },
    /// Export the poset of a term, program or poset file
    Export {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// What a command found: exit 0 for a positive verdict, 1 for a negative one.
struct Report {
    text: String,
    ok: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, ok: true }
    }
}

enum Input {
    Program(Comp, Type),
    Term(TermFile),
    Poset(Poset),
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path) -> Result<Input> {
    let src = read(path)?;
    let shown = path.display();
    match path.extension().and_then(|e| e.to_str()) {
        Some("prog") => {
            let ast = parse_program(&src).map_err(|e| anyhow!("{shown}:{e}"))?;
            let (core, ty) =
                prepare(&ast, &BTreeSet::new()).map_err(|e| anyhow!("{shown}: {e}"))?;
            Ok(Input::Program(core, ty))
        }
        Some("term") => {
            let file = parse_term_file(&src).map_err(|e| anyhow!("{shown}:{e}"))?;
            scope_check(&file.term, &file.gamma, &file.delta)
                .map_err(|e| anyhow!("{shown}: {e}"))?;
            Ok(Input::Term(file))
        }
        Some("json") => Ok(Input::Poset(
            from_json(&src).map_err(|e| anyhow!("{shown}: {e}"))?,
        )),
        _ => bail!("{shown}: expected a .prog, .term or .json file"),
    }
}

fn load_term(path: &Path) -> Result<TermFile> {
    match load(path)? {
        Input::Term(f) => Ok(f),
        _ => bail!("{}: expected a .term file", path.display()),
    }
}

fn load_closed_program(path: &Path) -> Result<(Comp, Type)> {
    match load(path)? {
        Input::Program(t, ty) => Ok((t, ty)),
        _ => bail!("{}: expected a .prog file", path.display()),
    }
}

fn show_poset(p: &Poset, format: Format) -> String {
    match format {
        Format::Text => format!("{p}\n"),
        Format::Json => format!("{}\n", to_json(p)),
        Format::Dot => to_dot(p),
    }
}

fn policy(s: &Schedule) -> Result<Policy> {
    match (s.policy, s.seed) {
        (PolicyArg::Random, Some(seed)) => Ok(Policy::Random(seed)),
        (PolicyArg::Random, None) => bail!("--policy random needs --seed"),
        (PolicyArg::Lowest, _) => Ok(Policy::LowestTid),
        (PolicyArg::Exhaustive, _) => bail!("this command runs a single schedule"),
    }
}

fn policy_name(s: &Schedule) -> String {
    match (s.policy, s.seed) {
        (PolicyArg::Random, Some(seed)) => format!("random (seed {seed})"),
        (PolicyArg::Exhaustive, _) => "exhaustive".into(),
        _ => "lowest".into(),
    }
}

fn cmd_check(path: &Path) -> Result<Report> {
    Ok(Report::ok(match load(path)? {
        Input::Program(_, ty) => format!("ok: program of type {ty}\n"),
        Input::Term(f) => {
            let mut out = String::from("ok: term");
            if !f.gamma.is_empty() {
                write!(out, " with variables {}", f.gamma)?;
            }
            if !f.delta.is_empty() {
                write!(out, " over {}", f.delta.names().join(", "))?;
            }
            out.push('\n');
            out
        }
        Input::Poset(p) => {
            p.check_well_formed()
                .map_err(|e| anyhow!("{}: {e}", path.display()))?;
            format!(
                "ok: well-formed poset with {} vertices\n",
                p.vertices().len()
            )
        }
    }))
}

fn cmd_normalize(path: &Path, format: Format) -> Result<Report> {
    let f = load_term(path)?;
    let p = interp(&f.term, &f.gamma, &f.delta)?;
    let nf = reify(&p)?;
    let nf_term = nf.to_term(&f.delta);
    Ok(Report::ok(match format {
        Format::Text => format!("{nf_term}\n"),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "normal_form": nf_term.to_string(),
                "poset": to_json_value(&p),
            }))?
        ),
        Format::Dot => to_dot(&p),
    }))
}

/// Shared context of two term files: variables must agree on arity and
/// parameters are the first file's followed by any new ones.
fn merge_contexts(a: &TermFile, b: &TermFile) -> Result<(CompContext, ParamContext)> {
    let mut gamma = a.gamma.clone();
    for (x, m) in b.gamma.entries() {
        match gamma.arity(x) {
            Some(k) if k != *m => {
                bail!("variable {x} has arity {k} on the left and {m} on the right")
            }
            Some(_) => {}
            None => gamma.push(x.clone(), *m)?,
        }
    }
    let mut delta = a.delta.clone();
    for n in b.delta.names() {
        if !delta.contains(n) {
            delta.push(n.clone())?;
        }
    }
    Ok((gamma, delta))
}

fn cmd_eq(left: &Path, right: &Path) -> Result<Report> {
    let (a, b) = (load_term(left)?, load_term(right)?);
    let (gamma, delta) = merge_contexts(&a, &b)?;
    Ok(match decide_equal(&a.term, &b.term, &gamma, &delta)? {
        Equality::Equal(map) => {
            let pairs: Vec<String> = map
                .iter()
                .enumerate()
                .map(|(i, j)| format!("v{i}->v{j}"))
                .collect();
            Report::ok(format!("equal\nvertex map: {}\n", pairs.join(" ")))
        }
        Equality::NotEqual(why) => Report {
            text: format!("not equal: {why}\n"),
            ok: false,
        },
    })
}

fn cmd_explore(path: &Path, fuel: usize) -> Result<Report> {
    let (t, _) = load_closed_program(path)?;
    let ex = explore(&t, fuel)?;
    let obs = ex.observations();
    let determinate = ex.is_determinate();
    let confluence = ex.check_confluence();
    let mut out = String::new();
    writeln!(out, "states: {}", ex.states.len())?;
    writeln!(out, "schedules: {}", ex.traces().len())?;
    writeln!(out, "terminal states: {}", obs.len())?;
    writeln!(
        out,
        "determinate: {}",
        if determinate { "yes" } else { "no" }
    )?;
    match &confluence {
        Ok(()) => writeln!(out, "confluence: ok")?,
        Err(v) => writeln!(out, "confluence: {v}")?,
    }
    if let Some(o) = obs.first() {
        writeln!(out, "observation:\n{o}")?;
    }
    Ok(Report {
        text: out,
        ok: determinate && confluence.is_ok(),
    })
}

fn cmd_run(path: &Path, schedule: &Schedule, format: Format) -> Result<Report> {
    if schedule.policy == PolicyArg::Exhaustive {
        return cmd_explore(path, schedule.fuel);
    }
    let (t, _) = load_closed_program(path)?;
    let r = run(&t, policy(schedule)?, schedule.fuel)?;
    let lines: Vec<String> = r.trace.iter().map(ToString::to_string).collect();
    Ok(Report::ok(match format {
        Format::Text => format!("{}\nobservation:\n{}\n", lines.join("\n"), r.observation),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({
                "policy": policy_name(schedule),
                "trace": lines,
                "observation": to_json_value(&r.observation),
            }))?
        ),
        Format::Dot => to_dot(&r.observation),
    }))
}

fn cmd_denote(path: &Path, format: Format) -> Result<Report> {
    let (t, ty) = load_closed_program(path)?;
    let d = denote(&t, &ty, &BTreeSet::new())?;
    Ok(Report::ok(match format {
        Format::Text => TermFile {
            gamma: d.gamma,
            delta: d.delta,
            term: d.term,
        }
        .to_string(),
        other => show_poset(&d.poset, other),
    }))
}

fn cmd_adequacy(path: &Path, schedule: &Schedule) -> Result<Report> {
    let (t, ty) = load_closed_program(path)?;
    if ty != Type::empty() {
        bail!(
            "{}: adequacy needs a program of type 0, found {ty}",
            path.display()
        );
    }
    let policies = if schedule.policy == PolicyArg::Exhaustive {
        vec![Policy::LowestTid]
    } else {
        vec![policy(schedule)?]
    };
    let r = adequacy_check(&t, policies[0], schedule.fuel)?;
    let mut agree = r.agree;
    if schedule.policy == PolicyArg::Exhaustive {
        let ex = explore(&t, schedule.fuel)?;
        agree &= ex
            .observations()
            .iter()
            .all(|o| forkwait::poset::isomorphic(o, &r.denoted));
    }
    let report = json!({
        "program": path.display().to_string(),
        "policy": policy_name(schedule),
        "observed": to_json_value(&r.observed),
        "denoted": to_json_value(&r.denoted),
        "verdict": if agree { "ok" } else { "mismatch" },
    });
    Ok(Report {
        text: format!("{}\n", serde_json::to_string_pretty(&report)?),
        ok: agree,
    })
}

fn cmd_export(path: &Path, format: Format) -> Result<Report> {
    let p = match load(path)? {
        Input::Term(f) => interp(&f.term, &f.gamma, &f.delta)?,
        Input::Program(t, ty) => denote(&t, &ty, &BTreeSet::new())?.poset,
        Input::Poset(p) => {
            p.check_well_formed()?;
            p
        }
    };
    Ok(Report::ok(show_poset(&p, format)))
}

fn dispatch(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Check { path } => cmd_check(path),
        Command::Normalize { path, format } => cmd_normalize(path, *format),
        Command::Eq { left, right } => cmd_eq(left, right),
        Command::Run {
            path,
            schedule,
            format,
        } => cmd_run(path, schedule, *format),
        Command::Explore { path, fuel } => cmd_explore(path, *fuel),
        Command::Denote { path, format } => cmd_denote(path, *format),
        Command::Adequacy { path, schedule } => cmd_adequacy(path, schedule),
        Command::Export { path, format } => cmd_export(path, *format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(report) => {
            print!("{}", report.text);
            ExitCode::from(if report.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
