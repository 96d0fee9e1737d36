//! Command-line front end: `check`, `classify` and `export`.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::deciders::{
    check_bounded, check_exists, check_opacity_with, from_oracle, is_oera, refusal_reason, DecideError, Engine,
    Mode, OpacityVerdict,
};
use crate::model::{parse_model_with, ParseOptions};
use crate::observers::{tick_construction, ObserverError, TimeSelection};
use crate::oracle::{oracle_check, OracleError, OracleParams};
use crate::q::{parse_q, Q};
use crate::regions::{augment_ticks, build_region_automaton, ra_to_dot, EdgeKind, RegionAutomaton, RegionError};
use crate::ta::{TimeDomain, TimedAutomaton};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "topaq", version, about = "Opacity checking for timed automata with private locations")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exists,
    Weak,
    Full,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Auto,
    Discrete,
    Oera,
    Oracle,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum What {
    Ta,
    RegionAutomaton,
    Tick,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide an opacity property
    Check {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// first:N, static:t1,t2,... or dynamic:N
        #[arg(long)]
        obs: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        engine: EngineArg,
        /// oracle only: latest date at which letters are explored
        #[arg(long)]
        horizon: Option<String>,
        /// oracle only: grid step, 1/k
        #[arg(long)]
        granularity: Option<String>,
        /// accept rational bounds and scale every constant to integers
        #[arg(long)]
        scale_rationals: bool,
        file: PathBuf,
    },
    /// Report the subclass and which deciders apply
    Classify {
        #[arg(long)]
        scale_rationals: bool,
        file: PathBuf,
    },
    /// Print the automaton, its region automaton or its tick construction
    Export {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        /// observation bound of the tick construction
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        scale_rationals: bool,
        file: PathBuf,
    },
}

/// Exit code and text of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn out(code: i32, stdout: String) -> Self {
        Outcome { code, stdout, stderr: String::new() }
    }

    fn err(code: i32, stderr: String) -> Self {
        Outcome { code, stdout: String::new(), stderr }
    }
}

pub fn verdict_code(v: &OpacityVerdict) -> i32 {
    match (v.definitive, v.holds) {
        (false, _) => EXIT_REFUSED,
        (true, true) => EXIT_HOLDS,
        (true, false) => EXIT_VIOLATED,
    }
}

fn error_code(e: &DecideError) -> i32 {
    match e {
        DecideError::Observer(ObserverError::BadSpec(_) | ObserverError::BadSequence | ObserverError::Reserved(_))
        | DecideError::Oracle(OracleError::BadGranularity(_) | OracleError::DiscreteGranularity)
        | DecideError::BadDescription(_) => EXIT_USAGE,
        _ => EXIT_REFUSED,
    }
}

fn load(file: &PathBuf, scale_rationals: bool) -> Result<(TimedAutomaton, Q), Outcome> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Outcome::err(EXIT_USAGE, format!("cannot read {}: {e}\n", file.display())))?;
    parse_model_with(&text, ParseOptions { scale_rationals })
        .map_err(|e| Outcome::err(EXIT_USAGE, format!("{}:{e}\n", file.display())))
}

fn parse_rational(flag: &str, s: &Option<String>) -> Result<Option<Q>, Outcome> {
    match s {
        None => Ok(None),
        Some(s) => parse_q(s)
            .map(Some)
            .ok_or_else(|| Outcome::err(EXIT_USAGE, format!("--{flag}: `{s}` is not a rational number\n"))),
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exists => "exists-opacity",
        Mode::Weak => "weak opacity",
        Mode::Full => "full opacity",
    }
}

/// Human-readable verdict; timestamps are brought back to the model's units.
pub fn render_verdict(mode: Mode, sel: Option<&TimeSelection>, v: &OpacityVerdict, scale: &Q) -> String {
    let mut out = String::new();
    let _ = write!(out, "property: {}", mode_name(mode));
    if let Some(s) = sel {
        let _ = write!(out, " against {s}");
    }
    out.push('\n');
    let _ = writeln!(out, "engine: {}", v.engine);
    let word = if v.definitive && v.holds { "holds" } else if v.definitive { "violated" } else { "inconclusive" };
    let _ = writeln!(out, "verdict: {word}");
    if let Some(w) = &v.witness {
        let w = w.scale(&(Q::from_integer(1.into()) / scale));
        let what = if mode == Mode::Exists { "shared trace" } else { "witness" };
        let _ = writeln!(out, "{what}: {w}");
    }
    if let Some(s) = v.side {
        let _ = writeln!(out, "side: {s}");
    }
    for n in &v.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

/// Runs one command line (program name first) and returns its outcome.
pub fn run_command<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_HOLDS };
            return if e.use_stderr() { Outcome::err(code, e.to_string()) } else { Outcome::out(code, e.to_string()) };
        }
    };
    match cli.cmd {
        Command::Check { mode, obs, engine, horizon, granularity, scale_rationals, file } => {
            let mode = match mode {
                ModeArg::Exists => Mode::Exists,
                ModeArg::Weak => Mode::Weak,
                ModeArg::Full => Mode::Full,
            };
            let engine = match engine {
                EngineArg::Auto => Engine::Auto,
                EngineArg::Discrete => Engine::Discrete,
                EngineArg::Oera => Engine::Oera,
                EngineArg::Oracle => Engine::Oracle,
            };
            let sel = match obs.as_deref().map(TimeSelection::parse).transpose() {
                Ok(s) => s,
                Err(e) => return Outcome::err(EXIT_USAGE, format!("{e}\n")),
            };
            let (params, scale, ta) = match (|| {
                let (ta, scale) = load(&file, scale_rationals)?;
                let params = OracleParams {
                    granularity: parse_rational("granularity", &granularity)?,
                    horizon: parse_rational("horizon", &horizon)?.map(|h| h * &scale),
                    ..Default::default()
                };
                Ok::<_, Outcome>((params, scale, ta))
            })() {
                Ok(x) => x,
                Err(o) => return o,
            };
            let sel = sel.map(|s| match s {
                TimeSelection::Static(t) => TimeSelection::Static(t.into_iter().map(|x| x * &scale).collect()),
                other => other,
            });
            let result = check(&ta, mode, sel.as_ref(), engine, &params);
            match result {
                Ok(mut v) => {
                    if engine != Engine::Oracle && (horizon.is_some() || granularity.is_some()) {
                        v.notes.push("--horizon and --granularity only affect the oracle engine".into());
                    }
                    Outcome::out(verdict_code(&v), render_verdict(mode, sel.as_ref(), &v, &scale))
                }
                Err(e) => {
                    let code = error_code(&e);
                    let text = format!("property: {}\nverdict: refused\nreason: {e}\n", mode_name(mode));
                    if code == EXIT_USAGE {
                        Outcome::err(code, format!("{e}\n"))
                    } else {
                        Outcome::out(code, text)
                    }
                }
            }
        }
        Command::Classify { scale_rationals, file } => match load(&file, scale_rationals) {
            Ok((ta, _)) => Outcome::out(EXIT_HOLDS, classify(&ta)),
            Err(o) => o,
        },
        Command::Export { what, format, n, scale_rationals, file } => {
            let ta = match load(&file, scale_rationals) {
                Ok((ta, _)) => ta,
                Err(o) => return o,
            };
            match export(&ta, what, format, n) {
                Ok(s) => Outcome::out(EXIT_HOLDS, s),
                Err(e) => Outcome::err(error_code(&e), format!("{e}\n")),
            }
        }
    }
}

/// Dispatch shared by the command line and the C interface.
pub fn check(
    ta: &TimedAutomaton,
    mode: Mode,
    sel: Option<&TimeSelection>,
    engine: Engine,
    params: &OracleParams,
) -> Result<OpacityVerdict, DecideError> {
    if engine == Engine::Oracle {
        return from_oracle(oracle_check(ta, mode, sel, params)?, mode);
    }
    match sel {
        Some(s) => {
            if engine == Engine::Oera {
                return Err(DecideError::Undecidable("the oERA engine has no bounded-attacker variant".into()));
            }
            if engine == Engine::Discrete && ta.time_domain != TimeDomain::Discrete {
                return Err(DecideError::NotDiscrete);
            }
            check_bounded(ta, s, mode)
        }
        None if mode == Mode::Exists => check_exists(ta),
        None => check_opacity_with(ta, mode, engine, params),
    }
}

pub fn classify(ta: &TimedAutomaton) -> String {
    let dense = ta.time_domain == TimeDomain::Dense;
    let oera = is_oera(ta);
    let yn = |b: bool| if b { "yes" } else { "no" };
    let mut out = String::new();
    let _ = writeln!(out, "name: {}", ta.name);
    let _ = writeln!(out, "time: {}", if dense { "dense" } else { "discrete" });
    let _ = writeln!(out, "actions: {}", ta.actions.len());
    let _ = writeln!(out, "clocks: {}", ta.clocks.len());
    let _ = writeln!(out, "locations: {}", ta.locations.len());
    let _ = writeln!(out, "oERA: {}", yn(oera));
    let _ = writeln!(out, "silent transitions: {}", yn(ta.has_epsilon()));
    let _ = writeln!(out, "exists: region reachability");
    let wf = if !dense {
        "discrete engine".to_string()
    } else if oera {
        "oera engine".to_string()
    } else {
        format!("refused ({})", refusal_reason(ta))
    };
    let _ = writeln!(out, "weak/full: {wf}");
    let bounded = if dense { "tick construction" } else { "discrete unfolding" };
    let _ = writeln!(out, "bounded attacker (first/static/dynamic): {bounded}");
    let _ = writeln!(out, "oracle: grid search{}", if dense { ", inconclusive when nothing is found" } else { "" });
    out
}

pub fn ta_to_dot(ta: &TimedAutomaton) -> String {
    let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n", ta.name.replace('"', "\\\""));
    for (l, name) in ta.locations.iter().enumerate() {
        let mut label = name.clone();
        if !ta.invariants[l].is_true() {
            label = format!("{label}\\n{}", ta.invariants[l].render(&ta.clocks));
        }
        let mut attrs = String::new();
        if ta.is_final(l) {
            attrs.push_str(", peripheries=2");
        }
        if ta.is_private(l) {
            attrs.push_str(", style=filled, fillcolor=gray80");
        }
        let _ = writeln!(out, "  l{l} [label=\"{}\"{attrs}];", label.replace('"', "\\\""));
    }
    let _ = writeln!(out, "  init [shape=point];\n  init -> l{};", ta.init);
    for e in &ta.edges {
        let mut parts = vec![ta.action_name(e.action).to_string()];
        if !e.guard.is_true() {
            parts.push(e.guard.render(&ta.clocks));
        }
        if !e.resets.is_empty() {
            let r: Vec<&str> = e.resets.iter().map(|&c| ta.clocks[c].as_str()).collect();
            parts.push(format!("{}:=0", r.join(",")));
        }
        let _ = writeln!(out, "  l{} -> l{} [label=\"{}\"];", e.source, e.target, parts.join("\\n"));
    }
    out.push_str("}\n");
    out
}

pub fn ra_to_json(ra: &RegionAutomaton) -> serde_json::Value {
    let states: Vec<_> = (0..ra.len())
        .map(|s| {
            let r = &ra.states[s];
            json!({
                "id": s,
                "location": ra.locations[r.location],
                "region": r.clock.render(&ra.clocks, &ra.bounds),
                "final": ra.finals[s],
            })
        })
        .collect();
    let edges: Vec<_> = ra
        .edges
        .iter()
        .enumerate()
        .flat_map(|(s, es)| {
            es.iter().map(move |e| {
                let label = match e.kind {
                    EdgeKind::Delay => "delay".to_string(),
                    EdgeKind::Discrete(_) => ra.label_name(e.label).to_string(),
                };
                json!({ "source": s, "target": e.target, "label": label })
            })
        })
        .collect();
    json!({
        "clocks": ra.clocks,
        "actions": ra.actions,
        "bounds": ra.bounds,
        "initial": ra.initial,
        "states": states,
        "edges": edges,
    })
}

fn export(ta: &TimedAutomaton, what: What, format: Format, n: usize) -> Result<String, DecideError> {
    let ta_out = |t: &TimedAutomaton| match format {
        Format::Dot => ta_to_dot(t),
        Format::Json => serde_json::to_string_pretty(t).unwrap() + "\n",
    };
    Ok(match what {
        What::Ta => ta_out(ta),
        What::RegionAutomaton => {
            let ra = build_region_automaton(ta)?;
            match format {
                Format::Dot => ra_to_dot(&ra),
                Format::Json => serde_json::to_string_pretty(&ra_to_json(&ra)).unwrap() + "\n",
            }
        }
        What::Tick => match ta.time_domain {
            TimeDomain::Dense => ta_out(&tick_construction(ta, n)?),
            TimeDomain::Discrete => ta_out(&augment_ticks(ta).map_err(|e: RegionError| DecideError::from(e))?),
        },
    })
}
