//! Timed automata: data model, validation and concrete semantics.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::q::{fmt_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "==",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    pub fn eval<T: PartialOrd>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

/// `clock cmp bound` with an integer bound.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Constraint {
    pub clock: usize,
    pub cmp: Cmp,
    pub bound: i64,
}

impl Constraint {
    pub fn new(clock: usize, cmp: Cmp, bound: i64) -> Self {
        Constraint { clock, cmp, bound }
    }

    pub fn holds(&self, v: &[Q]) -> bool {
        self.cmp.eval(&v[self.clock], &Q::from_integer(self.bound.into()))
    }

    pub fn render(&self, clocks: &[String]) -> String {
        let name = clocks.get(self.clock).map(String::as_str).unwrap_or("?");
        format!("{} {} {}", name, self.cmp.symbol(), self.bound)
    }
}

/// Conjunction of constraints; empty means true.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Guard {
    pub conjuncts: Vec<Constraint>,
}

impl Guard {
    pub fn tt() -> Self {
        Guard::default()
    }

    pub fn of(conjuncts: Vec<Constraint>) -> Self {
        Guard { conjuncts }
    }

    pub fn is_true(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn holds(&self, v: &[Q]) -> bool {
        self.conjuncts.iter().all(|c| c.holds(v))
    }

    pub fn first_failing(&self, v: &[Q]) -> Option<&Constraint> {
        self.conjuncts.iter().find(|c| !c.holds(v))
    }

    pub fn and(&self, other: &Guard) -> Guard {
        let mut conjuncts = self.conjuncts.clone();
        conjuncts.extend(other.conjuncts.iter().cloned());
        Guard { conjuncts }
    }

    pub fn with(mut self, c: Constraint) -> Guard {
        self.conjuncts.push(c);
        self
    }

    pub fn render(&self, clocks: &[String]) -> String {
        if self.conjuncts.is_empty() {
            return "true".to_string();
        }
        self.conjuncts
            .iter()
            .map(|c| c.render(clocks))
            .collect::<Vec<_>>()
            .join(" && ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub guard: Guard,
    /// `None` is the silent action.
    pub action: Option<usize>,
    pub resets: Vec<usize>,
    pub target: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeDomain {
    Dense,
    Discrete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedAutomaton {
    pub name: String,
    pub time_domain: TimeDomain,
    pub actions: Vec<String>,
    pub clocks: Vec<String>,
    pub locations: Vec<String>,
    pub init: usize,
    pub private: BTreeSet<usize>,
    pub finals: BTreeSet<usize>,
    pub invariants: Vec<Guard>,
    pub edges: Vec<Edge>,
}

impl TimedAutomaton {
    pub fn new(name: impl Into<String>, time_domain: TimeDomain) -> Self {
        TimedAutomaton {
            name: name.into(),
            time_domain,
            actions: Vec::new(),
            clocks: Vec::new(),
            locations: Vec::new(),
            init: 0,
            private: BTreeSet::new(),
            finals: BTreeSet::new(),
            invariants: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn clock_id(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c == name)
    }

    pub fn action_id(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn location_id(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    /// Returns the id of `name`, adding the clock if absent.
    pub fn add_clock(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        match self.clock_id(&name) {
            Some(i) => i,
            None => {
                self.clocks.push(name);
                self.clocks.len() - 1
            }
        }
    }

    pub fn add_action(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        match self.action_id(&name) {
            Some(i) => i,
            None => {
                self.actions.push(name);
                self.actions.len() - 1
            }
        }
    }

    pub fn add_location(&mut self, name: impl Into<String>, invariant: Guard) -> usize {
        self.locations.push(name.into());
        self.invariants.push(invariant);
        self.locations.len() - 1
    }

    pub fn add_edge(
        &mut self,
        source: usize,
        action: Option<usize>,
        guard: Guard,
        resets: Vec<usize>,
        target: usize,
    ) -> usize {
        self.edges.push(Edge { source, guard, action, resets, target });
        self.edges.len() - 1
    }

    pub fn is_final(&self, l: usize) -> bool {
        self.finals.contains(&l)
    }

    pub fn is_private(&self, l: usize) -> bool {
        self.private.contains(&l)
    }

    pub fn has_epsilon(&self) -> bool {
        self.edges.iter().any(|e| e.action.is_none())
    }

    pub fn action_name(&self, a: Option<usize>) -> &str {
        match a {
            None => "eps",
            Some(i) => &self.actions[i],
        }
    }

    /// M(x): largest constant compared with each clock, 0 when unused.
    pub fn max_constants(&self) -> Vec<i64> {
        let mut m = vec![0i64; self.clocks.len()];
        let all = self
            .invariants
            .iter()
            .chain(self.edges.iter().map(|e| &e.guard));
        for g in all {
            for c in &g.conjuncts {
                if c.clock < m.len() {
                    m[c.clock] = m[c.clock].max(c.bound);
                }
            }
        }
        m
    }

    pub fn outgoing(&self, l: usize) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.source == l)
    }

    pub fn initial_config(&self) -> Configuration {
        Configuration {
            location: self.init,
            valuation: vec![Q::zero(); self.clocks.len()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub invariant: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}[{}]: {}", self.invariant, self.message)
    }
}

fn check_guard(
    ta: &TimedAutomaton,
    g: &Guard,
    owner: &str,
    out: &mut Vec<Diagnostic>,
) {
    for c in &g.conjuncts {
        if c.clock >= ta.clocks.len() {
            out.push(Diagnostic {
                severity: Severity::Error,
                invariant: "guard-clock",
                message: format!("{owner} constrains unknown clock #{}", c.clock),
            });
        } else if c.bound < 0 {
            out.push(Diagnostic {
                severity: Severity::Warning,
                invariant: "negative-bound",
                message: format!("{owner} has constraint {} with a negative bound", c.render(&ta.clocks)),
            });
        }
    }
}

/// Checks the structural invariants; returns an empty list for a well-formed automaton.
pub fn validate(ta: &TimedAutomaton) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let nl = ta.locations.len();
    let err = |invariant: &'static str, message: String| Diagnostic {
        severity: Severity::Error,
        invariant,
        message,
    };
    if ta.init >= nl {
        out.push(err("init", format!("initial location #{} does not exist", ta.init)));
    }
    for &l in &ta.private {
        if l >= nl {
            out.push(err("private-subset", format!("private location #{l} does not exist")));
        }
    }
    for &l in &ta.finals {
        if l >= nl {
            out.push(err("final-subset", format!("final location #{l} does not exist")));
        }
    }
    if ta.invariants.len() != nl {
        out.push(err(
            "invariant-total",
            format!("{} invariants for {} locations", ta.invariants.len(), nl),
        ));
    }
    for (kind, names) in [("location", &ta.locations), ("clock", &ta.clocks), ("action", &ta.actions)] {
        let mut seen = BTreeSet::new();
        for n in names.iter() {
            if !seen.insert(n) {
                out.push(err("unique-names", format!("duplicate {kind} name `{n}`")));
            }
        }
    }
    for (l, g) in ta.invariants.iter().enumerate() {
        let owner = format!("invariant of `{}`", ta.locations.get(l).map(String::as_str).unwrap_or("?"));
        check_guard(ta, g, &owner, &mut out);
    }
    for (i, e) in ta.edges.iter().enumerate() {
        let owner = format!("edge #{i}");
        if e.source >= nl {
            out.push(err("edge-endpoints", format!("{owner} leaves unknown location #{}", e.source)));
        }
        if e.target >= nl {
            out.push(err("edge-endpoints", format!("{owner} enters unknown location #{}", e.target)));
        }
        if let Some(a) = e.action {
            if a >= ta.actions.len() {
                out.push(err("edge-action", format!("{owner} uses unknown action #{a}")));
            }
        }
        for &r in &e.resets {
            if r >= ta.clocks.len() {
                out.push(err("resets-subset", format!("{owner} resets unknown clock #{r}")));
            }
        }
        check_guard(ta, &e.guard, &owner, &mut out);
    }
    out
}

pub fn is_valid(ta: &TimedAutomaton) -> bool {
    validate(ta).iter().all(|d| d.severity != Severity::Error)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub location: usize,
    pub valuation: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("negative delay {0}")]
    NegativeDelay(String),
    #[error("edge leaves `{edge_source}` but the configuration is in `{location}`")]
    WrongSource { edge_source: String, location: String },
    #[error("invariant violated during delay: {0}")]
    InvariantDuringDelay(String),
    #[error("guard unsatisfied: {0}")]
    GuardUnsatisfied(String),
    #[error("target invariant violated: {0}")]
    TargetInvariant(String),
}

pub fn delayed(v: &[Q], d: &Q) -> Vec<Q> {
    v.iter().map(|x| x + d).collect()
}

pub fn reset(v: &mut [Q], resets: &[usize]) {
    for &r in resets {
        v[r] = Q::zero();
    }
}

/// Delay by `delay`, then take `edge`.
pub fn step(
    ta: &TimedAutomaton,
    cfg: &Configuration,
    delay: &Q,
    edge: &Edge,
) -> Result<Configuration, StepError> {
    if delay.is_negative() {
        return Err(StepError::NegativeDelay(fmt_q(delay)));
    }
    if edge.source != cfg.location {
        return Err(StepError::WrongSource {
            edge_source: ta.locations[edge.source].clone(),
            location: ta.locations[cfg.location].clone(),
        });
    }
    let inv = &ta.invariants[cfg.location];
    // conjunctive invariants are convex: both endpoints suffice
    if let Some(c) = inv.first_failing(&cfg.valuation) {
        return Err(StepError::InvariantDuringDelay(c.render(&ta.clocks)));
    }
    let mut v = delayed(&cfg.valuation, delay);
    if let Some(c) = inv.first_failing(&v) {
        return Err(StepError::InvariantDuringDelay(c.render(&ta.clocks)));
    }
    if let Some(c) = edge.guard.first_failing(&v) {
        return Err(StepError::GuardUnsatisfied(c.render(&ta.clocks)));
    }
    reset(&mut v, &edge.resets);
    if let Some(c) = ta.invariants[edge.target].first_failing(&v) {
        return Err(StepError::TargetInvariant(c.render(&ta.clocks)));
    }
    Ok(Configuration { location: edge.target, valuation: v })
}

/// Alternating configurations and (delay, edge index) steps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Run {
    pub configs: Vec<Configuration>,
    pub steps: Vec<(Q, usize)>,
}

impl Run {
    pub fn last(&self) -> &Configuration {
        self.configs.last().expect("a run has at least one configuration")
    }

    pub fn is_private(&self, ta: &TimedAutomaton) -> bool {
        self.configs.iter().any(|c| ta.is_private(c.location))
    }

    pub fn duration(&self) -> Q {
        self.steps.iter().fold(Q::zero(), |acc, (d, _)| acc + d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TimedWord(pub Vec<(String, Q)>);

impl TimedWord {
    pub fn new(letters: Vec<(String, Q)>) -> Self {
        TimedWord(letters)
    }

    pub fn empty() -> Self {
        TimedWord(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn untimed(&self) -> Vec<&str> {
        self.0.iter().map(|(a, _)| a.as_str()).collect()
    }

    pub fn times(&self) -> Vec<Q> {
        self.0.iter().map(|(_, t)| t.clone()).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.0.windows(2).all(|w| w[0].1 <= w[1].1)
    }

    pub fn scale(&self, k: &Q) -> TimedWord {
        TimedWord(self.0.iter().map(|(a, t)| (a.clone(), t * k)).collect())
    }

    /// Parses `(a,1/2)(b,3)`; the empty string and `eps` give the empty word.
    pub fn parse(s: &str) -> Option<TimedWord> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() || s == "eps" || s == "ε" {
            return Some(TimedWord::empty());
        }
        let mut out = Vec::new();
        let mut rest = s.as_str();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(')?;
            let close = body.find(')')?;
            let (a, t) = body[..close].split_once(',')?;
            out.push((a.to_string(), crate::q::parse_q(t)?));
            rest = &body[close + 1..];
        }
        Some(TimedWord(out))
    }
}

impl fmt::Display for TimedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (a, t) in &self.0 {
            write!(f, "({}, {})", a, fmt_q(t))?;
        }
        Ok(())
    }
}

/// Observable letters of a run with absolute timestamps.
pub fn trace_of(ta: &TimedAutomaton, run: &Run) -> TimedWord {
    let mut now = Q::zero();
    let mut out = Vec::new();
    for (d, e) in &run.steps {
        now += d;
        if let Some(a) = ta.edges[*e].action {
            out.push((ta.actions[a].clone(), now.clone()));
        }
    }
    TimedWord(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("granularity must be positive")]
    BadGranularity,
    #[error("discrete-time automata need granularity 1")]
    DiscreteGranularity,
    #[error("bound exhausted: more than {0} runs")]
    BoundExhausted(usize),
}

pub const DEFAULT_RUN_CAP: usize = 200_000;

pub fn enumerate_runs(
    ta: &TimedAutomaton,
    horizon: &Q,
    max_steps: usize,
    granularity: &Q,
) -> Result<Vec<Run>, EnumError> {
    enumerate_runs_capped(ta, horizon, max_steps, granularity, DEFAULT_RUN_CAP)
}

/// Runs with delays in `granularity`·ℕ, duration ≤ `horizon` and at most `max_steps` steps.
pub fn enumerate_runs_capped(
    ta: &TimedAutomaton,
    horizon: &Q,
    max_steps: usize,
    granularity: &Q,
    cap: usize,
) -> Result<Vec<Run>, EnumError> {
    if !granularity.is_positive() {
        return Err(EnumError::BadGranularity);
    }
    if ta.time_domain == TimeDomain::Discrete && !granularity.is_integer() {
        return Err(EnumError::DiscreteGranularity);
    }
    let init = ta.initial_config();
    let mut out = Vec::new();
    if !ta.invariants[ta.init].holds(&init.valuation) {
        return Ok(out);
    }
    let mut stack = vec![Run { configs: vec![init], steps: vec![] }];
    // depth-first with explicit stack; children pushed in reverse to keep order
    while let Some(run) = stack.pop() {
        let cfg = run.last();
        if ta.is_final(cfg.location) {
            out.push(run);
            if out.len() > cap {
                return Err(EnumError::BoundExhausted(cap));
            }
            continue;
        }
        if run.steps.len() >= max_steps {
            continue;
        }
        let elapsed = run.duration();
        let mut children = Vec::new();
        let mut d = Q::zero();
        while &elapsed + &d <= *horizon {
            let v = delayed(&cfg.valuation, &d);
            if !ta.invariants[cfg.location].holds(&v) {
                break;
            }
            for (ei, e) in ta.outgoing(cfg.location) {
                if let Ok(next) = step(ta, cfg, &d, e) {
                    let mut r = run.clone();
                    r.configs.push(next);
                    r.steps.push((d.clone(), ei));
                    children.push(r);
                }
            }
            d += granularity;
        }
        if stack.len() + children.len() > cap.saturating_mul(4) {
            return Err(EnumError::BoundExhausted(cap));
        }
        stack.extend(children.into_iter().rev());
    }
    Ok(out)
}

/// Floor of a rational as i64 (values stay small at desk scale).
pub fn floor_i64(q: &Q) -> i64 {
    let f = q.numer().div_floor(q.denom());
    i64::try_from(f).unwrap_or(i64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{discrete_example, running_example};
    use crate::q::q;

    #[test]
    fn running_example_is_valid() {
        assert!(validate(&running_example()).is_empty());
    }

    #[test]
    fn unknown_location_and_clock_reported() {
        let mut ta = running_example();
        ta.edges[0].target = 9;
        assert_eq!(validate(&ta).len(), 1);
        let mut ta = running_example();
        ta.edges[0].resets.push(5);
        let d = validate(&ta);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].invariant, "resets-subset");
    }

    #[test]
    fn negative_bound_is_a_warning() {
        let mut ta = running_example();
        ta.edges[0].guard.conjuncts.push(Constraint::new(0, Cmp::Ge, -1));
        let d = validate(&ta);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
        assert!(is_valid(&ta));
    }

    fn eps_edge(ta: &TimedAutomaton) -> &Edge {
        let l0 = ta.location_id("l0").unwrap();
        let l2 = ta.location_id("l2").unwrap();
        ta.edges.iter().find(|e| e.source == l0 && e.target == l2).unwrap()
    }

    #[test]
    fn step_examples() {
        let ta = running_example();
        let c0 = ta.initial_config();
        let c = step(&ta, &c0, &q(3, 2), eps_edge(&ta)).unwrap();
        assert_eq!(ta.locations[c.location], "l2");
        assert_eq!(c.valuation, vec![q(3, 2)]);

        let a_loop = ta.edges.iter().find(|e| e.action == ta.action_id("a")).unwrap();
        let c = step(&ta, &c0, &q(0, 1), a_loop).unwrap();
        assert_eq!(c, c0);

        let e = step(&ta, &c0, &q(5, 2), eps_edge(&ta)).unwrap_err();
        assert!(matches!(e, StepError::TargetInvariant(_)));
        assert!(e.to_string().starts_with("target invariant violated"));

        let e = step(&ta, &c0, &q(1, 2), eps_edge(&ta)).unwrap_err();
        assert!(matches!(e, StepError::GuardUnsatisfied(_)));
        let e = step(&ta, &c0, &q(4, 1), eps_edge(&ta)).unwrap_err();
        assert!(matches!(e, StepError::InvariantDuringDelay(_)));
    }

    #[test]
    fn running_example_runs_contain_private_b() {
        let ta = running_example();
        let runs = enumerate_runs(&ta, &q(3, 1), 4, &q(1, 2)).unwrap();
        let w = TimedWord::parse("(b,3/2)").unwrap();
        assert!(runs.iter().any(|r| r.is_private(&ta) && trace_of(&ta, r) == w));
        for r in &runs {
            assert!(trace_of(&ta, r).is_monotone());
            for c in &r.configs[..r.configs.len() - 1] {
                assert!(!ta.is_final(c.location));
            }
        }
    }

    #[test]
    fn unreachable_final_gives_no_runs() {
        let mut ta = running_example();
        let l1 = ta.location_id("l1").unwrap();
        ta.edges.retain(|e| e.target != l1);
        assert!(enumerate_runs(&ta, &q(3, 1), 5, &q(1, 2)).unwrap().is_empty());
    }

    #[test]
    fn discrete_example_runs() {
        let ta = discrete_example();
        let runs = enumerate_runs(&ta, &q(4, 1), 3, &q(1, 1)).unwrap();
        let traces: BTreeSet<_> = runs.iter().map(|r| trace_of(&ta, r)).collect();
        assert!(traces.contains(&TimedWord::parse("(a,3)").unwrap()));
        assert!(traces.contains(&TimedWord::parse("(a,4)").unwrap()));
        assert!(!traces.contains(&TimedWord::parse("(a,2)").unwrap()));
    }

    #[test]
    fn run_cap_is_reported() {
        let ta = running_example();
        let e = enumerate_runs_capped(&ta, &q(3, 1), 6, &q(1, 4), 10).unwrap_err();
        assert_eq!(e, EnumError::BoundExhausted(10));
    }

    #[test]
    fn trace_of_drops_silent_steps() {
        let ta = running_example();
        let l2 = ta.location_id("l2").unwrap();
        let b = ta.edges.iter().position(|e| e.source == l2).unwrap();
        let eps = ta.edges.iter().position(|e| e == eps_edge(&ta)).unwrap();
        let c0 = ta.initial_config();
        let c1 = step(&ta, &c0, &q(3, 2), &ta.edges[eps]).unwrap();
        let c2 = step(&ta, &c1, &q(0, 1), &ta.edges[b]).unwrap();
        let run = Run { configs: vec![c0, c1, c2], steps: vec![(q(3, 2), eps), (q(0, 1), b)] };
        assert_eq!(trace_of(&ta, &run).to_string(), "(b, 3/2)");
        let only_eps = Run { configs: run.configs[..2].to_vec(), steps: run.steps[..1].to_vec() };
        assert!(trace_of(&ta, &only_eps).is_empty());
    }
}
