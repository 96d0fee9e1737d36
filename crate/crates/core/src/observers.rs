//! Attacker models: time selections, projections, unfoldings and the tick construction.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::constructions::post_reset_guard;
use crate::q::{ceil, floor, fmt_q, frac, parse_q, qi, to_i64, Q};
use crate::regions::TICK;
use crate::ta::{Cmp, Constraint, Guard, TimeDomain, TimedAutomaton, TimedWord};
use crate::words::f_letter;

pub const DEFAULT_N_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObserverError {
    #[error("observation bound {n} exceeds the cap {cap} (set TOPAQ_N_CAP to raise it)")]
    NCap { n: usize, cap: usize },
    #[error("action name `{0}` is reserved by the construction")]
    Reserved(String),
    #[error("time sequence is not simple: {0}")]
    NotSimple(String),
    #[error("time sequence must be nondecreasing and nonnegative")]
    BadSequence,
    #[error("the tick construction needs dense time")]
    Discrete,
    #[error("dynamic selections have no direct projection")]
    Dynamic,
    #[error("bad observation spec `{0}`: expected first:N, static:t1,t2,... or dynamic:N")]
    BadSpec(String),
}

pub fn n_cap_from_env() -> usize {
    std::env::var("TOPAQ_N_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_N_CAP)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TimeSelection {
    FirstN(usize),
    Static(Vec<Q>),
    Dynamic(usize),
}

impl TimeSelection {
    pub fn parse(s: &str) -> Result<Self, ObserverError> {
        let bad = || ObserverError::BadSpec(s.to_string());
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "first" => Ok(TimeSelection::FirstN(arg.trim().parse().map_err(|_| bad())?)),
            "dynamic" => Ok(TimeSelection::Dynamic(arg.trim().parse().map_err(|_| bad())?)),
            "static" => {
                let arg = arg.trim();
                let tau: Vec<Q> = if arg.is_empty() {
                    Vec::new()
                } else {
                    arg.split(',').map(|p| parse_q(p.trim()).ok_or_else(bad)).collect::<Result<_, _>>()?
                };
                check_sequence(&tau)?;
                Ok(TimeSelection::Static(tau))
            }
            _ => Err(bad()),
        }
    }

    /// Number of observations the attacker gets.
    pub fn n(&self) -> usize {
        match self {
            TimeSelection::FirstN(n) | TimeSelection::Dynamic(n) => *n,
            TimeSelection::Static(t) => t.len(),
        }
    }
}

impl fmt::Display for TimeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeSelection::FirstN(n) => write!(f, "first:{n}"),
            TimeSelection::Dynamic(n) => write!(f, "dynamic:{n}"),
            TimeSelection::Static(t) => {
                let parts: Vec<String> = t.iter().map(fmt_q).collect();
                write!(f, "static:{}", parts.join(","))
            }
        }
    }
}

pub fn check_sequence(tau: &[Q]) -> Result<(), ObserverError> {
    if tau.iter().any(|t| t < &Q::zero()) || tau.windows(2).any(|p| p[0] > p[1]) {
        return Err(ObserverError::BadSequence);
    }
    Ok(())
}

pub fn check_n(n: usize) -> Result<(), ObserverError> {
    let cap = n_cap_from_env();
    if n > cap {
        return Err(ObserverError::NCap { n, cap });
    }
    Ok(())
}

/// Observed part of `w`. A static sequence switches the sensor on at τ_ind;
/// after a letter at `t` the next index is the least one above with τ ≥ t.
pub fn project(w: &TimedWord, sel: &TimeSelection) -> Result<TimedWord, ObserverError> {
    match sel {
        TimeSelection::FirstN(n) => Ok(TimedWord(w.0.iter().take(*n).cloned().collect())),
        TimeSelection::Static(tau) => {
            let mut out = Vec::new();
            let mut ind = if tau.is_empty() { None } else { Some(0) };
            for (a, t) in &w.0 {
                let Some(i) = ind else { break };
                if t >= &tau[i] {
                    out.push((a.clone(), t.clone()));
                    ind = (i + 1..tau.len()).find(|&j| &tau[j] >= t);
                }
            }
            Ok(TimedWord(out))
        }
        TimeSelection::Dynamic(_) => Err(ObserverError::Dynamic),
    }
}

fn fresh(ta: &TimedAutomaton, names: &[String], base: &str) -> String {
    let mut n = base.to_string();
    while names.contains(&n) || ta.location_id(&n).is_some() {
        n.push('\'');
    }
    n
}

fn scaled(g: &Guard, k: i64) -> Guard {
    Guard::of(g.conjuncts.iter().map(|c| Constraint::new(c.clock, c.cmp, c.bound * k)).collect())
}

/// Copy index of each location of [`unfold_first_n`].
pub fn unfold_first_n_leveled(ta: &TimedAutomaton, n: usize) -> (TimedAutomaton, Vec<usize>) {
    let mut out = TimedAutomaton::new(format!("{}_first{n}", ta.name), ta.time_domain);
    out.clocks = ta.clocks.clone();
    out.actions = ta.actions.clone();
    let mut level = Vec::new();
    let copies: Vec<Vec<usize>> = (0..=n)
        .map(|i| {
            (0..ta.locations.len())
                .map(|l| {
                    let id = out.add_location(format!("{}^{i}", ta.locations[l]), ta.invariants[l].clone());
                    level.push(i);
                    if ta.is_private(l) {
                        out.private.insert(id);
                    }
                    if ta.is_final(l) {
                        out.finals.insert(id);
                    }
                    id
                })
                .collect()
        })
        .collect();
    out.init = copies[0][ta.init];
    for i in 0..=n {
        for e in &ta.edges {
            let (act, j) = match e.action {
                None => (None, i),
                Some(a) if i < n => (Some(a), i + 1),
                Some(_) => (None, n),
            };
            out.add_edge(copies[i][e.source], act, e.guard.clone(), e.resets.clone(), copies[j][e.target]);
        }
    }
    (out, level)
}

/// N+1 copies; letters move to the next copy and are silent in the last one.
pub fn unfold_first_n(ta: &TimedAutomaton, n: usize) -> TimedAutomaton {
    unfold_first_n_leveled(ta, n).0
}

/// Ranks of nonzero fractional parts; `N_f` is the largest rank.
fn frac_ranks(tau: &[Q]) -> (Vec<i64>, i64) {
    let fr: Vec<Q> = tau.iter().map(frac).collect();
    let mut levels: Vec<&Q> = fr.iter().filter(|f| !f.is_zero()).collect();
    levels.sort();
    levels.dedup();
    let s = fr
        .iter()
        .map(|f| if f.is_zero() { 0 } else { 1 + levels.iter().position(|l| *l == f).unwrap() as i64 })
        .collect();
    (s, levels.len() as i64)
}

/// ⌊τ_i⌋ + s(i)/(N_f+1) with s the rank of frac τ_i.
pub fn normalize_sequence(tau: &[Q]) -> Vec<Q> {
    let (s, nf) = frac_ranks(tau);
    tau.iter()
        .zip(s)
        .map(|(t, r)| floor(t) + Q::new(r.into(), (nf + 1).into()))
        .collect()
}

/// Factor N_f+1 that makes a simple sequence integral.
pub fn tau_scale(tau: &[Q]) -> i64 {
    frac_ranks(tau).1 + 1
}

/// Integral constants for `unfold_tau`: the scale and the scaled sequence.
/// Discrete automata only see integer dates, so τ is rounded up instead.
fn integral_tau(ta: &TimedAutomaton, tau: &[Q], k: Option<i64>) -> Result<(i64, Vec<i64>), ObserverError> {
    check_sequence(tau)?;
    if ta.time_domain == TimeDomain::Discrete {
        return Ok((1, tau.iter().map(|t| to_i64(&ceil(t)).unwrap()).collect()));
    }
    let k = k.unwrap_or_else(|| tau_scale(tau));
    let ints = tau
        .iter()
        .map(|t| {
            let v = t * qi(k);
            if v.is_integer() {
                Ok(to_i64(&v).unwrap())
            } else {
                Err(ObserverError::NotSimple(format!("{} · {k} is not an integer", fmt_q(t))))
            }
        })
        .collect::<Result<_, _>>()?;
    Ok((k, ints))
}

/// τ-unfolding with its per-location observation count and the time scale applied.
pub fn unfold_tau_leveled(
    ta: &TimedAutomaton,
    tau: &[Q],
) -> Result<(TimedAutomaton, Vec<usize>, i64), ObserverError> {
    unfold_tau_leveled_by(ta, tau, None)
}

/// Least k making every k·τ_i an integer.
pub fn denominator_lcm(tau: &[Q]) -> i64 {
    use num_integer::Integer;
    tau.iter().fold(1i64, |acc, t| acc.lcm(&to_i64(&Q::from_integer(t.denom().clone())).unwrap_or(1)))
}

/// As [`unfold_tau_leveled`] with an explicit time scale `k` (dense time);
/// any sequence with k·τ integral is accepted.
pub fn unfold_tau_leveled_by(
    ta: &TimedAutomaton,
    tau: &[Q],
    k: Option<i64>,
) -> Result<(TimedAutomaton, Vec<usize>, i64), ObserverError> {
    let (k, tz) = integral_tau(ta, tau, k)?;
    let n = tau.len();
    let mut out = TimedAutomaton::new(format!("{}_tau", ta.name), ta.time_domain);
    out.clocks = ta.clocks.clone();
    out.actions = ta.actions.clone();
    let zname = fresh(ta, &ta.clocks, "z");
    let z = out.add_clock(zname);
    let zc = |cmp: Cmp, b: i64| Constraint::new(z, cmp, b);
    let mut level = Vec::new();
    let mut make = |out: &mut TimedAutomaton, tag: &str, i: usize, zinv: Option<i64>| -> Vec<usize> {
        (0..ta.locations.len())
            .map(|l| {
                let mut inv = scaled(&ta.invariants[l], k);
                if let Some(b) = zinv {
                    inv.conjuncts.push(zc(Cmp::Le, b));
                }
                let id = out.add_location(format!("{}^{i}_{tag}", ta.locations[l]), inv);
                level.push(i);
                if ta.is_private(l) {
                    out.private.insert(id);
                }
                if ta.is_final(l) {
                    out.finals.insert(id);
                }
                id
            })
            .collect()
    };
    let on: Vec<Vec<usize>> = (0..n).map(|i| make(&mut out, "on", i, tz.get(i + 1).copied())).collect();
    let off: Vec<Vec<usize>> = (0..=n).map(|j| make(&mut out, "off", j, tz.get(j).copied())).collect();
    out.init = off[0][ta.init];
    for e in &ta.edges {
        let g = scaled(&e.guard, k);
        let r = e.resets.clone();
        for i in 0..n {
            match e.action {
                None => {
                    out.add_edge(on[i][e.source], None, g.clone(), r.clone(), on[i][e.target]);
                }
                Some(a) => {
                    let obs = g.clone().with(zc(Cmp::Gt, tz[i]));
                    out.add_edge(on[i][e.source], Some(a), obs, r.clone(), off[i + 1][e.target]);
                    let direct = g.clone().with(zc(Cmp::Eq, tz[i]));
                    out.add_edge(off[i][e.source], Some(a), direct, r.clone(), off[i + 1][e.target]);
                }
            }
        }
        for j in 0..=n {
            let g = match (e.action, tz.get(j)) {
                (Some(_), Some(&b)) => g.clone().with(zc(Cmp::Lt, b)),
                _ => g.clone(),
            };
            out.add_edge(off[j][e.source], None, g, r.clone(), off[j][e.target]);
        }
    }
    for l in 0..ta.locations.len() {
        for i in 0..n {
            out.add_edge(off[i][l], None, Guard::of(vec![zc(Cmp::Eq, tz[i])]), vec![], on[i][l]);
            if i + 1 < n {
                out.add_edge(on[i][l], None, Guard::of(vec![zc(Cmp::Eq, tz[i + 1])]), vec![], on[i + 1][l]);
            }
        }
    }
    Ok((out, level, k))
}

/// Automaton whose traces are the τ-projected traces of `ta`, scaled by N_f+1.
pub fn unfold_tau(ta: &TimedAutomaton, tau: &[Q]) -> Result<TimedAutomaton, ObserverError> {
    Ok(unfold_tau_leveled(ta, tau)?.0)
}

pub fn o_letter(i: usize) -> String {
    format!("o_{i}")
}

/// Free unfolding: switching the sensor on is an observable letter `o_i`.
pub fn unfold_free(ta: &TimedAutomaton, n: usize) -> Result<TimedAutomaton, ObserverError> {
    for i in 0..n {
        if ta.action_id(&o_letter(i)).is_some() {
            return Err(ObserverError::Reserved(o_letter(i)));
        }
    }
    let mut out = TimedAutomaton::new(format!("{}_free{n}", ta.name), ta.time_domain);
    out.clocks = ta.clocks.clone();
    out.actions = ta.actions.clone();
    let o: Vec<usize> = (0..n).map(|i| out.add_action(o_letter(i))).collect();
    let make = |out: &mut TimedAutomaton, tag: &str, i: usize| -> Vec<usize> {
        (0..ta.locations.len())
            .map(|l| {
                let id = out.add_location(format!("{}^{i}_{tag}", ta.locations[l]), ta.invariants[l].clone());
                if ta.is_private(l) {
                    out.private.insert(id);
                }
                if ta.is_final(l) {
                    out.finals.insert(id);
                }
                id
            })
            .collect()
    };
    let on: Vec<Vec<usize>> = (0..n).map(|i| make(&mut out, "on", i)).collect();
    let off: Vec<Vec<usize>> = (0..=n).map(|j| make(&mut out, "off", j)).collect();
    out.init = off[0][ta.init];
    for e in &ta.edges {
        for i in 0..n {
            match e.action {
                None => out.add_edge(on[i][e.source], None, e.guard.clone(), e.resets.clone(), on[i][e.target]),
                Some(a) => out.add_edge(on[i][e.source], Some(a), e.guard.clone(), e.resets.clone(), off[i + 1][e.target]),
            };
        }
        for j in 0..=n {
            out.add_edge(off[j][e.source], None, e.guard.clone(), e.resets.clone(), off[j][e.target]);
        }
    }
    for l in 0..ta.locations.len() {
        for i in 0..n {
            out.add_edge(off[i][l], Some(o[i]), Guard::tt(), vec![], on[i][l]);
            if i + 1 < n {
                out.add_edge(on[i][l], Some(o[i + 1]), Guard::tt(), vec![], on[i + 1][l]);
            }
        }
    }
    Ok(out)
}

/// Tick construction over the N-unfolding.
pub fn tick_construction(ta: &TimedAutomaton, n: usize) -> Result<TimedAutomaton, ObserverError> {
    check_n(n)?;
    let (u, level) = unfold_first_n_leveled(ta, n);
    tick_leveled(&u, &level, n)
}

fn subsets(n: usize) -> impl Iterator<Item = BTreeSet<usize>> {
    (0u32..(1 << n)).map(move |mask| (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect())
}

/// Tick construction where `level[l]` observations have happened on reaching `l`.
/// A letter leaving level i resets `x_{i+1}`.
pub fn tick_leveled(ta: &TimedAutomaton, level: &[usize], n: usize) -> Result<TimedAutomaton, ObserverError> {
    check_n(n)?;
    if ta.time_domain == TimeDomain::Discrete {
        return Err(ObserverError::Discrete);
    }
    if let Some(a) = ta.actions.iter().find(|a| *a == TICK || a.starts_with("f{")) {
        return Err(ObserverError::Reserved(a.clone()));
    }
    let mut out = TimedAutomaton::new(format!("{}_tick{n}", ta.name), TimeDomain::Dense);
    out.clocks = ta.clocks.clone();
    out.actions = ta.actions.clone();
    let xs: Vec<usize> = (0..=n)
        .map(|i| {
            let name = fresh(ta, &out.clocks, &format!("x{i}"));
            out.add_clock(name)
        })
        .collect();
    let t = out.add_action(TICK);
    let le1: Vec<Constraint> = xs.iter().map(|&x| Constraint::new(x, Cmp::Le, 1)).collect();
    let lt1: Vec<Constraint> = xs.iter().map(|&x| Constraint::new(x, Cmp::Lt, 1)).collect();
    for l in 0..ta.locations.len() {
        let mut inv = if ta.is_final(l) { Guard::tt() } else { ta.invariants[l].clone() };
        inv.conjuncts.extend(le1.iter().cloned());
        let id = out.add_location(ta.locations[l].clone(), inv);
        if ta.is_private(l) {
            out.private.insert(id);
        }
    }
    let g0 = out.add_location(fresh(ta, &[], "G0"), Guard::tt());
    let g1 = out.add_location(fresh(ta, &[], "G1"), Guard::tt());
    out.init = ta.init;
    let zero = vec![Q::zero(); ta.clocks.len()];
    if !ta.is_final(ta.init) || ta.invariants[ta.init].holds(&zero) {
        out.finals.insert(g1);
    }

    for e in &ta.edges {
        if ta.is_final(e.source) {
            continue;
        }
        let mut g = e.guard.clone();
        if ta.is_final(e.target) {
            match post_reset_guard(&ta.invariants[e.target], &e.resets) {
                Some(pg) => g = g.and(&pg),
                None => continue,
            }
        }
        g.conjuncts.extend(lt1.iter().cloned());
        let mut resets = e.resets.clone();
        if e.action.is_some() {
            let i = level[e.source] + 1;
            assert!(i <= n, "letter leaves level {} with only {n} observations", level[e.source]);
            resets.push(xs[i]);
        }
        out.add_edge(e.source, e.action, g, resets, e.target);
    }

    // g_J over x1..xN, or over x0..xN when `with0`
    let g_j = |j: &BTreeSet<usize>, with0: bool| -> Guard {
        let lo = if with0 { 0 } else { 1 };
        let mut cs = Vec::new();
        for i in lo..=n {
            if j.contains(&i) {
                cs.push(Constraint::new(xs[i], Cmp::Eq, 1));
            } else {
                cs.push(Constraint::new(xs[i], Cmp::Gt, 0));
                cs.push(Constraint::new(xs[i], Cmp::Lt, 1));
            }
        }
        Guard::of(cs)
    };
    let xset = |j: &BTreeSet<usize>| -> Vec<usize> { j.iter().map(|&i| xs[i]).collect() };

    for l in 0..ta.locations.len() {
        if !ta.is_final(l) {
            out.add_edge(l, Some(t), Guard::of(vec![Constraint::new(xs[0], Cmp::Eq, 1)]), vec![xs[0]], l);
        }
        for i in subsets(n).filter(|i| !i.is_empty()) {
            out.add_edge(l, None, g_j(&i, false), xset(&i), l);
        }
    }
    for k in subsets(n) {
        let mut k0 = k.clone();
        k0.insert(0);
        let fk0 = out.add_action(f_letter(&k0));
        for lf in ta.finals.iter().copied() {
            out.add_edge(lf, Some(fk0), g_j(&k0, true), xset(&k0), g0);
        }
        if !k.is_empty() {
            let fk = out.add_action(f_letter(&k));
            out.add_edge(g0, Some(fk), g_j(&k, true), xset(&k), g0);
        }
        out.add_edge(g0, None, g_j(&k0, true), vec![], g1);
    }
    Ok(out)
}
