//! Clock regions, region automata, tick augmentation and untimed inclusion.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::q::{floor, frac, q, qi, Q};
use crate::ta::{Cmp, Configuration, Constraint, Guard, TimeDomain, TimedAutomaton, TimedWord};

pub const DEFAULT_REGION_CAP: usize = 1_000_000;
pub const TICK: &str = "t";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("region cap exceeded: more than {0} states (set TOPAQ_REGION_CAP to raise it)")]
    Cap(usize),
    #[error("tick augmentation needs a discrete-time automaton")]
    NotDiscrete,
    #[error("action name `{0}` is reserved")]
    Reserved(String),
}

/// The region cap, from `TOPAQ_REGION_CAP` when set.
pub fn region_cap_from_env() -> usize {
    std::env::var("TOPAQ_REGION_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_REGION_CAP)
}

/// Canonical clock region. A clock is above its bound when `int > M`;
/// `frac` ranks fractional parts (0 = integral) with ranks compacted to 1..k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClockRegion {
    pub int: Vec<u32>,
    pub frac: Vec<u32>,
}

pub fn bounds_of(ta: &TimedAutomaton) -> Vec<u32> {
    ta.max_constants().iter().map(|&m| m.max(0) as u32).collect()
}

impl ClockRegion {
    pub fn zero(n: usize) -> Self {
        ClockRegion { int: vec![0; n], frac: vec![0; n] }
    }

    pub fn above(&self, c: usize, m: &[u32]) -> bool {
        self.int[c] > m[c]
    }

    pub fn of_valuation(v: &[Q], m: &[u32]) -> Self {
        let n = v.len();
        let mut int = vec![0u32; n];
        let mut fr: Vec<Q> = vec![Q::zero(); n];
        for c in 0..n {
            if v[c] > qi(m[c] as i64) {
                int[c] = m[c] + 1;
            } else {
                let f = floor(&v[c]);
                int[c] = u32::try_from(f.to_integer()).unwrap_or(0);
                fr[c] = frac(&v[c]);
            }
        }
        let mut distinct: Vec<&Q> = fr.iter().filter(|f| !f.is_zero()).collect();
        distinct.sort();
        distinct.dedup();
        let frac = (0..n)
            .map(|c| {
                if fr[c].is_zero() {
                    0
                } else {
                    1 + distinct.iter().position(|d| **d == fr[c]).unwrap() as u32
                }
            })
            .collect();
        ClockRegion { int, frac }
    }

    fn compact(&mut self) {
        let mut ranks: Vec<u32> = self.frac.iter().copied().filter(|r| *r > 0).collect();
        ranks.sort_unstable();
        ranks.dedup();
        for r in self.frac.iter_mut() {
            if *r > 0 {
                *r = 1 + ranks.binary_search(r).unwrap() as u32;
            }
        }
    }

    pub fn satisfies(&self, c: &Constraint, m: &[u32]) -> bool {
        let x = c.clock;
        if self.above(x, m) {
            return matches!(c.cmp, Cmp::Gt | Cmp::Ge) || c.bound > m[x] as i64;
        }
        let k = self.int[x] as i64;
        if self.frac[x] == 0 {
            c.cmp.eval(&k, &c.bound)
        } else {
            match c.cmp {
                Cmp::Lt | Cmp::Le => k < c.bound,
                Cmp::Eq => false,
                Cmp::Gt | Cmp::Ge => k >= c.bound,
            }
        }
    }

    pub fn satisfies_all(&self, g: &Guard, m: &[u32]) -> bool {
        g.conjuncts.iter().all(|c| self.satisfies(c, m))
    }

    pub fn reset(&self, resets: &[usize]) -> Self {
        let mut r = self.clone();
        for &c in resets {
            r.int[c] = 0;
            r.frac[c] = 0;
        }
        r.compact();
        r
    }

    pub fn is_unbounded(&self, m: &[u32]) -> bool {
        (0..self.int.len()).all(|c| self.above(c, m))
    }

    /// Next region reached by letting time elapse; itself when every clock is above its bound.
    pub fn time_successor(&self, m: &[u32]) -> Self {
        let n = self.int.len();
        let bounded: Vec<usize> = (0..n).filter(|&c| !self.above(c, m)).collect();
        let mut r = self.clone();
        if bounded.is_empty() {
            return r;
        }
        if bounded.iter().any(|&c| self.frac[c] == 0) {
            for &c in &bounded {
                if self.frac[c] == 0 {
                    if self.int[c] == m[c] {
                        r.int[c] = m[c] + 1;
                        r.frac[c] = 0;
                    } else {
                        r.frac[c] = 1;
                    }
                } else {
                    r.frac[c] += 1;
                }
            }
        } else {
            let top = bounded.iter().map(|&c| self.frac[c]).max().unwrap();
            for &c in &bounded {
                if self.frac[c] == top {
                    r.int[c] += 1;
                    r.frac[c] = 0;
                    if r.int[c] > m[c] {
                        r.int[c] = m[c] + 1;
                    }
                }
            }
        }
        r.compact();
        r
    }

    /// One time unit later over integer valuations.
    pub fn discrete_successor(&self, m: &[u32]) -> Self {
        let mut r = self.clone();
        for c in 0..r.int.len() {
            if r.int[c] <= m[c] {
                r.int[c] = (r.int[c] + 1).min(m[c] + 1);
            }
        }
        r
    }

    /// Concrete delay moving a valuation of this region into its time successor.
    pub fn successor_delay(&self, v: &[Q], m: &[u32]) -> Q {
        let bounded: Vec<usize> = (0..self.int.len()).filter(|&c| !self.above(c, m)).collect();
        if bounded.is_empty() {
            return qi(1);
        }
        let maxf = bounded.iter().map(|&c| frac(&v[c])).max().unwrap_or_else(Q::zero);
        if bounded.iter().any(|&c| self.frac[c] == 0) {
            (qi(1) - maxf) * q(1, 2)
        } else {
            qi(1) - maxf
        }
    }

    /// Constraint string such as `x=0, 1<y<2, frac(x)<frac(y)`.
    pub fn render(&self, clocks: &[String], m: &[u32]) -> String {
        let mut parts = Vec::new();
        for (c, name) in clocks.iter().enumerate() {
            if self.above(c, m) {
                parts.push(format!("{name}>{}", m[c]));
            } else if self.frac[c] == 0 {
                parts.push(format!("{name}={}", self.int[c]));
            } else {
                parts.push(format!("{}<{name}<{}", self.int[c], self.int[c] + 1));
            }
        }
        let top = self.frac.iter().copied().max().unwrap_or(0);
        if top > 0 && self.frac.iter().filter(|r| **r > 0).count() > 1 {
            let blocks: Vec<String> = (1..=top)
                .map(|r| {
                    let names: Vec<&str> = (0..clocks.len())
                        .filter(|&c| self.frac[c] == r)
                        .map(|c| clocks[c].as_str())
                        .collect();
                    names.join("=")
                })
                .collect();
            parts.push(format!("frac: {}", blocks.join(" < ")));
        }
        parts.join(", ")
    }
}

/// True iff both valuations lie in the same clock region for the bounds `m`.
pub fn valuation_equiv(v1: &[Q], v2: &[Q], m: &[u32]) -> bool {
    ClockRegion::of_valuation(v1, m) == ClockRegion::of_valuation(v2, m)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub location: usize,
    pub clock: ClockRegion,
}

pub fn region_of(cfg: &Configuration, ta: &TimedAutomaton) -> Region {
    Region {
        location: cfg.location,
        clock: ClockRegion::of_valuation(&cfg.valuation, &bounds_of(ta)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Delay,
    Discrete(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RaEdge {
    /// Action index in the source automaton; `None` for silent moves and delays.
    pub label: Option<usize>,
    pub kind: EdgeKind,
    pub target: usize,
}

#[derive(Clone, Debug)]
pub struct RegionAutomaton {
    pub time_domain: TimeDomain,
    pub actions: Vec<String>,
    pub clocks: Vec<String>,
    pub locations: Vec<String>,
    pub bounds: Vec<u32>,
    pub states: Vec<Region>,
    pub initial: Option<usize>,
    pub finals: Vec<bool>,
    pub edges: Vec<Vec<RaEdge>>,
}

impl RegionAutomaton {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn label_name(&self, l: Option<usize>) -> &str {
        l.map(|a| self.actions[a].as_str()).unwrap_or("eps")
    }

    pub fn render_state(&self, s: usize) -> String {
        let r = &self.states[s];
        format!("{}: {}", self.locations[r.location], r.clock.render(&self.clocks, &self.bounds))
    }

    /// Shortest edge path (state, edge index) from the initial state to a final one.
    pub fn path_to_final(&self) -> Option<Vec<(usize, usize)>> {
        let init = self.initial?;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        seen[init] = true;
        let mut queue = VecDeque::from([init]);
        while let Some(s) = queue.pop_front() {
            if self.finals[s] {
                let mut path = Vec::new();
                let mut cur = s;
                while let Some((p, e)) = parent[cur] {
                    path.push((p, e));
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for (i, e) in self.edges[s].iter().enumerate() {
                if !seen[e.target] {
                    seen[e.target] = true;
                    parent[e.target] = Some((s, i));
                    queue.push_back(e.target);
                }
            }
        }
        None
    }

    /// Replays a region path with concrete delays; returns the trace it produces.
    pub fn concretize(&self, ta: &TimedAutomaton, path: &[(usize, usize)]) -> TimedWord {
        let mut v = vec![Q::zero(); self.clocks.len()];
        let mut now = Q::zero();
        let mut out = Vec::new();
        for &(s, i) in path {
            let e = &self.edges[s][i];
            match e.kind {
                EdgeKind::Delay => {
                    let d = match self.time_domain {
                        TimeDomain::Discrete => qi(1),
                        TimeDomain::Dense => self.states[s].clock.successor_delay(&v, &self.bounds),
                    };
                    for x in v.iter_mut() {
                        *x += &d;
                    }
                    now += d;
                }
                EdgeKind::Discrete(ei) => {
                    if let Some(a) = e.label {
                        out.push((self.actions[a].clone(), now.clone()));
                    }
                    crate::ta::reset(&mut v, &ta.edges[ei].resets);
                }
            }
            debug_assert_eq!(ClockRegion::of_valuation(&v, &self.bounds), self.states[e.target].clock);
        }
        TimedWord(out)
    }

    pub fn reachable_count(&self) -> usize {
        self.states.len()
    }
}

/// |L| · |X|! · 2^|X| · ∏(2M(x)+2).
pub fn region_bound(ta: &TimedAutomaton) -> BigUint {
    let n = ta.clocks.len();
    let mut b = BigUint::from(ta.locations.len());
    for k in 1..=n {
        b *= BigUint::from(k);
    }
    b *= BigUint::one() << n;
    for m in bounds_of(ta) {
        b *= BigUint::from(2 * m as u64 + 2);
    }
    b
}

pub fn build_region_automaton(ta: &TimedAutomaton) -> Result<RegionAutomaton, RegionError> {
    build_region_automaton_capped(ta, region_cap_from_env())
}

/// Regions reachable from the initial configuration, with delay and discrete edges.
pub fn build_region_automaton_capped(ta: &TimedAutomaton, cap: usize) -> Result<RegionAutomaton, RegionError> {
    let m = bounds_of(ta);
    let mut ra = RegionAutomaton {
        time_domain: ta.time_domain,
        actions: ta.actions.clone(),
        clocks: ta.clocks.clone(),
        locations: ta.locations.clone(),
        bounds: m.clone(),
        states: Vec::new(),
        initial: None,
        finals: Vec::new(),
        edges: Vec::new(),
    };
    let z = ClockRegion::zero(ta.clocks.len());
    if !z.satisfies_all(&ta.invariants[ta.init], &m) {
        return Ok(ra);
    }
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); ta.locations.len()];
    for (i, e) in ta.edges.iter().enumerate() {
        out_edges[e.source].push(i);
    }
    let mut index: HashMap<Region, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut add = |ra: &mut RegionAutomaton, queue: &mut VecDeque<usize>, r: Region| -> Result<usize, RegionError> {
        if let Some(&i) = index.get(&r) {
            return Ok(i);
        }
        if ra.states.len() >= cap {
            return Err(RegionError::Cap(cap));
        }
        let i = ra.states.len();
        ra.finals.push(ta.is_final(r.location));
        ra.states.push(r.clone());
        ra.edges.push(Vec::new());
        index.insert(r, i);
        queue.push_back(i);
        Ok(i)
    };
    ra.initial = Some(add(&mut ra, &mut queue, Region { location: ta.init, clock: z })?);
    while let Some(s) = queue.pop_front() {
        if ra.finals[s] {
            continue;
        }
        let Region { location: l, clock: r } = ra.states[s].clone();
        let mut new_edges = Vec::new();
        let succ = match ta.time_domain {
            TimeDomain::Dense => r.time_successor(&m),
            TimeDomain::Discrete => r.discrete_successor(&m),
        };
        if succ.satisfies_all(&ta.invariants[l], &m) {
            let t = add(&mut ra, &mut queue, Region { location: l, clock: succ })?;
            new_edges.push(RaEdge { label: None, kind: EdgeKind::Delay, target: t });
        }
        for &ei in &out_edges[l] {
            let e = &ta.edges[ei];
            if !r.satisfies_all(&e.guard, &m) {
                continue;
            }
            let nr = r.reset(&e.resets);
            if !nr.satisfies_all(&ta.invariants[e.target], &m) {
                continue;
            }
            let t = add(&mut ra, &mut queue, Region { location: e.target, clock: nr })?;
            new_edges.push(RaEdge { label: e.action, kind: EdgeKind::Discrete(ei), target: t });
        }
        ra.edges[s] = new_edges;
    }
    Ok(ra)
}

/// Adds a clock `z` and a letter `t` fired at each integral time unit.
pub fn augment_ticks(ta: &TimedAutomaton) -> Result<TimedAutomaton, RegionError> {
    if ta.time_domain != TimeDomain::Discrete {
        return Err(RegionError::NotDiscrete);
    }
    if ta.action_id(TICK).is_some() {
        return Err(RegionError::Reserved(TICK.into()));
    }
    let mut out = ta.clone();
    out.name = format!("{}_ticks", ta.name);
    let mut zname = "z".to_string();
    while out.clock_id(&zname).is_some() {
        zname.push('\'');
    }
    let z = out.add_clock(zname);
    let t = out.add_action(TICK);
    for e in out.edges.iter_mut() {
        e.guard.conjuncts.push(Constraint::new(z, Cmp::Eq, 0));
    }
    for inv in out.invariants.iter_mut() {
        inv.conjuncts.push(Constraint::new(z, Cmp::Le, 1));
    }
    for l in 0..out.locations.len() {
        out.add_edge(l, Some(t), Guard::of(vec![Constraint::new(z, Cmp::Eq, 1)]), vec![z], l);
    }
    Ok(out)
}

/// Reads the timed word off an untimed tick word (`t` advances time by one).
pub fn decode_ticks(word: &[String]) -> TimedWord {
    let mut now = 0i64;
    let mut out = Vec::new();
    for s in word {
        if s == TICK {
            now += 1;
        } else {
            out.push((s.clone(), qi(now)));
        }
    }
    TimedWord(out)
}

pub fn encode_ticks(w: &TimedWord) -> Vec<String> {
    let mut out = Vec::new();
    let mut now = 0i64;
    for (a, t) in &w.0 {
        let k = crate::ta::floor_i64(t);
        while now < k {
            out.push(TICK.to_string());
            now += 1;
        }
        out.push(a.clone());
    }
    out
}

/// Finite automaton with silent moves over a sorted alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    pub alphabet: Vec<String>,
    pub init: Vec<u32>,
    pub finals: Vec<bool>,
    pub trans: Vec<Vec<(Option<u32>, u32)>>,
}

impl Nfa {
    pub fn len(&self) -> usize {
        self.finals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.finals.is_empty()
    }

    pub fn from_ra(ra: &RegionAutomaton) -> Nfa {
        let mut alphabet: Vec<String> = ra.actions.clone();
        alphabet.sort();
        alphabet.dedup();
        let map: Vec<u32> = ra
            .actions
            .iter()
            .map(|a| alphabet.binary_search(a).unwrap() as u32)
            .collect();
        let trans = ra
            .edges
            .iter()
            .map(|es| es.iter().map(|e| (e.label.map(|a| map[a]), e.target as u32)).collect())
            .collect();
        Nfa {
            alphabet,
            init: ra.initial.map(|i| vec![i as u32]).unwrap_or_default(),
            finals: ra.finals.clone(),
            trans,
        }
    }

    pub fn symbol(&self, s: &str) -> Option<u32> {
        self.alphabet.binary_search_by(|a| a.as_str().cmp(s)).ok().map(|i| i as u32)
    }

    pub fn close(&self, set: &mut Vec<u32>) {
        let mut seen: BTreeSet<u32> = set.iter().copied().collect();
        let mut stack: Vec<u32> = set.clone();
        while let Some(s) = stack.pop() {
            for &(l, t) in &self.trans[s as usize] {
                if l.is_none() && seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        *set = seen.into_iter().collect();
    }

    pub fn post(&self, set: &[u32], sym: u32) -> Vec<u32> {
        let mut out: Vec<u32> = set
            .iter()
            .flat_map(|&s| self.trans[s as usize].iter())
            .filter(|(l, _)| *l == Some(sym))
            .map(|(_, t)| *t)
            .collect();
        out.sort_unstable();
        out.dedup();
        self.close(&mut out);
        out
    }

    pub fn initial_set(&self) -> Vec<u32> {
        let mut s = self.init.clone();
        s.sort_unstable();
        s.dedup();
        self.close(&mut s);
        s
    }

    pub fn accepts(&self, word: &[String]) -> bool {
        let mut cur = self.initial_set();
        for w in word {
            let Some(sym) = self.symbol(w) else { return false };
            cur = self.post(&cur, sym);
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|&s| self.finals[s as usize])
    }

    /// Drops `t` letters that follow the last letter outside `t` and the `f{..}` suffix letters.
    pub fn strip_trailing_ticks(&self) -> Nfa {
        let Some(t) = self.symbol(TICK) else { return self.clone() };
        let suffix: Vec<bool> = self.alphabet.iter().map(|a| a.starts_with("f{")).collect();
        let n = self.len();
        let id = |q: u32, m: u32| q * 4 + m;
        let mut trans = vec![Vec::new(); n * 4];
        let mut finals = vec![false; n * 4];
        for q in 0..n as u32 {
            // 0: last letter not a tick, 1: last letter a tick, 2: trailing ticks, 3: suffix
            trans[id(q, 0) as usize].push((None, id(q, 2)));
            for &(l, tg) in &self.trans[q as usize] {
                match l {
                    None => {
                        for m in 0..4 {
                            trans[id(q, m) as usize].push((None, id(tg, m)));
                        }
                    }
                    Some(s) if s == t => {
                        trans[id(q, 0) as usize].push((Some(t), id(tg, 1)));
                        trans[id(q, 1) as usize].push((Some(t), id(tg, 1)));
                        trans[id(q, 2) as usize].push((None, id(tg, 2)));
                    }
                    Some(s) if suffix[s as usize] => {
                        trans[id(q, 2) as usize].push((Some(s), id(tg, 3)));
                        trans[id(q, 3) as usize].push((Some(s), id(tg, 3)));
                    }
                    Some(s) => {
                        trans[id(q, 0) as usize].push((Some(s), id(tg, 0)));
                        trans[id(q, 1) as usize].push((Some(s), id(tg, 0)));
                    }
                }
            }
            if self.finals[q as usize] {
                finals[id(q, 2) as usize] = true;
                finals[id(q, 3) as usize] = true;
            }
        }
        Nfa {
            alphabet: self.alphabet.clone(),
            init: self.init.iter().map(|&q| id(q, 0)).collect(),
            finals,
            trans,
        }
    }

    fn remap(&self, alphabet: &[String]) -> Nfa {
        let map: Vec<u32> = self
            .alphabet
            .iter()
            .map(|a| alphabet.binary_search(a).unwrap() as u32)
            .collect();
        Nfa {
            alphabet: alphabet.to_vec(),
            init: self.init.clone(),
            finals: self.finals.clone(),
            trans: self
                .trans
                .iter()
                .map(|ts| ts.iter().map(|(l, t)| (l.map(|s| map[s as usize]), *t)).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inclusion {
    pub holds: bool,
    pub counterexample: Option<Vec<String>>,
}

pub fn regular_inclusion(ra1: &RegionAutomaton, ra2: &RegionAutomaton) -> Result<Inclusion, RegionError> {
    nfa_inclusion(&Nfa::from_ra(ra1), &Nfa::from_ra(ra2), region_cap_from_env())
}

/// L(a) ⊆ L(b) by joint subset exploration; the counterexample is shortest,
/// ties broken by alphabet order.
pub fn nfa_inclusion(a: &Nfa, b: &Nfa, cap: usize) -> Result<Inclusion, RegionError> {
    let mut alphabet: Vec<String> = a.alphabet.iter().chain(b.alphabet.iter()).cloned().collect();
    alphabet.sort();
    alphabet.dedup();
    let a = a.remap(&alphabet);
    let b = b.remap(&alphabet);
    let bad = |s1: &[u32], s2: &[u32]| {
        s1.iter().any(|&s| a.finals[s as usize]) && !s2.iter().any(|&s| b.finals[s as usize])
    };
    type Node = (Vec<u32>, Vec<u32>);
    let mut nodes: Vec<(Node, Option<(usize, u32)>)> = Vec::new();
    let mut index: HashMap<Node, usize> = HashMap::new();
    let start = (a.initial_set(), b.initial_set());
    let word_of = |nodes: &Vec<(Node, Option<(usize, u32)>)>, mut i: usize| {
        let mut w = Vec::new();
        while let Some((p, s)) = nodes[i].1 {
            w.push(alphabet[s as usize].clone());
            i = p;
        }
        w.reverse();
        w
    };
    if start.0.is_empty() {
        return Ok(Inclusion { holds: true, counterexample: None });
    }
    if bad(&start.0, &start.1) {
        return Ok(Inclusion { holds: false, counterexample: Some(Vec::new()) });
    }
    index.insert(start.clone(), 0);
    nodes.push((start, None));
    let mut head = 0;
    while head < nodes.len() {
        let (s1, s2) = nodes[head].0.clone();
        for sym in 0..alphabet.len() as u32 {
            let t1 = a.post(&s1, sym);
            if t1.is_empty() {
                continue;
            }
            let t2 = b.post(&s2, sym);
            let key = (t1, t2);
            if index.contains_key(&key) {
                continue;
            }
            if nodes.len() >= cap {
                return Err(RegionError::Cap(cap));
            }
            let is_bad = bad(&key.0, &key.1);
            index.insert(key.clone(), nodes.len());
            nodes.push((key, Some((head, sym))));
            if is_bad {
                let w = word_of(&nodes, nodes.len() - 1);
                return Ok(Inclusion { holds: false, counterexample: Some(w) });
            }
        }
        head += 1;
    }
    Ok(Inclusion { holds: true, counterexample: None })
}

/// DOT rendering of a region automaton.
pub fn ra_to_dot(ra: &RegionAutomaton) -> String {
    let mut out = String::from("digraph regions {\n  rankdir=LR;\n  node [shape=box];\n");
    for s in 0..ra.len() {
        let shape = if ra.finals[s] { ", peripheries=2" } else { "" };
        let _ = writeln!(out, "  r{s} [label=\"{}\"{shape}];", ra.render_state(s).replace('"', "\\\""));
    }
    if let Some(i) = ra.initial {
        let _ = writeln!(out, "  init [shape=point];\n  init -> r{i};");
    }
    for (s, es) in ra.edges.iter().enumerate() {
        for e in es {
            let label = match e.kind {
                EdgeKind::Delay => "δ".to_string(),
                EdgeKind::Discrete(_) => ra.label_name(e.label).to_string(),
            };
            let _ = writeln!(out, "  r{s} -> r{} [label=\"{label}\"];", e.target);
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{discrete_example, running_example};
    use crate::q::q;
    use crate::ta::{enumerate_runs, step, trace_of};

    fn val(xs: &[(i64, i64)]) -> Vec<Q> {
        xs.iter().map(|&(n, d)| q(n, d)).collect()
    }

    #[test]
    fn equivalence_examples() {
        let m = [3u32];
        assert!(valuation_equiv(&val(&[(12, 10)]), &val(&[(17, 10)]), &m));
        assert!(!valuation_equiv(&val(&[(1, 1)]), &val(&[(3, 2)]), &m));
        assert!(valuation_equiv(&val(&[(7, 2)]), &val(&[(9, 1)]), &m));
        let m2 = [3u32, 3];
        assert!(valuation_equiv(&val(&[(12, 10), (15, 10)]), &val(&[(11, 10), (19, 10)]), &m2));
        assert!(!valuation_equiv(&val(&[(12, 10), (15, 10)]), &val(&[(17, 10), (15, 10)]), &m2));
    }

    #[test]
    fn region_of_above_bound() {
        let mut ta = running_example();
        ta.invariants[0].conjuncts[0].bound = 2;
        let cfg = Configuration { location: 0, valuation: val(&[(23, 10)]) };
        let r = region_of(&cfg, &ta);
        assert_eq!(r.clock.render(&ta.clocks, &bounds_of(&ta)), "x>2");
    }

    #[test]
    fn successor_walk() {
        let m = [1u32, 1];
        let mut r = ClockRegion::zero(2);
        let mut seen = vec![r.clone()];
        for _ in 0..6 {
            r = r.time_successor(&m);
            seen.push(r.clone());
        }
        let names = ["x".to_string(), "y".to_string()];
        let shown: Vec<String> = seen.iter().map(|r| r.render(&names, &m)).collect();
        assert_eq!(shown[0], "x=0, y=0");
        assert_eq!(shown[1], "0<x<1, 0<y<1, frac: x=y");
        assert_eq!(shown[2], "x=1, y=1");
        assert_eq!(shown[3], "x>1, y>1");
        assert_eq!(shown[4], "x>1, y>1");
        let r = ClockRegion::of_valuation(&val(&[(1, 2), (0, 1)]), &m);
        let s = r.time_successor(&m);
        assert_eq!(s.render(&names, &m), "0<x<1, 0<y<1, frac: y < x");
    }

    #[test]
    fn successor_delay_lands_in_successor() {
        let m = [2u32, 1, 3];
        let v = val(&[(1, 3), (0, 1), (5, 2)]);
        let mut v = v;
        let mut r = ClockRegion::of_valuation(&v, &m);
        for _ in 0..12 {
            let d = r.successor_delay(&v, &m);
            v = crate::ta::delayed(&v, &d);
            let s = r.time_successor(&m);
            assert_eq!(ClockRegion::of_valuation(&v, &m), s);
            r = s;
        }
    }

    #[test]
    fn running_example_region_automaton() {
        let ta = running_example();
        let ra = build_region_automaton(&ta).unwrap();
        assert!(BigUint::from(ra.len()) <= region_bound(&ta));
        let path = ra.path_to_final().unwrap();
        let w = ra.concretize(&ta, &path);
        assert_eq!(w.len(), 1);
        for (s, es) in ra.edges.iter().enumerate() {
            if ra.finals[s] {
                assert!(es.is_empty());
            }
        }
    }

    #[test]
    fn no_edges_no_invariant() {
        let mut ta = TimedAutomaton::new("t", TimeDomain::Dense);
        ta.add_clock("x");
        ta.add_location("l", Guard::tt());
        let ra = build_region_automaton(&ta).unwrap();
        // x=0 then x>0 with M(x)=0, which loops on itself
        assert_eq!(ra.len(), 2);
        assert_eq!(ra.edges[1][0].target, 1);
    }

    #[test]
    fn cap_is_reported() {
        let ta = running_example();
        assert_eq!(build_region_automaton_capped(&ta, 3).unwrap_err(), RegionError::Cap(3));
    }

    #[test]
    fn discrete_example_regions() {
        let ta = augment_ticks(&discrete_example()).unwrap();
        let ra = build_region_automaton(&ta).unwrap();
        let shown: BTreeSet<String> = (0..ra.len()).map(|s| ra.render_state(s)).collect();
        assert!(shown.contains("l0: x=0, z=0"));
        assert!(shown.contains("lf: x>2, z=0"));
        assert_eq!(ra.len(), 8);
        assert!(BigUint::from(ra.len()) <= region_bound(&ta));
        let init = ra.initial.unwrap();
        assert_eq!(ra.render_state(init), "l0: x=0, z=0");
    }

    #[test]
    fn tick_encoding() {
        let w = TimedWord::parse("(a,4)").unwrap();
        assert_eq!(encode_ticks(&w).join(""), "tttta");
        assert_eq!(decode_ticks(&encode_ticks(&w)), w);
        assert!(encode_ticks(&TimedWord::parse("(a,0)").unwrap()) == vec!["a".to_string()]);
    }

    #[test]
    fn augmented_language_matches_discrete_traces() {
        let ta = discrete_example();
        let ra = build_region_automaton(&augment_ticks(&ta).unwrap()).unwrap();
        let nfa = Nfa::from_ra(&ra).strip_trailing_ticks();
        for k in 0..6 {
            let w = TimedWord::new(vec![("a".into(), qi(k))]);
            assert_eq!(nfa.accepts(&encode_ticks(&w)), k > 2, "{k}");
        }
        assert!(!nfa.accepts(&["t".into(), "t".into(), "t".into(), "a".into(), "t".into()]));
    }

    fn chain(word: &str) -> Nfa {
        let letters: Vec<String> = word.chars().map(|c| c.to_string()).collect();
        let mut alphabet = letters.clone();
        alphabet.sort();
        alphabet.dedup();
        let n = letters.len() + 1;
        let mut trans = vec![Vec::new(); n];
        for (i, l) in letters.iter().enumerate() {
            let s = alphabet.binary_search(l).unwrap() as u32;
            trans[i].push((Some(s), i as u32 + 1));
        }
        let mut finals = vec![false; n];
        finals[n - 1] = true;
        Nfa { alphabet, init: vec![0], finals, trans }
    }

    #[test]
    fn inclusion_examples() {
        let a = chain("tttta");
        let b = chain("ttta");
        let r = nfa_inclusion(&a, &b, 1000).unwrap();
        assert!(!r.holds);
        assert_eq!(r.counterexample.unwrap().concat(), "tttta");
        assert!(nfa_inclusion(&a, &a, 1000).unwrap().holds);
        let empty = Nfa { alphabet: vec![], init: vec![], finals: vec![], trans: vec![] };
        assert!(nfa_inclusion(&empty, &a, 1000).unwrap().holds);
    }

    // every concrete run has a region path with the same trace
    #[test]
    fn abstraction_is_sound() {
        let ta = running_example();
        let ra = build_region_automaton(&ta).unwrap();
        let m = bounds_of(&ta);
        let index: HashMap<&Region, usize> = ra.states.iter().enumerate().map(|(i, r)| (r, i)).collect();
        for run in enumerate_runs(&ta, &qi(3), 4, &q(1, 2)).unwrap() {
            let mut cfg = ta.initial_config();
            let mut s = ra.initial.unwrap();
            for (d, ei) in &run.steps {
                let target = Region {
                    location: cfg.location,
                    clock: ClockRegion::of_valuation(&crate::ta::delayed(&cfg.valuation, d), &m),
                };
                while ra.states[s] != target {
                    let e = ra.edges[s].iter().find(|e| e.kind == EdgeKind::Delay).expect("delay edge");
                    s = e.target;
                }
                let next = step(&ta, &cfg, d, &ta.edges[*ei]).unwrap();
                let want = index[&region_of(&next, &ta)];
                assert!(ra.edges[s].iter().any(|e| e.kind == EdgeKind::Discrete(*ei) && e.target == want));
                s = want;
                cfg = next;
            }
            assert!(ra.finals[s]);
            let _ = trace_of(&ta, &run);
        }
    }
}
