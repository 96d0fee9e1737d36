//! Brute-force ground truth over a time grid.
//!
//! Explores sets of concrete configurations sharing an observed trace, with letters
//! at grid dates only. Discrete automata with the unit grid are explored exactly.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::deciders::{Mode, Side};
use crate::observers::{unfold_free, ObserverError, TimeSelection};
use crate::q::{fmt_q, qi, Q};
use crate::ta::{TimeDomain, TimedAutomaton, TimedWord};

pub const DEFAULT_NODE_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("granularity must be 1/k for a positive integer k, got {0}")]
    BadGranularity(String),
    #[error("discrete-time automata need granularity 1")]
    DiscreteGranularity,
    #[error(transparent)]
    Observer(#[from] ObserverError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Holds(Option<TimedWord>),
    Violated(Option<TimedWord>, Option<Side>),
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct OracleParams {
    pub granularity: Option<Q>,
    /// Letters later than this are not explored; a pruned search never claims a property holds.
    pub horizon: Option<Q>,
    pub node_cap: usize,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams { granularity: None, horizon: None, node_cap: DEFAULT_NODE_CAP }
    }
}

pub fn default_granularity(ta: &TimedAutomaton, sel: Option<&TimeSelection>) -> Q {
    match ta.time_domain {
        TimeDomain::Discrete => qi(1),
        TimeDomain::Dense => {
            let n = sel.map(|s| s.n()).unwrap_or(0);
            Q::new(1.into(), ((ta.clocks.len() + n + 2) as i64).into())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Cfg {
    loc: usize,
    val: Vec<u32>,
    private: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Obs {
    All,
    Count(usize),
    Ind(Option<usize>),
}

struct Explorer<'a> {
    ta: &'a TimedAutomaton,
    /// grid steps per time unit
    k: u32,
    caps: Vec<u32>,
    first_n: Option<usize>,
    /// static switch-on dates in grid steps
    tau: Option<Vec<u64>>,
}

type Set = BTreeSet<Cfg>;

impl<'a> Explorer<'a> {
    fn new(ta: &'a TimedAutomaton, k: u32, sel: Option<&TimeSelection>) -> Self {
        let caps = ta.max_constants().iter().map(|&m| (m.max(0) as u32 + 1) * k).collect();
        let (first_n, tau) = match sel {
            Some(TimeSelection::FirstN(n)) => (Some(*n), None),
            Some(TimeSelection::Static(t)) => {
                // t ≥ τ on the grid iff steps ≥ ⌈τ·k⌉
                let steps = t
                    .iter()
                    .map(|x| {
                        let s = (x * qi(k as i64)).ceil().to_integer();
                        u64::try_from(s).unwrap_or(u64::MAX)
                    })
                    .collect();
                (None, Some(steps))
            }
            _ => (None, None),
        };
        Explorer { ta, k, caps, first_n, tau }
    }

    fn obs0(&self) -> Obs {
        match (&self.first_n, &self.tau) {
            (Some(_), _) => Obs::Count(0),
            (_, Some(t)) => Obs::Ind(if t.is_empty() { None } else { Some(0) }),
            _ => Obs::All,
        }
    }

    fn visible(&self, obs: &Obs, now: u64) -> bool {
        match obs {
            Obs::All => true,
            Obs::Count(c) => *c < self.first_n.unwrap(),
            Obs::Ind(None) => false,
            Obs::Ind(Some(i)) => now >= self.tau.as_ref().unwrap()[*i],
        }
    }

    fn observe(&self, obs: &Obs, now: u64) -> Obs {
        match obs {
            Obs::All => Obs::All,
            Obs::Count(c) => Obs::Count(c + 1),
            Obs::Ind(Some(i)) => {
                let t = self.tau.as_ref().unwrap();
                Obs::Ind((i + 1..t.len()).find(|&j| t[j] >= now))
            }
            Obs::Ind(None) => Obs::Ind(None),
        }
    }

    /// Time component of a node key; only static selections depend on it.
    fn time_key(&self, now: u64) -> Option<u64> {
        self.tau.as_ref().map(|t| now.min(t.iter().copied().max().unwrap_or(0) + 1))
    }

    fn holds(&self, g: &crate::ta::Guard, val: &[u32]) -> bool {
        g.conjuncts
            .iter()
            .all(|c| c.cmp.eval(&(val[c.clock] as i64), &(c.bound * self.k as i64)))
    }

    fn init(&self) -> Set {
        let ta = self.ta;
        let val = vec![0; ta.clocks.len()];
        let mut s = Set::new();
        if self.holds(&ta.invariants[ta.init], &val) {
            s.insert(Cfg { loc: ta.init, val, private: ta.is_private(ta.init) });
        }
        s
    }

    fn fire(&self, c: &Cfg, e: &crate::ta::Edge) -> Option<Cfg> {
        if !self.holds(&e.guard, &c.val) {
            return None;
        }
        let mut val = c.val.clone();
        for &r in &e.resets {
            val[r] = 0;
        }
        if !self.holds(&self.ta.invariants[e.target], &val) {
            return None;
        }
        Some(Cfg { loc: e.target, val, private: c.private || self.ta.is_private(e.target) })
    }

    /// Silent moves: ε-edges and letters the attacker does not see now.
    fn close(&self, mut s: Set, obs: &Obs, now: u64) -> Set {
        let silent_letters = !self.visible(obs, now);
        let mut stack: Vec<Cfg> = s.iter().cloned().collect();
        while let Some(c) = stack.pop() {
            if self.ta.is_final(c.loc) {
                continue;
            }
            for (_, e) in self.ta.outgoing(c.loc) {
                if e.action.is_some() && !silent_letters {
                    continue;
                }
                if let Some(n) = self.fire(&c, e) {
                    if s.insert(n.clone()) {
                        stack.push(n);
                    }
                }
            }
        }
        s
    }

    fn letter(&self, s: &Set, a: usize) -> Set {
        let mut out = Set::new();
        for c in s.iter().filter(|c| !self.ta.is_final(c.loc)) {
            for (_, e) in self.ta.outgoing(c.loc) {
                if e.action == Some(a) {
                    if let Some(n) = self.fire(c, e) {
                        out.insert(n);
                    }
                }
            }
        }
        out
    }

    fn delay(&self, s: &Set) -> Set {
        let mut out = Set::new();
        for c in s.iter().filter(|c| !self.ta.is_final(c.loc)) {
            let val: Vec<u32> = c
                .val
                .iter()
                .zip(&self.caps)
                .map(|(&v, &cap)| (v + 1).min(cap))
                .collect();
            if self.holds(&self.ta.invariants[c.loc], &val) {
                out.insert(Cfg { loc: c.loc, val, private: c.private });
            }
        }
        out
    }

    fn finals(&self, s: &Set) -> (bool, bool) {
        let mut p = (false, false);
        for c in s.iter().filter(|c| self.ta.is_final(c.loc)) {
            if c.private {
                p.0 = true;
            } else {
                p.1 = true;
            }
        }
        p
    }

    /// Delay chain from a node: each step closes, records finals, then waits one grid step.
    fn chain(&self, s: Set, obs: &Obs, now: u64) -> Vec<(Set, u64)> {
        let mut out = Vec::new();
        let mut seen: HashSet<(Set, Option<u64>)> = HashSet::new();
        let mut cur = s;
        let mut t = now;
        loop {
            if cur.is_empty() || !seen.insert((cur.clone(), self.time_key(t))) {
                break;
            }
            let next = self.delay(&cur);
            out.push((cur, t));
            t += 1;
            cur = self.close(next, obs, t);
        }
        out
    }

    /// Some run on the requested side produces exactly `w` as observed trace.
    fn accepts(&self, w: &[(usize, u64)], want_private: bool) -> bool {
        let mut obs = self.obs0();
        let mut t = 0u64;
        let mut s = self.close(self.init(), &obs, 0);
        for &(a, at) in w {
            while t < at {
                s = self.close(self.delay(&s), &obs, t + 1);
                t += 1;
                if s.is_empty() {
                    return false;
                }
            }
            if !self.visible(&obs, t) {
                return false;
            }
            let nobs = self.observe(&obs, t);
            s = self.close(self.letter(&s, a), &nobs, t);
            obs = nobs;
        }
        self.chain(s, &obs, t)
            .iter()
            .any(|(s, _)| s.iter().any(|c| self.ta.is_final(c.loc) && c.private == want_private))
    }
}

struct Node {
    word: Vec<(usize, u64)>,
    set: Set,
    obs: Obs,
    now: u64,
}

fn grid_k(g: &Q) -> Result<u32, OracleError> {
    let inv = Q::one() / g;
    if g <= &Q::zero() || !inv.is_integer() {
        return Err(OracleError::BadGranularity(fmt_q(g)));
    }
    u32::try_from(inv.to_integer()).map_err(|_| OracleError::BadGranularity(fmt_q(g)))
}

/// Grid word, side, and whether it is a shared trace for the exists query.
type Candidate = (Vec<(usize, u64)>, Side, bool);

/// Evaluates the query on the grid. Discrete automata are explored exhaustively,
/// so their verdicts are definitive; dense "holds" answers are inconclusive.
pub fn oracle_check(
    ta: &TimedAutomaton,
    mode: Mode,
    sel: Option<&TimeSelection>,
    params: &OracleParams,
) -> Result<OracleVerdict, OracleError> {
    if let Some(TimeSelection::Dynamic(n)) = sel {
        let free = unfold_free(ta, *n)?;
        return oracle_check(&free, mode, Some(&TimeSelection::FirstN(2 * n)), params);
    }
    let g = params.granularity.clone().unwrap_or_else(|| default_granularity(ta, sel));
    let k = grid_k(&g)?;
    if ta.time_domain == TimeDomain::Discrete && k != 1 {
        return Err(OracleError::DiscreteGranularity);
    }
    let dense = ta.time_domain == TimeDomain::Dense;
    let ex = Explorer::new(ta, k, sel);
    let fine = Explorer::new(ta, k * (ta.clocks.len() as u32 + 2), sel);
    let refine = ta.clocks.len() as u64 + 2;
    let horizon_steps: Option<u64> = params
        .horizon
        .as_ref()
        .map(|h| u64::try_from((h * qi(k as i64)).floor().to_integer()).unwrap_or(0));
    let to_word = |w: &[(usize, u64)]| -> TimedWord {
        TimedWord(w.iter().map(|&(a, t)| (ta.actions[a].clone(), Q::new(t.into(), k.into()))).collect())
    };

    let mut nodes: Vec<Node> = Vec::new();
    let mut index: HashMap<(Set, Obs, Option<u64>), usize> = HashMap::new();
    let obs0 = ex.obs0();
    let start = ex.close(ex.init(), &obs0, 0);
    index.insert((start.clone(), obs0.clone(), ex.time_key(0)), 0);
    nodes.push(Node { word: vec![], set: start, obs: obs0, now: 0 });
    let mut queue = VecDeque::from([0usize]);
    let mut pruned = false;
    let mut rejected = 0usize;

    while !queue.is_empty() {
        let layer: Vec<usize> = queue.drain(..).collect();
        let mut candidates: Vec<Candidate> = Vec::new();
        for id in layer {
            let chain = ex.chain(nodes[id].set.clone(), &nodes[id].obs, nodes[id].now);
            let (mut pf, mut uf) = (false, false);
            for (s, _) in &chain {
                let (p, u) = ex.finals(s);
                pf |= p;
                uf |= u;
            }
            let w = nodes[id].word.clone();
            match mode {
                Mode::Exists if pf && uf => candidates.push((w, Side::PrivNotPub, true)),
                Mode::Weak | Mode::Full if pf && !uf => candidates.push((w, Side::PrivNotPub, false)),
                Mode::Full if uf && !pf => candidates.push((w, Side::PubNotPriv, false)),
                _ => {}
            }
            // later dates first, so ties between equal-length words favour late witnesses
            for (s, t) in chain.iter().rev() {
                if !ex.visible(&nodes[id].obs, *t) {
                    continue;
                }
                if horizon_steps.is_some_and(|h| *t > h) {
                    pruned = true;
                    continue;
                }
                let nobs = ex.observe(&nodes[id].obs, *t);
                for a in 0..ta.actions.len() {
                    let next = ex.letter(s, a);
                    if next.is_empty() {
                        continue;
                    }
                    let next = ex.close(next, &nobs, *t);
                    let key = (next.clone(), nobs.clone(), ex.time_key(*t));
                    if index.contains_key(&key) {
                        continue;
                    }
                    if nodes.len() >= params.node_cap {
                        return Ok(OracleVerdict::Inconclusive(format!(
                            "node cap {} reached at granularity {}",
                            params.node_cap,
                            fmt_q(&g)
                        )));
                    }
                    index.insert(key, nodes.len());
                    let mut word = nodes[id].word.clone();
                    word.push((a, *t));
                    queue.push_back(nodes.len());
                    nodes.push(Node { word, set: next, obs: nobs.clone(), now: *t });
                }
            }
        }
        // open-interval dates first (dense only), then later dates
        candidates.sort_by_key(|(w, side, _)| {
            let integral = if dense { w.iter().filter(|(_, t)| t % k as u64 == 0).count() } else { 0 };
            (integral, Reverse(w.iter().map(|(_, t)| *t).collect::<Vec<_>>()), w.clone(), *side)
        });
        for (w, side, exists) in candidates {
            if exists {
                return Ok(OracleVerdict::Holds(Some(to_word(&w))));
            }
            if dense {
                let fw: Vec<(usize, u64)> = w.iter().map(|&(a, t)| (a, t * refine)).collect();
                let other_private = side == Side::PubNotPriv;
                if fine.accepts(&fw, other_private) {
                    rejected += 1;
                    continue;
                }
            }
            return Ok(OracleVerdict::Violated(Some(to_word(&w)), Some(side)));
        }
    }
    let why = |what: &str| {
        let mut s = format!("no {what} at granularity {}", fmt_q(&g));
        if pruned {
            s.push_str(", letters beyond the horizon were skipped");
        }
        if rejected > 0 {
            s.push_str(&format!(", {rejected} grid candidates refuted at a finer grid"));
        }
        s
    };
    Ok(match mode {
        Mode::Exists if dense || pruned => OracleVerdict::Inconclusive(why("shared trace")),
        Mode::Exists => OracleVerdict::Violated(None, None),
        _ if dense || pruned => OracleVerdict::Inconclusive(why("violation")),
        _ => OracleVerdict::Holds(None),
    })
}
