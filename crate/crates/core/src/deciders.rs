//! Opacity decision procedures and their subclass gating.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::constructions::{build_memo, build_priv, build_pub, product};
use crate::observers::{
    check_n, denominator_lcm, normalize_sequence, tick_construction, tick_leveled, unfold_first_n, unfold_free, unfold_tau,
    unfold_tau_leveled, unfold_tau_leveled_by, ObserverError, TimeSelection,
};
use crate::oracle::{oracle_check, OracleError, OracleParams, OracleVerdict};
use crate::q::{qi, Q};
use crate::regions::{
    augment_ticks, bounds_of, build_region_automaton, decode_ticks, nfa_inclusion, region_cap_from_env, ClockRegion,
    Nfa, RegionAutomaton, RegionError, TICK,
};
use crate::ta::{TimeDomain, TimedAutomaton, TimedWord};
use crate::words::{decode_ticked, WordError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Exists,
    Weak,
    Full,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "exists" => Some(Mode::Exists),
            "weak" => Some(Mode::Weak),
            "full" => Some(Mode::Full),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    Auto,
    Discrete,
    Oera,
    Oracle,
}

impl Engine {
    pub fn parse(s: &str) -> Option<Engine> {
        match s {
            "auto" => Some(Engine::Auto),
            "discrete" => Some(Engine::Discrete),
            "oera" => Some(Engine::Oera),
            "oracle" => Some(Engine::Oracle),
            _ => None,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Engine::Auto => "auto",
            Engine::Discrete => "discrete",
            Engine::Oera => "oera",
            Engine::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

/// Which inclusion failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// a private trace that no public run produces
    PrivNotPub,
    /// a public trace that no private run produces
    PubNotPriv,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::PrivNotPub => "private trace not produced publicly",
            Side::PubNotPriv => "public trace not produced privately",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpacityVerdict {
    pub holds: bool,
    pub witness: Option<TimedWord>,
    pub side: Option<Side>,
    pub engine: Engine,
    /// false when the answer comes from a bounded search that found nothing
    pub definitive: bool,
    pub notes: Vec<String>,
}

impl OpacityVerdict {
    fn new(holds: bool, witness: Option<TimedWord>, side: Option<Side>, engine: Engine) -> Self {
        OpacityVerdict { holds, witness, side, engine, definitive: true, notes: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("{0}")]
    Undecidable(String),
    #[error("the discrete engine needs a discrete-time automaton")]
    NotDiscrete,
    #[error("the oERA engine needs an observable event-recording automaton")]
    NotOera,
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Observer(#[from] ObserverError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("bad witness description: {0}")]
    BadDescription(String),
}

/// Each letter resets exactly its own clock, clocks and letters correspond one to one,
/// silent edges reset nothing.
pub fn is_oera(ta: &TimedAutomaton) -> bool {
    let mut clock_of: Vec<Option<usize>> = vec![None; ta.actions.len()];
    for e in &ta.edges {
        match e.action {
            None if !e.resets.is_empty() => return false,
            None => {}
            Some(a) => {
                let mut r = e.resets.clone();
                r.sort_unstable();
                r.dedup();
                if r.len() != 1 {
                    return false;
                }
                match clock_of[a] {
                    None => clock_of[a] = Some(r[0]),
                    Some(c) if c != r[0] => return false,
                    _ => {}
                }
            }
        }
    }
    let used: Vec<usize> = clock_of.iter().flatten().copied().collect();
    let distinct: BTreeSet<usize> = used.iter().copied().collect();
    distinct.len() == used.len() && distinct.len() == ta.clocks.len()
}

/// Why no exact engine applies to a dense-time automaton outside the oERA class.
pub fn refusal_reason(ta: &TimedAutomaton) -> String {
    match ta.clocks.len() {
        0 => "dense time without clocks is not an oERA; no exact engine applies (declare `time: discrete` \
              or use --engine oracle)"
            .into(),
        1 if ta.has_epsilon() => "weak and full opacity are undecidable for one-clock timed automata with \
                                  silent transitions"
            .into(),
        1 => "one-clock timed automaton without silent transitions: decidable in principle, no engine \
              implemented here; use --engine oracle for a bounded search"
            .into(),
        _ => "weak and full opacity are undecidable for timed automata with two or more clocks \
              (timed language inclusion reduces to them)"
            .into(),
    }
}

/// Some trace is produced both by a private and by a public run.
pub fn check_exists(ta: &TimedAutomaton) -> Result<OpacityVerdict, DecideError> {
    let p = product(&build_priv(ta), &build_pub(ta));
    let ra = build_region_automaton(&p)?;
    Ok(match ra.path_to_final() {
        Some(path) => OpacityVerdict::new(true, Some(ra.concretize(&p, &path)), None, Engine::Auto),
        None => OpacityVerdict::new(false, None, None, Engine::Auto),
    })
}

/// Weak or full opacity without an attacker model.
pub fn check_opacity(ta: &TimedAutomaton, mode: Mode, engine: Engine) -> Result<OpacityVerdict, DecideError> {
    check_opacity_with(ta, mode, engine, &OracleParams::default())
}

pub fn check_opacity_with(
    ta: &TimedAutomaton,
    mode: Mode,
    engine: Engine,
    params: &OracleParams,
) -> Result<OpacityVerdict, DecideError> {
    if mode == Mode::Exists {
        return match engine {
            Engine::Oracle => from_oracle(oracle_check(ta, mode, None, params)?, mode),
            _ => check_exists(ta),
        };
    }
    match engine {
        Engine::Discrete => discrete_engine(ta, mode),
        Engine::Oera => oera_engine(ta, mode),
        Engine::Oracle => from_oracle(oracle_check(ta, mode, None, params)?, mode),
        Engine::Auto => {
            if ta.time_domain == TimeDomain::Discrete {
                discrete_engine(ta, mode)
            } else if is_oera(ta) {
                oera_engine(ta, mode)
            } else {
                Err(DecideError::Undecidable(refusal_reason(ta)))
            }
        }
    }
}

pub(crate) fn from_oracle(v: OracleVerdict, mode: Mode) -> Result<OpacityVerdict, DecideError> {
    Ok(match v {
        OracleVerdict::Holds(w) => OpacityVerdict::new(true, w, None, Engine::Oracle),
        OracleVerdict::Violated(w, side) => {
            OpacityVerdict::new(false, w, if mode == Mode::Exists { None } else { side }, Engine::Oracle)
        }
        OracleVerdict::Inconclusive(why) => {
            let mut v = OpacityVerdict::new(mode != Mode::Exists, None, None, Engine::Oracle);
            v.definitive = false;
            v.notes.push(why);
            v
        }
    })
}

fn region_nfa(ta: &TimedAutomaton) -> Result<Nfa, DecideError> {
    Ok(Nfa::from_ra(&build_region_automaton(ta)?).strip_trailing_ticks())
}

/// Compares two trace languages given as stripped tick NFAs; `decode` turns a
/// counterexample back into a timed word.
fn compare(
    a: &Nfa,
    b: &Nfa,
    mode: Mode,
    engine: Engine,
    decode: &dyn Fn(&[String]) -> Result<TimedWord, DecideError>,
) -> Result<OpacityVerdict, DecideError> {
    let cap = region_cap_from_env();
    if mode == Mode::Exists {
        return Ok(match nfa_intersection(a, b, cap)? {
            Some(w) => OpacityVerdict::new(true, Some(decode(&w)?), None, engine),
            None => OpacityVerdict::new(false, None, None, engine),
        });
    }
    let inc = nfa_inclusion(a, b, cap)?;
    if let Some(w) = inc.counterexample {
        return Ok(OpacityVerdict::new(false, Some(decode(&w)?), Some(Side::PrivNotPub), engine));
    }
    if mode == Mode::Full {
        if let Some(w) = nfa_inclusion(b, a, cap)?.counterexample {
            return Ok(OpacityVerdict::new(false, Some(decode(&w)?), Some(Side::PubNotPriv), engine));
        }
    }
    Ok(OpacityVerdict::new(true, None, None, engine))
}

/// Shortest word accepted by both automata.
pub fn nfa_intersection(a: &Nfa, b: &Nfa, cap: usize) -> Result<Option<Vec<String>>, RegionError> {
    let alphabet: Vec<String> = a.alphabet.iter().filter(|s| b.symbol(s).is_some()).cloned().collect();
    let acc = |n: &Nfa, s: &[u32]| s.iter().any(|&q| n.finals[q as usize]);
    type Key = (Vec<u32>, Vec<u32>);
    let start: Key = (a.initial_set(), b.initial_set());
    let mut parent: HashMap<Key, Option<(Key, String)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start]);
    while let Some(k) = queue.pop_front() {
        if acc(a, &k.0) && acc(b, &k.1) {
            let mut w = Vec::new();
            let mut cur = k;
            while let Some(Some((p, s))) = parent.get(&cur) {
                w.push(s.clone());
                cur = p.clone();
            }
            w.reverse();
            return Ok(Some(w));
        }
        for s in &alphabet {
            let n1 = a.post(&k.0, a.symbol(s).unwrap());
            let n2 = b.post(&k.1, b.symbol(s).unwrap());
            if n1.is_empty() || n2.is_empty() {
                continue;
            }
            let key = (n1, n2);
            if parent.contains_key(&key) {
                continue;
            }
            if parent.len() >= cap {
                return Err(RegionError::Cap(cap));
            }
            parent.insert(key.clone(), Some((k.clone(), s.clone())));
            queue.push_back(key);
        }
    }
    Ok(None)
}

fn discrete_engine(ta: &TimedAutomaton, mode: Mode) -> Result<OpacityVerdict, DecideError> {
    if ta.time_domain != TimeDomain::Discrete {
        return Err(DecideError::NotDiscrete);
    }
    let a = region_nfa(&augment_ticks(&build_priv(ta))?)?;
    let b = region_nfa(&augment_ticks(&build_pub(ta))?)?;
    compare(&a, &b, mode, Engine::Discrete, &|w| Ok(decode_ticks(w)))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Macro {
    region: ClockRegion,
    locs: BTreeSet<usize>,
}

struct OeraSearch<'a> {
    memo: &'a TimedAutomaton,
    m: Vec<u32>,
    /// first index of the copy after a private visit
    split: usize,
    clock_of: Vec<usize>,
}

impl<'a> OeraSearch<'a> {
    fn close(&self, mut mc: Macro) -> Macro {
        let mut stack: Vec<usize> = mc.locs.iter().copied().collect();
        while let Some(l) = stack.pop() {
            if self.memo.is_final(l) {
                continue;
            }
            for (_, e) in self.memo.outgoing(l) {
                if e.action.is_none()
                    && mc.region.satisfies_all(&e.guard, &self.m)
                    && mc.region.satisfies_all(&self.memo.invariants[e.target], &self.m)
                    && mc.locs.insert(e.target)
                {
                    stack.push(e.target);
                }
            }
        }
        mc
    }

    fn successor(&self, mc: &Macro) -> Macro {
        let region = match self.memo.time_domain {
            TimeDomain::Dense => mc.region.time_successor(&self.m),
            TimeDomain::Discrete => mc.region.discrete_successor(&self.m),
        };
        let locs = mc
            .locs
            .iter()
            .copied()
            .filter(|&l| !self.memo.is_final(l) && region.satisfies_all(&self.memo.invariants[l], &self.m))
            .collect();
        self.close(Macro { region, locs })
    }

    fn chain(&self, start: Macro) -> Vec<Macro> {
        let mut out: Vec<Macro> = Vec::new();
        let mut cur = start;
        while !cur.locs.is_empty() && !out.contains(&cur) {
            let next = self.successor(&cur);
            out.push(cur);
            cur = next;
        }
        out
    }

    fn letter(&self, mc: &Macro, a: usize) -> Macro {
        let region = mc.region.reset(&[self.clock_of[a]]);
        let mut locs = BTreeSet::new();
        for &l in mc.locs.iter().filter(|&&l| !self.memo.is_final(l)) {
            for (_, e) in self.memo.outgoing(l) {
                if e.action == Some(a)
                    && mc.region.satisfies_all(&e.guard, &self.m)
                    && region.satisfies_all(&self.memo.invariants[e.target], &self.m)
                {
                    locs.insert(e.target);
                }
            }
        }
        self.close(Macro { region, locs })
    }

    /// (some private final, some public final) along a delay chain
    fn finals(&self, chain: &[Macro]) -> (bool, bool) {
        let mut p = (false, false);
        for l in chain.iter().flat_map(|mc| mc.locs.iter()).filter(|&&l| self.memo.is_final(l)) {
            if *l >= self.split {
                p.0 = true;
            } else {
                p.1 = true;
            }
        }
        p
    }
}

/// Determinized search on the memory automaton of an oERA: all runs sharing a
/// trace share their clock values, so a macro-state is one region and a location set.
fn oera_engine(ta: &TimedAutomaton, mode: Mode) -> Result<OpacityVerdict, DecideError> {
    if !is_oera(ta) {
        return Err(DecideError::NotOera);
    }
    let memo = build_memo(ta);
    let mut clock_of = vec![0; ta.actions.len()];
    for e in &ta.edges {
        if let Some(a) = e.action {
            clock_of[a] = e.resets[0];
        }
    }
    let search = OeraSearch { memo: &memo, m: bounds_of(&memo), split: ta.locations.len(), clock_of };
    let cap = region_cap_from_env();
    let z = ClockRegion::zero(memo.clocks.len());
    let mut start = Macro { region: z, locs: BTreeSet::new() };
    if start.region.satisfies_all(&memo.invariants[memo.init], &search.m) {
        start.locs.insert(memo.init);
    }
    let start = search.close(start);
    // node: macro-state after a letter, its parent, the delay steps taken and the letter
    let mut nodes: Vec<MacroNode> = vec![(start.clone(), None)];
    let mut seen: HashMap<Macro, usize> = HashMap::from([(start, 0)]);
    let mut head = 0;
    while head < nodes.len() {
        let chain = search.chain(nodes[head].0.clone());
        let (pf, uf) = search.finals(&chain);
        let side = match mode {
            Mode::Weak | Mode::Full if pf && !uf => Some(Side::PrivNotPub),
            Mode::Full if uf && !pf => Some(Side::PubNotPriv),
            _ => None,
        };
        if let Some(side) = side {
            let w = replay(ta, &memo, &search.m, &nodes, head);
            return Ok(OpacityVerdict::new(false, Some(w), Some(side), Engine::Oera));
        }
        for (steps, mc) in chain.iter().enumerate() {
            for a in 0..ta.actions.len() {
                let next = search.letter(mc, a);
                if next.locs.is_empty() || seen.contains_key(&next) {
                    continue;
                }
                if nodes.len() >= cap {
                    return Err(RegionError::Cap(cap).into());
                }
                seen.insert(next.clone(), nodes.len());
                nodes.push((next, Some((head, steps, a))));
            }
        }
        head += 1;
    }
    Ok(OpacityVerdict::new(true, None, None, Engine::Oera))
}

/// Concrete trace reaching node `id`: every delay step moves into the next region.
/// Macro-state with its parent, delay steps and letter.
type MacroNode = (Macro, Option<(usize, usize, usize)>);

fn replay(
    ta: &TimedAutomaton,
    memo: &TimedAutomaton,
    m: &[u32],
    nodes: &[MacroNode],
    id: usize,
) -> TimedWord {
    let mut steps = Vec::new();
    let mut cur = id;
    while let Some((p, d, a)) = nodes[cur].1 {
        steps.push((d, a));
        cur = p;
    }
    steps.reverse();
    let mut v = vec![Q::zero(); memo.clocks.len()];
    let mut now = Q::zero();
    let mut out = Vec::new();
    let mut region = ClockRegion::zero(memo.clocks.len());
    for (d, a) in steps {
        for _ in 0..d {
            let delta = match memo.time_domain {
                TimeDomain::Dense => region.successor_delay(&v, m),
                TimeDomain::Discrete => qi(1),
            };
            v.iter_mut().for_each(|x| *x += &delta);
            now += delta;
            region = ClockRegion::of_valuation(&v, m);
        }
        out.push((ta.actions[a].clone(), now.clone()));
        let x = ta.edges.iter().find(|e| e.action == Some(a)).unwrap().resets[0];
        v[x] = Q::zero();
        region = ClockRegion::of_valuation(&v, m);
    }
    TimedWord(out)
}

/// Automaton whose trace language is the observed language of `x` under `sel`,
/// together with the time scale of its dates.
fn observed(x: &TimedAutomaton, sel: &TimeSelection) -> Result<(TimedAutomaton, i64), DecideError> {
    let dense = x.time_domain == TimeDomain::Dense;
    Ok(match (sel, dense) {
        (TimeSelection::FirstN(n), false) => {
            check_n(*n)?;
            (augment_ticks(&unfold_first_n(x, *n))?, 1)
        }
        (TimeSelection::Static(tau), false) => {
            check_n(tau.len())?;
            (augment_ticks(&unfold_tau(x, tau)?)?, 1)
        }
        (TimeSelection::Dynamic(n), false) => {
            check_n(2 * n)?;
            (augment_ticks(&unfold_first_n(&unfold_free(x, *n)?, 2 * n))?, 1)
        }
        (TimeSelection::FirstN(n), true) => (tick_construction(x, *n)?, 1),
        (TimeSelection::Static(tau), true) => {
            let (u, level, k) = unfold_tau_leveled(x, &normalize_sequence(tau))?;
            (tick_leveled(&u, &level, tau.len())?, k)
        }
        (TimeSelection::Dynamic(n), true) => (tick_construction(&unfold_free(x, *n)?, 2 * n)?, 1),
    })
}

/// Opacity against a bounded attacker, through untimed inclusion of ticked languages.
pub fn check_bounded(ta: &TimedAutomaton, sel: &TimeSelection, mode: Mode) -> Result<OpacityVerdict, DecideError> {
    let (a, k) = observed(&build_priv(ta), sel)?;
    let (b, _) = observed(&build_pub(ta), sel)?;
    let dense = ta.time_domain == TimeDomain::Dense;
    let scale = qi(1) / qi(k);
    let decode = move |w: &[String]| -> Result<TimedWord, DecideError> {
        let raw = if dense { decode_ticked(w)? } else { decode_ticks(w) };
        Ok(raw.scale(&scale))
    };
    let engine = if dense { Engine::Auto } else { Engine::Discrete };
    compare(&region_nfa(&a)?, &region_nfa(&b)?, mode, engine, &decode)
}

/// Static selection without normalizing τ first: constants are scaled by the
/// least common denominator of τ instead of N_f+1.
pub fn check_bounded_unnormalized(ta: &TimedAutomaton, tau: &[Q], mode: Mode) -> Result<OpacityVerdict, DecideError> {
    if ta.time_domain == TimeDomain::Discrete {
        return check_bounded(ta, &TimeSelection::Static(tau.to_vec()), mode);
    }
    check_n(tau.len())?;
    let k = denominator_lcm(tau);
    let obs = |x: &TimedAutomaton| -> Result<TimedAutomaton, DecideError> {
        let (u, level, _) = unfold_tau_leveled_by(x, tau, Some(k))?;
        Ok(tick_leveled(&u, &level, tau.len())?)
    };
    let a = obs(&build_priv(ta))?;
    let b = obs(&build_pub(ta))?;
    let scale = qi(1) / qi(k);
    let decode = move |w: &[String]| -> Result<TimedWord, DecideError> { Ok(decode_ticked(w)?.scale(&scale)) };
    compare(&region_nfa(&a)?, &region_nfa(&b)?, mode, Engine::Auto, &decode)
}

/// One token of a witness description: a letter repeated `count` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescToken {
    pub letter: String,
    pub count: u64,
}

/// Parses `t^5 a t^0b101 f{0} f{1}`; exponents are decimal or `0b` binary.
pub fn parse_description(desc: &str) -> Result<Vec<DescToken>, DecideError> {
    desc.split_whitespace()
        .map(|tok| {
            let (letter, count) = match tok.split_once('^') {
                None => (tok, 1),
                Some((l, e)) => {
                    let c = match e.strip_prefix("0b") {
                        Some(bits) => u64::from_str_radix(bits, 2),
                        None => e.parse(),
                    }
                    .map_err(|_| DecideError::BadDescription(format!("bad exponent in `{tok}`")))?;
                    (l, c)
                }
            };
            if letter.is_empty() {
                return Err(DecideError::BadDescription(format!("empty letter in `{tok}`")));
            }
            Ok(DescToken { letter: letter.to_string(), count })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct BitMatrix {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    fn zero(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitMatrix { n, words, rows: vec![0; n * words] }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.set(i, i);
        }
        m
    }

    fn set(&mut self, i: usize, j: usize) {
        self.rows[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn mul(&self, o: &BitMatrix) -> BitMatrix {
        let mut r = Self::zero(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                if self.get(i, k) {
                    for w in 0..self.words {
                        r.rows[i * self.words + w] |= o.rows[k * self.words + w];
                    }
                }
            }
        }
        r
    }

    fn pow(&self, mut e: u64) -> BitMatrix {
        let mut base = self.clone();
        let mut acc = Self::identity(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

fn letter_matrices(ra: &RegionAutomaton) -> (BitMatrix, HashMap<String, BitMatrix>) {
    let n = ra.len();
    let mut eps = BitMatrix::identity(n);
    let mut raw: HashMap<String, BitMatrix> = HashMap::new();
    for (s, es) in ra.edges.iter().enumerate() {
        for e in es {
            match e.label {
                None => eps.set(s, e.target),
                Some(a) => raw.entry(ra.actions[a].clone()).or_insert_with(|| BitMatrix::zero(n)).set(s, e.target),
            }
        }
    }
    // reflexive-transitive closure by squaring
    let mut star = eps;
    loop {
        let next = star.mul(&star);
        if next == star {
            break;
        }
        star = next;
    }
    let closed = raw.into_iter().map(|(a, m)| (a, star.mul(&m).mul(&star))).collect();
    (star, closed)
}

fn accepts_desc(ra: &RegionAutomaton, desc: &[DescToken]) -> bool {
    let Some(init) = ra.initial else { return false };
    let (star, mats) = letter_matrices(ra);
    // only row `init` is ever nonzero
    let mut m = BitMatrix::zero(ra.len());
    m.set(init, init);
    let mut acc = m.mul(&star);
    for tok in desc {
        match mats.get(&tok.letter) {
            Some(mat) => acc = acc.mul(&mat.pow(tok.count)),
            None if tok.count == 0 => {}
            None => return false,
        }
    }
    (0..ra.len()).any(|j| acc.get(init, j) && ra.finals[j])
}

/// Acceptance of a compact witness description by each region automaton, with
/// repeated letters evaluated by squaring of closed adjacency matrices.
pub fn verify_witness(ra1: &RegionAutomaton, ra2: &RegionAutomaton, desc: &str) -> Result<(bool, bool), DecideError> {
    let toks = parse_description(desc)?;
    for t in &toks {
        if !ra1.actions.contains(&t.letter) && !ra2.actions.contains(&t.letter) {
            return Err(DecideError::BadDescription(format!("letter `{}` is in neither alphabet", t.letter)));
        }
    }
    Ok((accepts_desc(ra1, &toks), accepts_desc(ra2, &toks)))
}

/// Step-by-step simulation of an expanded description.
pub fn simulate_desc(ra: &RegionAutomaton, desc: &str) -> Result<bool, DecideError> {
    let toks = parse_description(desc)?;
    let word: Vec<String> = toks
        .iter()
        .flat_map(|t| std::iter::repeat_n(t.letter.clone(), t.count as usize))
        .collect();
    Ok(Nfa::from_ra(ra).accepts(&word))
}

/// True when `ta` uses the tick letter or suffix letters itself.
pub fn uses_reserved_letters(ta: &TimedAutomaton) -> bool {
    ta.actions.iter().any(|a| a == TICK || a.starts_with("f{"))
}
