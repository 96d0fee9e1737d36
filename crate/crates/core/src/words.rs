//! Equivalence of timed words, distortions, ticked words and class recognizers.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::constructions::product;
use crate::q::{ceil, floor, frac, qi, to_i64, Q};
use crate::regions::{build_region_automaton, RegionError, TICK};
use crate::ta::{Cmp, Constraint, Guard, TimeDomain, TimedAutomaton, TimedWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("word has {len} letters but only {n} observations are allowed")]
    TooLong { len: usize, n: usize },
    #[error("bad breakpoint sequences: {0}")]
    BadBreakpoints(String),
    #[error("timestamp fraction {0} is not a breakpoint")]
    NotABreakpoint(String),
    #[error("malformed ticked word: {0}")]
    Malformed(String),
}

/// Integral parts equal, zero fractions coincide, fraction order coincides.
pub fn times_equiv(a: &[Q], b: &[Q]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let fa: Vec<Q> = a.iter().map(frac).collect();
    let fb: Vec<Q> = b.iter().map(frac).collect();
    for i in 0..a.len() {
        if floor(&a[i]) != floor(&b[i]) || fa[i].is_zero() != fb[i].is_zero() {
            return false;
        }
        for j in 0..i {
            if fa[i].cmp(&fa[j]) != fb[i].cmp(&fb[j]) {
                return false;
            }
        }
    }
    true
}

pub fn word_equiv(w: &TimedWord, v: &TimedWord) -> bool {
    w.untimed() == v.untimed() && times_equiv(&w.times(), &v.times())
}

fn check_breakpoints(f: &[Q]) -> Result<(), WordError> {
    if f.len() < 2 || !f[0].is_zero() || !f[f.len() - 1].is_one() {
        return Err(WordError::BadBreakpoints("must start at 0 and end at 1".into()));
    }
    if f.windows(2).any(|p| p[0] >= p[1]) {
        return Err(WordError::BadBreakpoints("must be strictly increasing".into()));
    }
    Ok(())
}

/// Maps each timestamp through ⌊t⌋ + γ(frac t), γ piecewise linear sending f onto f′.
pub fn distort(w: &TimedWord, f: &[Q], f2: &[Q]) -> Result<TimedWord, WordError> {
    check_breakpoints(f)?;
    check_breakpoints(f2)?;
    if f.len() != f2.len() {
        return Err(WordError::BadBreakpoints("lengths differ".into()));
    }
    let gamma = |x: &Q| -> Q {
        let k = f.iter().rposition(|b| b <= x).unwrap();
        if &f[k] == x {
            return f2[k].clone();
        }
        &f2[k] + (x - &f[k]) * (&f2[k + 1] - &f2[k]) / (&f[k + 1] - &f[k])
    };
    let mut out = Vec::with_capacity(w.len());
    for (a, t) in &w.0 {
        let fr = frac(t);
        if !f.contains(&fr) {
            return Err(WordError::NotABreakpoint(crate::q::fmt_q(&fr)));
        }
        out.push((a.clone(), floor(t) + gamma(&fr)));
    }
    Ok(TimedWord(out))
}

pub fn f_letter(k: &BTreeSet<usize>) -> String {
    let items: Vec<String> = k.iter().map(|i| i.to_string()).collect();
    format!("f{{{}}}", items.join(","))
}

pub fn parse_f_letter(s: &str) -> Option<BTreeSet<usize>> {
    let body = s.strip_prefix("f{")?.strip_suffix('}')?;
    let set: Option<BTreeSet<usize>> = body.split(',').map(|p| p.trim().parse().ok()).collect();
    set.filter(|k| !k.is_empty())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TickedWord {
    pub tokens: Vec<String>,
    pub n: usize,
}

impl fmt::Display for TickedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tokens.join(" "))
    }
}

/// Ticked word of `w` with `n` observation slots; unused slots join the index-0 group.
pub fn ticked_word(w: &TimedWord, n: usize) -> Result<TickedWord, WordError> {
    if w.len() > n {
        return Err(WordError::TooLong { len: w.len(), n });
    }
    let mut tokens = Vec::new();
    let mut ticks = 0i64;
    for (a, t) in &w.0 {
        let k = crate::ta::floor_i64(t);
        while ticks < k {
            tokens.push(TICK.to_string());
            ticks += 1;
        }
        tokens.push(a.clone());
    }
    let fr: Vec<Q> = w.0.iter().map(|(_, t)| frac(t)).collect();
    let mut first: BTreeSet<usize> = BTreeSet::from([0]);
    first.extend((1..=w.len()).filter(|&i| fr[i - 1].is_zero()));
    first.extend(w.len() + 1..=n);
    tokens.push(f_letter(&first));
    let mut levels: Vec<&Q> = fr.iter().filter(|f| !f.is_zero()).collect();
    levels.sort();
    levels.dedup();
    for lv in levels {
        let k: BTreeSet<usize> = (1..=w.len()).filter(|&i| &fr[i - 1] == lv).collect();
        tokens.push(f_letter(&k));
    }
    Ok(TickedWord { tokens, n })
}

/// A representative timed word of a ticked word's class: the i-th of m fraction
/// blocks gets fraction i/(m+2). Trailing ticks before the suffix are ignored.
pub fn decode_ticked(tokens: &[String]) -> Result<TimedWord, WordError> {
    let split = tokens.iter().position(|t| t.starts_with("f{")).unwrap_or(tokens.len());
    let (body, suffix) = tokens.split_at(split);
    let mut letters = Vec::new();
    let mut ticks = 0i64;
    for t in body {
        if t == TICK {
            ticks += 1;
        } else {
            letters.push((t.clone(), ticks));
        }
    }
    let mut block_of = vec![None; letters.len()];
    let blocks: Vec<BTreeSet<usize>> = suffix
        .iter()
        .map(|s| parse_f_letter(s).ok_or_else(|| WordError::Malformed(format!("bad suffix letter `{s}`"))))
        .collect::<Result<_, _>>()?;
    if suffix.is_empty() {
        if letters.is_empty() {
            return Ok(TimedWord::empty());
        }
        return Err(WordError::Malformed("missing fraction suffix".into()));
    }
    if !blocks[0].contains(&0) {
        return Err(WordError::Malformed("first block must contain 0".into()));
    }
    let m = blocks.len() as i64 - 1;
    for (rank, k) in blocks.iter().enumerate() {
        for &i in k {
            if (1..=letters.len()).contains(&i) {
                if block_of[i - 1].is_some() {
                    return Err(WordError::Malformed(format!("index {i} appears twice")));
                }
                block_of[i - 1] = Some(rank as i64);
            }
        }
    }
    let mut out = Vec::new();
    for (i, (a, k)) in letters.into_iter().enumerate() {
        let r = block_of[i].ok_or_else(|| WordError::Malformed(format!("index {} missing", i + 1)))?;
        out.push((a, qi(k) + Q::new(r.into(), (m + 2).into())));
    }
    let w = TimedWord(out);
    if !w.is_monotone() {
        return Err(WordError::Malformed("timestamps decrease".into()));
    }
    Ok(w)
}

/// Chain automaton accepting exactly the timed words equivalent to `w`.
pub fn class_recognizer(w: &TimedWord) -> TimedAutomaton {
    class_recognizer_in(w, TimeDomain::Dense)
}

fn class_recognizer_in(w: &TimedWord, dom: TimeDomain) -> TimedAutomaton {
    let n = w.len();
    let mut ta = TimedAutomaton::new("class", dom);
    let clocks: Vec<usize> = (0..n.max(1)).map(|j| ta.add_clock(format!("x{j}"))).collect();
    let locs: Vec<usize> = (0..=n).map(|i| ta.add_location(format!("w{i}"), Guard::tt())).collect();
    ta.init = locs[0];
    ta.finals.insert(locs[n]);
    let times = w.times();
    let at = |j: usize| if j == 0 { Q::zero() } else { times[j - 1].clone() };
    for i in 1..=n {
        let a = ta.add_action(w.0[i - 1].0.clone());
        let mut g = Vec::new();
        for j in 0..i {
            let d = at(i) - at(j);
            let (lo, hi) = (to_i64(&floor(&d)).unwrap(), to_i64(&ceil(&d)).unwrap());
            if lo == hi {
                g.push(Constraint::new(clocks[j], Cmp::Eq, lo));
            } else {
                g.push(Constraint::new(clocks[j], Cmp::Gt, lo));
                g.push(Constraint::new(clocks[j], Cmp::Lt, hi));
            }
        }
        let resets = if i < n { vec![clocks[i]] } else { vec![] };
        ta.add_edge(locs[i - 1], Some(a), Guard::of(g), resets, locs[i]);
    }
    ta
}

/// Some trace of `ta` is equivalent to `w`.
pub fn class_membership(ta: &TimedAutomaton, w: &TimedWord) -> Result<bool, RegionError> {
    let p = product(ta, &class_recognizer_in(w, ta.time_domain));
    Ok(build_region_automaton(&p)?.path_to_final().is_some())
}

/// Multiplies every constant of `ta` by `k`.
pub fn scale_constants(ta: &TimedAutomaton, k: i64) -> TimedAutomaton {
    let mut out = ta.clone();
    let scale = |g: &mut Guard| {
        for c in g.conjuncts.iter_mut() {
            c.bound *= k;
        }
    };
    out.invariants.iter_mut().for_each(scale);
    out.edges.iter_mut().for_each(|e| scale(&mut e.guard));
    out
}

/// `w` is a trace of `ta`.
pub fn membership(ta: &TimedAutomaton, w: &TimedWord) -> Result<bool, RegionError> {
    let d = w.0.iter().fold(num_bigint::BigInt::one(), |acc, (_, t)| acc.lcm(t.denom()));
    if ta.time_domain == TimeDomain::Discrete {
        if !d.is_one() {
            return Ok(false);
        }
        return class_membership(ta, w);
    }
    let Ok(k) = i64::try_from(d) else { return Ok(false) };
    class_membership(&scale_constants(ta, k), &w.scale(&qi(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q::q;

    fn w(s: &str) -> TimedWord {
        TimedWord::parse(s).unwrap()
    }

    #[test]
    fn equivalence_examples() {
        assert!(word_equiv(&w("(a,1.2)(b,1.5)"), &w("(a,1.3)(b,1.6)")));
        assert!(!word_equiv(&w("(a,1)"), &w("(a,1.5)")));
        assert!(!word_equiv(&w("(a,1.2)(b,1.5)"), &w("(a,1.5)(b,1.2)")));
        assert!(!word_equiv(&w("(a,1.2)(b,1.5)"), &w("(a,1.2)(c,1.5)")));
        assert!(!word_equiv(&w("(a,1.2)(b,1.5)"), &w("(a,1.5)(b,1.5)")));
    }

    #[test]
    fn distortion_maps_breakpoints() {
        let f: Vec<Q> = [(0, 1), (3, 10), (5, 10), (6, 10), (1, 1)].iter().map(|&(a, b)| q(a, b)).collect();
        let g: Vec<Q> = [(0, 1), (1, 10), (4, 10), (9, 10), (1, 1)].iter().map(|&(a, b)| q(a, b)).collect();
        let x = w("(a,1.3)(b,2.5)(c,3)");
        let y = distort(&x, &f, &g).unwrap();
        assert_eq!(y, w("(a,1.1)(b,2.4)(c,3)"));
        assert!(word_equiv(&x, &y));
        assert_eq!(distort(&y, &g, &f).unwrap(), x);
        assert_eq!(distort(&x, &f, &f).unwrap(), x);
        assert!(distort(&w("(a,1.25)"), &f, &g).is_err());
        assert!(distort(&x, &f, &f[1..]).is_err());
    }

    #[test]
    fn ticked_table() {
        let tw = ticked_word(&w("(a,1.2)(b,1.5)(c,2)(d,2.3)"), 4).unwrap();
        assert_eq!(tw.to_string(), "t a b t c d f{0,3} f{1} f{4} f{2}");
        assert_eq!(ticked_word(&TimedWord::empty(), 0).unwrap().to_string(), "f{0}");
        assert_eq!(ticked_word(&w("(a,2.5)"), 1).unwrap().to_string(), "t t a f{0} f{1}");
        assert_eq!(ticked_word(&w("(a,2.5)"), 3).unwrap().to_string(), "t t a f{0,2,3} f{1}");
        assert!(ticked_word(&w("(a,1)(b,2)"), 1).is_err());
    }

    #[test]
    fn decode_roundtrip() {
        let x = w("(a,1.2)(b,1.5)(c,2)(d,2.3)");
        let tw = ticked_word(&x, 5).unwrap();
        let y = decode_ticked(&tw.tokens).unwrap();
        assert!(word_equiv(&x, &y));
        assert_eq!(y.0[0].1, q(6, 5));
        let toks: Vec<String> = ["t", "b", "t", "f{0}", "f{1}"].iter().map(|s| s.to_string()).collect();
        assert_eq!(decode_ticked(&toks).unwrap(), w("(b,4/3)"));
        assert!(decode_ticked(&["a".to_string()]).is_err());
    }

    #[test]
    fn recognizer_chain_shape() {
        let x = w("(a,0.3)(b,1)(c,1)(d,1.1)(e,3.7)");
        let r = class_recognizer(&x);
        assert_eq!(r.locations.len(), 6);
        assert_eq!(r.edges[4].guard.render(&r.clocks), "x0 > 3 && x0 < 4 && x1 > 3 && x1 < 4 && x2 > 2 && x2 < 3 && x3 > 2 && x3 < 3 && x4 > 2 && x4 < 3");
        assert_eq!(r.edges[1].guard.render(&r.clocks), "x0 == 1 && x1 > 0 && x1 < 1");
        assert!(class_membership(&r, &x).unwrap());
        assert!(class_membership(&r, &w("(a,0.2)(b,1)(c,1)(d,1.05)(e,3.5)")).unwrap());
        assert!(!class_membership(&r, &w("(a,0.2)(b,1)(c,1)(d,1.3)(e,3.5)")).unwrap());
    }

    #[test]
    fn exact_membership_on_running_example() {
        let ta = crate::fixtures::running_example();
        assert!(membership(&ta, &w("(b,3/2)")).unwrap());
        assert!(membership(&ta, &w("(b,5/2)")).unwrap());
        assert!(membership(&ta, &w("(a,1/3)(a,3)(b,3)")).unwrap());
        assert!(!membership(&ta, &w("(b,7/2)")).unwrap());
        assert!(!membership(&ta, &w("(a,1)")).unwrap());
        let d = crate::fixtures::running_example_discrete();
        assert!(membership(&d, &w("(b,2)")).unwrap());
        assert!(!membership(&d, &w("(b,3/2)")).unwrap());
    }
}
