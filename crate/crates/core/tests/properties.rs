//! Property tests over the word, observer, region and decider layers.

mod common;

use std::collections::{BTreeSet, VecDeque};

use common::{random_ta, DESK};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use topaq::cli::verdict_code;
use topaq::constructions::{build_priv, build_pub, product};
use topaq::deciders::{check_opacity, Engine, Mode, OpacityVerdict};
use topaq::fixtures::corpus;
use topaq::model::{parse_model, print_model};
use topaq::observers::{normalize_sequence, project, tick_construction, TimeSelection};
use topaq::oracle::{oracle_check, OracleParams};
use topaq::q::{frac, q, Q};
use topaq::regions::{build_region_automaton, nfa_inclusion, Nfa, TICK};
use topaq::ta::{TimeDomain, TimedWord};
use topaq::words::{decode_ticked, distort, membership, ticked_word, times_equiv, word_equiv};

fn timed_word() -> impl Strategy<Value = TimedWord> {
    (prop::collection::vec((0..2usize, 0..12i64), 0..4), 1..5i64).prop_map(|(mut xs, d)| {
        xs.sort_by_key(|&(_, n)| n);
        TimedWord(xs.into_iter().map(|(a, n)| (["a", "b"][a].to_string(), q(n, d))).collect())
    })
}

/// `w` with each timestamp nudged, keeping the word sorted.
fn neighbour(w: &TimedWord, nudges: &[i64]) -> TimedWord {
    let mut times: Vec<Q> = w.0.iter().zip(nudges).map(|((_, t), &k)| t + q(k, 7)).collect();
    times.iter_mut().for_each(|t| {
        if *t < Q::from_integer(0.into()) {
            *t = Q::from_integer(0.into());
        }
    });
    times.sort();
    TimedWord(w.0.iter().zip(times).map(|((a, _), t)| (a.clone(), t)).collect())
}

fn seeded_ta(seed: u64, domain: TimeDomain) -> topaq::ta::TimedAutomaton {
    random_ta(&mut StdRng::seed_from_u64(seed), domain, &DESK)
}

fn accepts(nfa: &Nfa, word: &[u32]) -> bool {
    let close = |set: &mut BTreeSet<u32>| {
        let mut todo: Vec<u32> = set.iter().copied().collect();
        while let Some(s) = todo.pop() {
            for &(l, t) in &nfa.trans[s as usize] {
                if l.is_none() && set.insert(t) {
                    todo.push(t);
                }
            }
        }
    };
    let mut cur: BTreeSet<u32> = nfa.init.iter().copied().collect();
    close(&mut cur);
    for &sym in word {
        let mut next = BTreeSet::new();
        for &s in &cur {
            for &(l, t) in &nfa.trans[s as usize] {
                if l == Some(sym) {
                    next.insert(t);
                }
            }
        }
        close(&mut next);
        cur = next;
    }
    cur.iter().any(|&s| nfa.finals[s as usize])
}

fn small_nfa() -> impl Strategy<Value = Nfa> {
    (1..5usize)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec((0..n as u32, 0..3u32, 0..n as u32), 0..8),
            )
        })
        .prop_map(|(n, finals, edges)| {
            let mut trans = vec![Vec::new(); n];
            for (s, l, t) in edges {
                trans[s as usize].push((if l == 2 { None } else { Some(l) }, t));
            }
            Nfa { alphabet: vec!["a".into(), "b".into()], init: vec![0], finals, trans }
        })
}

fn all_words(max_len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for s in 0..2u32 {
                let mut v: Vec<u32> = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ticked_words_identify_equivalent_words(w in timed_word(), nudges in prop::collection::vec(-3..4i64, 4)) {
        let v = neighbour(&w, &nudges);
        let n = w.len();
        let same = ticked_word(&w, n).unwrap() == ticked_word(&v, n).unwrap();
        prop_assert_eq!(same, word_equiv(&w, &v));
    }

    #[test]
    fn decoding_returns_an_equivalent_word(w in timed_word(), extra in 0..3usize) {
        let tw = ticked_word(&w, w.len() + extra).unwrap();
        let back = decode_ticked(&tw.tokens).unwrap();
        prop_assert!(word_equiv(&w, &back), "{} decoded to {}", w, back);
    }

    #[test]
    fn distortion_is_equivalent_and_invertible(w in timed_word(), cuts in prop::collection::vec(1..20i64, 0..4)) {
        let mut f: Vec<Q> = w.0.iter().map(|(_, t)| frac(t)).collect();
        f.push(q(0, 1));
        f.push(q(1, 1));
        f.sort();
        f.dedup();
        let mut inner: Vec<Q> = cuts.iter().map(|&c| q(c, 20)).collect();
        inner.sort();
        inner.dedup();
        inner.truncate(f.len() - 2);
        // pad with fresh points so both breakpoint lists have the same length
        let mut k = 1;
        while inner.len() < f.len() - 2 {
            let p = q(k, 41);
            if !inner.contains(&p) {
                inner.push(p);
            }
            k += 1;
        }
        inner.sort();
        let mut f2 = vec![q(0, 1)];
        f2.extend(inner);
        f2.push(q(1, 1));
        let d = distort(&w, &f, &f2).unwrap();
        prop_assert!(word_equiv(&w, &d));
        prop_assert_eq!(distort(&d, &f2, &f).unwrap(), w);
    }

    #[test]
    fn first_n_projection_is_a_prefix(w in timed_word(), n in 0..5usize) {
        let p = project(&w, &TimeSelection::FirstN(n)).unwrap();
        prop_assert_eq!(p.len(), n.min(w.len()));
        prop_assert_eq!(&w.0[..p.len()], &p.0[..]);
    }

    #[test]
    fn static_projection_is_a_bounded_subword(w in timed_word(), raw in prop::collection::vec(0..12i64, 0..4)) {
        let mut tau: Vec<Q> = raw.iter().map(|&n| q(n, 3)).collect();
        tau.sort();
        let p = project(&w, &TimeSelection::Static(tau.clone())).unwrap();
        prop_assert!(p.len() <= tau.len());
        let mut rest = w.0.iter();
        for l in &p.0 {
            prop_assert!(rest.any(|x| x == l), "{} is not a subword of {}", p, w);
        }
        if let Some((_, t)) = p.0.first() {
            prop_assert!(t >= &tau[0]);
        }
    }

    #[test]
    fn normalization_is_idempotent_and_equivalent(raw in prop::collection::vec((0..12i64, 1..7i64), 0..5)) {
        let mut tau: Vec<Q> = raw.iter().map(|&(n, d)| q(n, d)).collect();
        tau.sort();
        let norm = normalize_sequence(&tau);
        prop_assert!(times_equiv(&tau, &norm));
        prop_assert_eq!(normalize_sequence(&norm), norm);
    }

    #[test]
    fn inclusion_agrees_with_word_enumeration(a in small_nfa(), b in small_nfa()) {
        let inc = nfa_inclusion(&a, &b, 100_000).unwrap();
        let naive = all_words(6).into_iter().find(|w| accepts(&a, w) && !accepts(&b, w));
        match (&inc.counterexample, naive) {
            (None, found) => {
                prop_assert!(inc.holds);
                prop_assert!(found.is_none(), "missed counterexample {:?}", found);
            }
            (Some(cex), found) => {
                prop_assert!(!inc.holds);
                let syms: Vec<u32> = cex.iter().map(|l| if l == "a" { 0 } else { 1 }).collect();
                prop_assert!(accepts(&a, &syms) && !accepts(&b, &syms));
                if let Some(f) = found {
                    prop_assert!(cex.len() <= f.len());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn printing_round_trips(seed in any::<u64>(), dense in any::<bool>()) {
        let ta = seeded_ta(seed, if dense { TimeDomain::Dense } else { TimeDomain::Discrete });
        prop_assert_eq!(parse_model(&print_model(&ta)).unwrap(), ta);
    }

    #[test]
    fn oracle_is_deterministic(seed in any::<u64>()) {
        let ta = seeded_ta(seed, TimeDomain::Discrete);
        let p = OracleParams::default();
        let first = oracle_check(&ta, Mode::Weak, None, &p).unwrap();
        prop_assert_eq!(oracle_check(&ta, Mode::Weak, None, &p).unwrap(), first);
    }

    #[test]
    fn modes_are_consistent(seed in any::<u64>()) {
        let ta = seeded_ta(seed, TimeDomain::Discrete);
        let full = check_opacity(&ta, Mode::Full, Engine::Discrete).unwrap();
        let weak = check_opacity(&ta, Mode::Weak, Engine::Discrete).unwrap();
        let exists = check_opacity(&ta, Mode::Exists, Engine::Discrete).unwrap();
        if full.holds {
            prop_assert!(weak.holds);
        }
        let (priv_ta, pub_ta) = (build_priv(&ta), build_pub(&ta));
        if let Some(w) = &exists.witness {
            prop_assert!(exists.holds);
            prop_assert!(membership(&priv_ta, w).unwrap() && membership(&pub_ta, w).unwrap());
        }
        if let Some(w) = &weak.witness {
            prop_assert!(membership(&priv_ta, w).unwrap() && !membership(&pub_ta, w).unwrap());
        }
        // weak opacity with a nonempty private language gives a shared trace
        if weak.holds && !exists.holds {
            let nfa = Nfa::from_ra(&build_region_automaton(&priv_ta).unwrap());
            prop_assert!(!nfa.finals.iter().enumerate().any(|(s, &f)| f && reachable(&nfa, s)));
        }
    }

    #[test]
    fn product_traces_are_common_traces(s1 in any::<u64>(), s2 in any::<u64>(), w in timed_word()) {
        let a = seeded_ta(s1, TimeDomain::Discrete);
        let b = seeded_ta(s2, TimeDomain::Discrete);
        let w = TimedWord(w.0.into_iter().map(|(l, t)| (l, t.floor())).collect());
        let both = membership(&a, &w).unwrap() && membership(&b, &w).unwrap();
        prop_assert_eq!(membership(&product(&a, &b), &w).unwrap(), both);
    }

    #[test]
    fn first_n_tick_automaton_reads_at_most_n_letters(seed in any::<u64>(), n in 0..3usize) {
        let ta = seeded_ta(seed, TimeDomain::Dense);
        let nfa = Nfa::from_ra(&build_region_automaton(&tick_construction(&ta, n).unwrap()).unwrap());
        let letter: Vec<bool> =
            nfa.alphabet.iter().map(|l| l != TICK && !l.starts_with("f{")).collect();
        // states reachable while counting observed letters, capped at n + 1
        let mut seen = BTreeSet::new();
        let mut todo: VecDeque<(u32, usize)> = nfa.init.iter().map(|&s| (s, 0)).collect();
        while let Some((s, c)) = todo.pop_front() {
            if !seen.insert((s, c)) {
                continue;
            }
            prop_assert!(!(nfa.finals[s as usize] && c > n), "accepting path with {} letters", c);
            for &(l, t) in &nfa.trans[s as usize] {
                let c2 = (c + l.map_or(0, |l| letter[l as usize] as usize)).min(n + 1);
                todo.push_back((t, c2));
            }
        }
    }
}

fn reachable(nfa: &Nfa, target: usize) -> bool {
    let mut seen: BTreeSet<u32> = nfa.init.iter().copied().collect();
    let mut todo: Vec<u32> = seen.iter().copied().collect();
    while let Some(s) = todo.pop() {
        if s as usize == target {
            return true;
        }
        for &(_, t) in &nfa.trans[s as usize] {
            if seen.insert(t) {
                todo.push(t);
            }
        }
    }
    false
}

#[test]
fn corpus_round_trips() {
    for (name, ta) in corpus() {
        assert_eq!(parse_model(&print_model(&ta)).unwrap(), ta, "{name}");
    }
}

#[test]
fn exit_codes_cover_every_verdict() {
    for definitive in [true, false] {
        for holds in [true, false] {
            let v = OpacityVerdict {
                holds,
                witness: None,
                side: None,
                engine: Engine::Auto,
                definitive,
                notes: vec![],
            };
            let want = match (definitive, holds) {
                (false, _) => 2,
                (true, true) => 0,
                (true, false) => 1,
            };
            assert_eq!(verdict_code(&v), want);
        }
    }
}
