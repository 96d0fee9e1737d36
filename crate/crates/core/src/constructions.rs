//! Structural transformations: public/private/memo automata, product, reduction gadgets.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::ta::{Cmp, Constraint, Edge, Guard, TimeDomain, TimedAutomaton};

/// Reserved name for a clock added only to express urgency.
pub const URGENT_CLOCK: &str = "_u";

fn joint_domain(a: &TimedAutomaton, b: &TimedAutomaton) -> TimeDomain {
    if a.time_domain == TimeDomain::Discrete && b.time_domain == TimeDomain::Discrete {
        TimeDomain::Discrete
    } else {
        TimeDomain::Dense
    }
}

/// Copies every location and edge of `src` into `dst`, naming locations with `rename`.
/// Clocks and actions are matched by name (added when missing). Returns the location map.
pub(crate) fn copy_into(
    dst: &mut TimedAutomaton,
    src: &TimedAutomaton,
    rename: impl Fn(&str) -> String,
    keep_edge: impl Fn(&Edge) -> bool,
) -> Vec<usize> {
    let cmap: Vec<usize> = src.clocks.iter().map(|c| dst.add_clock(c.clone())).collect();
    let amap: Vec<usize> = src.actions.iter().map(|a| dst.add_action(a.clone())).collect();
    let lmap: Vec<usize> = src
        .locations
        .iter()
        .enumerate()
        .map(|(l, n)| dst.add_location(rename(n), remap_guard(&src.invariants[l], &cmap)))
        .collect();
    for e in src.edges.iter().filter(|e| keep_edge(e)) {
        dst.add_edge(
            lmap[e.source],
            e.action.map(|a| amap[a]),
            remap_guard(&e.guard, &cmap),
            e.resets.iter().map(|r| cmap[*r]).collect(),
            lmap[e.target],
        );
    }
    lmap
}

pub(crate) fn remap_guard(g: &Guard, cmap: &[usize]) -> Guard {
    Guard::of(
        g.conjuncts
            .iter()
            .map(|c| Constraint::new(cmap[c.clock], c.cmp, c.bound))
            .collect(),
    )
}

/// Public-runs automaton: private locations and their edges removed.
pub fn build_pub(ta: &TimedAutomaton) -> TimedAutomaton {
    build_pub_diag(ta).0
}

/// As [`build_pub`], with a warning when the initial location is private.
pub fn build_pub_diag(ta: &TimedAutomaton) -> (TimedAutomaton, Vec<String>) {
    let mut out = TimedAutomaton::new(format!("{}_pub", ta.name), ta.time_domain);
    out.clocks = ta.clocks.clone();
    out.actions = ta.actions.clone();
    let mut warnings = Vec::new();
    let mut lmap = vec![None; ta.locations.len()];
    for (l, n) in ta.locations.iter().enumerate() {
        if !ta.is_private(l) {
            lmap[l] = Some(out.add_location(n.clone(), ta.invariants[l].clone()));
        }
    }
    for e in &ta.edges {
        if let (Some(s), Some(t)) = (lmap[e.source], lmap[e.target]) {
            out.add_edge(s, e.action, e.guard.clone(), e.resets.clone(), t);
        }
    }
    for &f in &ta.finals {
        if let Some(l) = lmap[f] {
            out.finals.insert(l);
        }
    }
    match lmap[ta.init] {
        Some(l) => out.init = l,
        None => {
            warnings.push(format!(
                "initial location `{}` is private: the public automaton has an empty language",
                ta.locations[ta.init]
            ));
            out.init = out.add_location(fresh_name(&out, "sink"), Guard::tt());
        }
    }
    (out, warnings)
}

fn fresh_name(ta: &TimedAutomaton, base: &str) -> String {
    let mut n = base.to_string();
    while ta.location_id(&n).is_some() {
        n.push('\'');
    }
    n
}

fn two_copies(ta: &TimedAutomaton, name: &str) -> (TimedAutomaton, Vec<usize>, Vec<usize>) {
    let mut out = TimedAutomaton::new(name, ta.time_domain);
    out.clocks = ta.clocks.clone();
    out.actions = ta.actions.clone();
    let sbar: Vec<usize> = ta
        .locations
        .iter()
        .enumerate()
        .map(|(l, n)| out.add_location(format!("{n}.Sbar"), ta.invariants[l].clone()))
        .collect();
    let s: Vec<usize> = ta
        .locations
        .iter()
        .enumerate()
        .map(|(l, n)| out.add_location(format!("{n}.S"), ta.invariants[l].clone()))
        .collect();
    for e in &ta.edges {
        // a public run that reached a final location has ended
        if !ta.is_final(e.source) {
            let t = if ta.is_private(e.target) { s[e.target] } else { sbar[e.target] };
            out.add_edge(sbar[e.source], e.action, e.guard.clone(), e.resets.clone(), t);
        }
        out.add_edge(s[e.source], e.action, e.guard.clone(), e.resets.clone(), s[e.target]);
    }
    out.init = if ta.is_private(ta.init) { s[ta.init] } else { sbar[ta.init] };
    for &p in &ta.private {
        out.private.insert(s[p]);
    }
    (out, sbar, s)
}

/// Private-runs automaton: a copy before (`.Sbar`) and after (`.S`) the first private visit.
pub fn build_priv(ta: &TimedAutomaton) -> TimedAutomaton {
    let (mut out, _, s) = two_copies(ta, &format!("{}_priv", ta.name));
    for &f in &ta.finals {
        out.finals.insert(s[f]);
    }
    out
}

/// The private-runs automaton with the public finals kept as finals.
pub fn build_memo(ta: &TimedAutomaton) -> TimedAutomaton {
    let (mut out, sbar, s) = two_copies(ta, &format!("{}_memo", ta.name));
    for &f in &ta.finals {
        out.finals.insert(s[f]);
        out.finals.insert(sbar[f]);
    }
    out
}

/// `inv` evaluated right after `resets`, as a guard on the pre-reset valuation.
/// `None` when a reset clock makes it false.
pub(crate) fn post_reset_guard(inv: &Guard, resets: &[usize]) -> Option<Guard> {
    let mut g = Guard::tt();
    for c in &inv.conjuncts {
        if resets.contains(&c.clock) {
            if !c.cmp.eval(&0i64, &c.bound) {
                return None;
            }
        } else {
            g.conjuncts.push(c.clone());
        }
    }
    Some(g)
}

/// Synchronised product; a component that reached a final location stays there.
/// Action, guard, resets and target pair of a product edge.
type PairEdge = (Option<usize>, Guard, Vec<usize>, (usize, usize));

pub fn product(ta1: &TimedAutomaton, ta2: &TimedAutomaton) -> TimedAutomaton {
    let mut out = TimedAutomaton::new(format!("{}_x_{}", ta1.name, ta2.name), joint_domain(ta1, ta2));
    out.clocks = ta1.clocks.clone();
    let cmap2: Vec<usize> = ta2
        .clocks
        .iter()
        .map(|c| {
            let mut n = c.clone();
            while out.clock_id(&n).is_some() {
                n.push('\'');
            }
            out.add_clock(n)
        })
        .collect();
    let cmap1: Vec<usize> = (0..ta1.clocks.len()).collect();
    let act1: Vec<usize> = ta1.actions.iter().map(|a| out.add_action(a.clone())).collect();
    let act2: Vec<usize> = ta2.actions.iter().map(|a| out.add_action(a.clone())).collect();

    let f1 = |l: usize| ta1.is_final(l);
    let f2 = |l: usize| ta2.is_final(l);
    let zero1 = vec![crate::q::qi(0); ta1.clocks.len()];
    let zero2 = vec![crate::q::qi(0); ta2.clocks.len()];
    let init_ok = (!f1(ta1.init) || ta1.invariants[ta1.init].holds(&zero1))
        && (!f2(ta2.init) || ta2.invariants[ta2.init].holds(&zero2));

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let intern = |out: &mut TimedAutomaton,
                  queue: &mut VecDeque<(usize, usize)>,
                  index: &mut HashMap<(usize, usize), usize>,
                  p: (usize, usize)| {
        if let Some(&i) = index.get(&p) {
            return i;
        }
        let mut inv = Guard::tt();
        if !f1(p.0) {
            inv = inv.and(&remap_guard(&ta1.invariants[p.0], &cmap1));
        }
        if !f2(p.1) {
            inv = inv.and(&remap_guard(&ta2.invariants[p.1], &cmap2));
        }
        let mut name = format!("{}.{}", ta1.locations[p.0], ta2.locations[p.1]);
        while out.location_id(&name).is_some() {
            name.push('\'');
        }
        let i = out.add_location(name, inv);
        if f1(p.0) && f2(p.1) && init_ok {
            out.finals.insert(i);
        }
        if ta1.is_private(p.0) || ta2.is_private(p.1) {
            out.private.insert(i);
        }
        index.insert(p, i);
        queue.push_back(p);
        i
    };
    out.init = intern(&mut out, &mut queue, &mut index, (ta1.init, ta2.init));

    // guard for entering `target` of a component that becomes final on this edge
    let entering = |ta: &TimedAutomaton, cmap: &[usize], e: &Edge| -> Option<Guard> {
        if ta.is_final(e.target) {
            let resets: Vec<usize> = e.resets.to_vec();
            post_reset_guard(&ta.invariants[e.target], &resets).map(|g| remap_guard(&g, cmap))
        } else {
            Some(Guard::tt())
        }
    };

    while let Some((l1, l2)) = queue.pop_front() {
        let src = index[&(l1, l2)];
        if f1(l1) && f2(l2) {
            continue;
        }
        let mut new_edges: Vec<PairEdge> = Vec::new();
        if !f1(l1) {
            for (_, e1) in ta1.outgoing(l1).filter(|(_, e)| e.action.is_none()) {
                if let Some(extra) = entering(ta1, &cmap1, e1) {
                    let g = remap_guard(&e1.guard, &cmap1).and(&extra);
                    new_edges.push((None, g, e1.resets.clone(), (e1.target, l2)));
                }
            }
        }
        if !f2(l2) {
            for (_, e2) in ta2.outgoing(l2).filter(|(_, e)| e.action.is_none()) {
                if let Some(extra) = entering(ta2, &cmap2, e2) {
                    let g = remap_guard(&e2.guard, &cmap2).and(&extra);
                    let r = e2.resets.iter().map(|c| cmap2[*c]).collect();
                    new_edges.push((None, g, r, (l1, e2.target)));
                }
            }
        }
        if !f1(l1) && !f2(l2) {
            for (_, e1) in ta1.outgoing(l1) {
                let Some(a1) = e1.action else { continue };
                for (_, e2) in ta2.outgoing(l2) {
                    let Some(a2) = e2.action else { continue };
                    if act1[a1] != act2[a2] {
                        continue;
                    }
                    let (Some(x1), Some(x2)) = (entering(ta1, &cmap1, e1), entering(ta2, &cmap2, e2)) else {
                        continue;
                    };
                    let g = remap_guard(&e1.guard, &cmap1)
                        .and(&remap_guard(&e2.guard, &cmap2))
                        .and(&x1)
                        .and(&x2);
                    let mut r: Vec<usize> = e1.resets.clone();
                    r.extend(e2.resets.iter().map(|c| cmap2[*c]));
                    r.sort_unstable();
                    r.dedup();
                    new_edges.push((Some(act1[a1]), g, r, (e1.target, e2.target)));
                }
            }
        }
        for (a, g, r, tgt) in new_edges {
            let t = intern(&mut out, &mut queue, &mut index, tgt);
            out.add_edge(src, a, g, r, t);
        }
    }
    out
}

/// A clock for `x = 0` urgency invariants: the first clock, or a fresh reserved one.
pub(crate) fn urgency_clock(ta: &mut TimedAutomaton) -> usize {
    if ta.clocks.is_empty() {
        ta.add_clock(URGENT_CLOCK)
    } else {
        0
    }
}

fn urgent(x: usize) -> Guard {
    Guard::of(vec![Constraint::new(x, Cmp::Eq, 0)])
}

fn prefixed(p: &'static str) -> impl Fn(&str) -> String {
    move |n| format!("{p}.{n}")
}

/// Exchanges the private and public trace sets.
pub fn swap_gadget(ta: &TimedAutomaton) -> TimedAutomaton {
    let mut b = TimedAutomaton::new(format!("{}_swap", ta.name), ta.time_domain);
    b.clocks = ta.clocks.clone();
    b.actions = ta.actions.clone();
    let x = urgency_clock(&mut b);
    let init = b.add_location("g.init", urgent(x));
    let lp = b.add_location("g.priv", urgent(x));
    let priv_ta = build_priv(ta);
    let pub_ta = build_pub(ta);
    let pm = copy_into(&mut b, &priv_ta, prefixed("priv"), |_| true);
    let um = copy_into(&mut b, &pub_ta, prefixed("pub"), |_| true);
    b.add_edge(init, None, Guard::tt(), vec![], pm[priv_ta.init]);
    b.add_edge(init, None, Guard::tt(), vec![], lp);
    b.add_edge(lp, None, Guard::tt(), vec![], um[pub_ta.init]);
    b.finals.extend(priv_ta.finals.iter().map(|f| pm[*f]));
    b.finals.extend(pub_ta.finals.iter().map(|f| um[*f]));
    b.init = init;
    b.private.insert(lp);
    b
}

/// Public traces unchanged; private traces become private ∪ public.
pub fn embed_gadget(ta: &TimedAutomaton) -> TimedAutomaton {
    let mut b = TimedAutomaton::new(format!("{}_embed", ta.name), ta.time_domain);
    b.clocks = ta.clocks.clone();
    b.actions = ta.actions.clone();
    let x = urgency_clock(&mut b);
    let init = b.add_location("g.init", urgent(x));
    let lp = b.add_location("g.priv", urgent(x));
    let priv_ta = build_priv(ta);
    let pub_ta = build_pub(ta);
    let pm = copy_into(&mut b, &priv_ta, prefixed("priv"), |_| true);
    let um = copy_into(&mut b, &pub_ta, prefixed("pub"), |_| true);
    b.add_edge(init, None, Guard::tt(), vec![], um[pub_ta.init]);
    b.add_edge(init, None, Guard::tt(), vec![], lp);
    b.add_edge(lp, None, Guard::tt(), vec![], pm[priv_ta.init]);
    b.add_edge(lp, None, Guard::tt(), vec![], um[pub_ta.init]);
    b.finals.extend(priv_ta.finals.iter().map(|f| pm[*f]));
    b.finals.extend(pub_ta.finals.iter().map(|f| um[*f]));
    b.init = init;
    b.private.insert(lp);
    b
}

/// Private traces = language of `a`, public traces = language of `b`.
pub fn inclusion_gadget(a: &TimedAutomaton, b: &TimedAutomaton) -> TimedAutomaton {
    let mut o = TimedAutomaton::new(format!("{}_in_{}", a.name, b.name), joint_domain(a, b));
    o.clocks = a.clocks.clone();
    for c in &b.clocks {
        o.add_clock(c.clone());
    }
    let x = urgency_clock(&mut o);
    let init = o.add_location("g.init", urgent(x));
    let lp = o.add_location("g.priv", urgent(x));
    let am = copy_into(&mut o, a, prefixed("A"), |_| true);
    let bm = copy_into(&mut o, b, prefixed("B"), |_| true);
    o.add_edge(init, None, Guard::tt(), vec![], bm[b.init]);
    o.add_edge(init, None, Guard::tt(), vec![], lp);
    o.add_edge(lp, None, Guard::tt(), vec![], am[a.init]);
    o.finals.extend(a.finals.iter().map(|f| am[*f]));
    o.finals.extend(b.finals.iter().map(|f| bm[*f]));
    o.init = init;
    o.private.insert(lp);
    o
}

/// Locations reachable from the initial one in the underlying graph.
pub fn graph_reachable(ta: &TimedAutomaton) -> BTreeSet<usize> {
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in &ta.edges {
        if !ta.is_final(e.source) {
            succ.entry(e.source).or_default().push(e.target);
        }
    }
    let mut seen = BTreeSet::from([ta.init]);
    let mut stack = vec![ta.init];
    while let Some(l) = stack.pop() {
        for &t in succ.get(&l).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;
    use crate::q::q;
    use crate::ta::{enumerate_runs, trace_of, validate, TimedWord};

    type Traces = BTreeSet<TimedWord>;

    fn traces(ta: &TimedAutomaton, steps: usize) -> Traces {
        enumerate_runs(ta, &q(3, 1), steps, &q(1, 2))
            .unwrap()
            .iter()
            .map(|r| trace_of(ta, r))
            .collect()
    }

    fn split(ta: &TimedAutomaton, steps: usize) -> (Traces, Traces) {
        split_upto(ta, steps, usize::MAX)
    }

    // traces with at most `len` letters; complete once `steps` covers len + 3
    fn split_upto(ta: &TimedAutomaton, steps: usize, len: usize) -> (Traces, Traces) {
        let mut p = Traces::new();
        let mut u = Traces::new();
        for r in enumerate_runs(ta, &q(3, 1), steps, &q(1, 2)).unwrap() {
            if trace_of(ta, &r).len() > len {
                continue;
            }
            if r.is_private(ta) {
                p.insert(trace_of(ta, &r));
            } else {
                u.insert(trace_of(ta, &r));
            }
        }
        (p, u)
    }

    #[test]
    fn pub_of_running_example() {
        let p = build_pub(&running_example());
        assert!(validate(&p).is_empty());
        assert_eq!(p.locations, vec!["l0", "l1"]);
        assert_eq!(p.edges.len(), 2);
        assert_eq!(traces(&p, 4), split(&running_example(), 4).1);
    }

    #[test]
    fn priv_of_running_example() {
        let p = build_priv(&running_example());
        assert!(validate(&p).is_empty());
        assert_eq!(p.locations.len(), 6);
        assert_eq!(p.locations[p.init], "l0.Sbar");
        assert_eq!(traces(&p, 4), split(&running_example(), 4).0);
        let (tp, tu) = split(&running_example(), 4);
        let all: Traces = tp.union(&tu).cloned().collect();
        assert_eq!(all, traces(&running_example(), 4));
    }

    #[test]
    fn memo_keeps_both_sets() {
        let m = build_memo(&running_example());
        assert_eq!(m.finals.len(), 2);
        assert_eq!(split(&m, 4), split(&running_example(), 4));
    }

    #[test]
    fn no_private_locations() {
        let mut ta = running_example();
        ta.private.clear();
        assert!(traces(&build_priv(&ta), 4).is_empty());
        let p = build_pub(&ta);
        assert_eq!(p.locations, ta.locations);
        assert_eq!(p.edges, ta.edges);
    }

    #[test]
    fn private_init_gives_empty_public_language() {
        let mut ta = running_example();
        ta.private.insert(ta.init);
        let (p, w) = build_pub_diag(&ta);
        assert_eq!(w.len(), 1);
        assert!(traces(&p, 4).is_empty());
        // every run starts in a private location
        assert_eq!(traces(&build_priv(&ta), 4), traces(&ta, 4));
    }

    #[test]
    fn only_private_paths() {
        let mut ta = running_example();
        ta.edges.retain(|e| !(e.source == 0 && e.target == 1));
        assert!(traces(&build_pub(&ta), 4).is_empty());
    }

    #[test]
    fn product_witness() {
        let ta = running_example();
        let p = product(&build_priv(&ta), &build_pub(&ta));
        assert!(validate(&p).is_empty());
        assert_eq!(p.clocks, vec!["x", "x'"]);
        let t = traces(&p, 6);
        assert!(t.contains(&TimedWord::parse("(b,3/2)").unwrap()));
        assert!(!t.contains(&TimedWord::parse("(b,5/2)").unwrap()));
    }

    #[test]
    fn product_with_empty_language() {
        let ta = running_example();
        let mut empty = ta.clone();
        empty.finals.clear();
        assert!(traces(&product(&ta, &empty), 6).is_empty());
    }

    #[test]
    fn swap_exchanges() {
        let ta = running_example();
        let b = swap_gadget(&ta);
        assert!(validate(&b).is_empty());
        let (p, u) = split_upto(&ta, 4, 2);
        let (bp, bu) = split_upto(&b, 6, 2);
        assert_eq!(bp, u);
        assert_eq!(bu, p);
        assert!(bp.contains(&TimedWord::parse("(b,5/2)").unwrap()));
    }

    #[test]
    fn embed_unions() {
        let ta = running_example();
        let b = embed_gadget(&ta);
        let (p, u) = split_upto(&ta, 4, 2);
        let (bp, bu) = split_upto(&b, 6, 2);
        assert_eq!(bu, u);
        assert_eq!(bp, p.union(&u).cloned().collect());
    }

    #[test]
    fn inclusion_sides() {
        let a = running_example();
        let mut b = running_example();
        let a_id = b.action_id("a");
        b.edges.retain(|e| e.action != a_id);
        let o = inclusion_gadget(&a, &b);
        assert!(validate(&o).is_empty());
        let (op, ou) = split_upto(&o, 6, 2);
        let short = |t: Traces| t.into_iter().filter(|w| w.len() <= 2).collect::<Traces>();
        assert_eq!(op, short(traces(&a, 4)));
        assert_eq!(ou, short(traces(&b, 4)));
    }

    #[test]
    fn urgency_clock_added_when_clockless() {
        let mut ta = TimedAutomaton::new("c", TimeDomain::Dense);
        ta.add_location("l", Guard::tt());
        ta.finals.insert(0);
        let b = swap_gadget(&ta);
        assert_eq!(b.clocks, vec![URGENT_CLOCK]);
        let (bp, bu) = split(&b, 3);
        assert_eq!(bp.len(), 1);
        assert!(bu.is_empty());
    }
}
