//! Random small automata for differential tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use topaq::ta::{Cmp, Constraint, Guard, TimeDomain, TimedAutomaton};

#[derive(Clone, Copy)]
pub struct Shape {
    pub max_locs: usize,
    pub max_clocks: usize,
    pub max_const: i64,
    pub max_edges: usize,
    pub epsilon: bool,
}

pub const DESK: Shape = Shape { max_locs: 4, max_clocks: 2, max_const: 2, max_edges: 6, epsilon: true };

fn constraint(rng: &mut StdRng, clocks: usize, max_const: i64) -> Constraint {
    let cmp = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt][rng.gen_range(0..5)];
    Constraint::new(rng.gen_range(0..clocks), cmp, rng.gen_range(0..=max_const))
}

fn guard(rng: &mut StdRng, clocks: usize, max_const: i64, p: f64) -> Guard {
    let mut g = Guard::tt();
    if clocks > 0 {
        while g.conjuncts.len() < 2 && rng.gen_bool(p) {
            g.conjuncts.push(constraint(rng, clocks, max_const));
        }
    }
    g
}

fn upper_invariant(rng: &mut StdRng, clocks: usize, max_const: i64) -> Guard {
    if clocks == 0 || !rng.gen_bool(0.3) {
        return Guard::tt();
    }
    let cmp = if rng.gen_bool(0.5) { Cmp::Le } else { Cmp::Lt };
    Guard::of(vec![Constraint::new(rng.gen_range(0..clocks), cmp, rng.gen_range(1..=max_const))])
}

pub fn random_ta(rng: &mut StdRng, domain: TimeDomain, shape: &Shape) -> TimedAutomaton {
    let mut ta = TimedAutomaton::new("rand", domain);
    let nl = rng.gen_range(2..=shape.max_locs);
    let nx = rng.gen_range(0..=shape.max_clocks);
    for i in 0..nx {
        ta.add_clock(format!("x{i}"));
    }
    ta.add_action("a");
    ta.add_action("b");
    for l in 0..nl {
        let inv = upper_invariant(rng, nx, shape.max_const);
        ta.add_location(format!("l{l}"), inv);
    }
    ta.init = 0;
    for l in 1..nl {
        if rng.gen_bool(0.4) {
            ta.private.insert(l);
        }
        if rng.gen_bool(0.4) {
            ta.finals.insert(l);
        }
    }
    if ta.finals.is_empty() {
        ta.finals.insert(nl - 1);
    }
    let ne = rng.gen_range(1..=shape.max_edges);
    for _ in 0..ne {
        let src = rng.gen_range(0..nl);
        let dst = rng.gen_range(0..nl);
        let act = if shape.epsilon && rng.gen_bool(0.2) { None } else { Some(rng.gen_range(0..2)) };
        let g = guard(rng, nx, shape.max_const, 0.5);
        let resets = (0..nx).filter(|_| rng.gen_bool(0.4)).collect();
        ta.add_edge(src, act, g, resets, dst);
    }
    ta
}

/// Dense oERA over {a, b} with clocks x_a, x_b.
pub fn random_oera(rng: &mut StdRng, shape: &Shape) -> TimedAutomaton {
    let mut ta = random_ta(rng, TimeDomain::Dense, &Shape { max_clocks: 0, ..*shape });
    ta.clocks = vec!["x_a".into(), "x_b".into()];
    for e in ta.edges.iter_mut() {
        e.resets = match e.action {
            Some(a) => vec![a],
            None => vec![],
        };
        e.guard = guard(rng, 2, shape.max_const, 0.5);
    }
    for inv in ta.invariants.iter_mut() {
        *inv = upper_invariant(rng, 2, shape.max_const);
    }
    // both letters need an edge for the clock correspondence
    for a in 0..2 {
        if !ta.edges.iter().any(|e| e.action == Some(a)) {
            let l = rng.gen_range(0..ta.locations.len());
            ta.add_edge(0, Some(a), Guard::tt(), vec![a], l);
        }
    }
    ta
}
