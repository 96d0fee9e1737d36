mod common;

use rand::rngs::StdRng;
use rand::SeedableRng;
use topaq::deciders::{check_opacity, Engine, Mode};
use topaq::oracle::{oracle_check, OracleParams, OracleVerdict};
use topaq::ta::TimeDomain;

#[test]
fn discrete_decider_matches_oracle() {
    let mut rng = StdRng::seed_from_u64(7);
    for i in 0..150 {
        let ta = common::random_ta(&mut rng, TimeDomain::Discrete, &common::DESK);
        for mode in [Mode::Weak, Mode::Full] {
            let d = check_opacity(&ta, mode, Engine::Discrete).unwrap();
            let o = oracle_check(&ta, mode, None, &OracleParams::default()).unwrap();
            let oh = match o {
                OracleVerdict::Holds(_) => true,
                OracleVerdict::Violated(..) => false,
                OracleVerdict::Inconclusive(r) => panic!("instance {i}: {r}"),
            };
            assert_eq!(d.holds, oh, "instance {i} {mode:?}\n{}", topaq::model::print_model(&ta));
        }
    }
}

#[test]
fn verdict_mix_is_not_degenerate() {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut held, mut violated) = (0, 0);
    for _ in 0..150 {
        let ta = common::random_ta(&mut rng, TimeDomain::Discrete, &common::DESK);
        if check_opacity(&ta, Mode::Weak, Engine::Discrete).unwrap().holds {
            held += 1;
        } else {
            violated += 1;
        }
    }
    eprintln!("weak: {held} hold, {violated} violated");
    assert!(held > 10 && violated > 10);
}

#[test]
fn discrete_witnesses_separate_trace_sets() {
    use topaq::constructions::{build_priv, build_pub};
    use topaq::deciders::Side;
    use topaq::words::membership;
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..80 {
        let ta = common::random_ta(&mut rng, TimeDomain::Discrete, &common::DESK);
        let v = check_opacity(&ta, Mode::Full, Engine::Discrete).unwrap();
        if let Some(w) = v.witness {
            let (p, u) = (membership(&build_priv(&ta), &w).unwrap(), membership(&build_pub(&ta), &w).unwrap());
            match v.side.unwrap() {
                Side::PrivNotPub => assert!(p && !u),
                Side::PubNotPriv => assert!(u && !p),
            }
        }
    }
}

#[test]
fn oera_decider_never_contradicts_oracle() {
    use topaq::deciders::is_oera;
    use topaq::q::q;
    let mut rng = StdRng::seed_from_u64(3);
    let params = OracleParams { granularity: Some(q(1, 4)), ..Default::default() };
    let mut checked = 0;
    for i in 0..60 {
        let ta = common::random_oera(&mut rng, &common::DESK);
        assert!(is_oera(&ta));
        for mode in [Mode::Weak, Mode::Full] {
            let d = check_opacity(&ta, mode, Engine::Oera).unwrap();
            if let Some(w) = &d.witness {
                use topaq::constructions::{build_priv, build_pub};
                use topaq::words::membership;
                let p = membership(&build_priv(&ta), w).unwrap();
                let u = membership(&build_pub(&ta), w).unwrap();
                assert!(p != u, "instance {i} {mode:?} witness {w}\n{}", topaq::model::print_model(&ta));
            }
            match oracle_check(&ta, mode, None, &params).unwrap() {
                OracleVerdict::Violated(..) => {
                    checked += 1;
                    assert!(!d.holds, "instance {i} {mode:?}\n{}", topaq::model::print_model(&ta));
                }
                OracleVerdict::Holds(_) => unreachable!(),
                OracleVerdict::Inconclusive(_) => {}
            }
        }
    }
    assert!(checked > 5);
}

#[test]
fn dense_bounded_never_contradicts_oracle() {
    use topaq::deciders::check_bounded;
    use topaq::observers::TimeSelection;
    use topaq::q::q;
    let shape = common::Shape { max_locs: 3, max_clocks: 1, max_const: 2, max_edges: 4, epsilon: true };
    let mut rng = StdRng::seed_from_u64(5);
    let params = OracleParams { granularity: Some(q(1, 4)), ..Default::default() };
    for i in 0..30 {
        let ta = common::random_ta(&mut rng, TimeDomain::Dense, &shape);
        let sel = TimeSelection::FirstN(1);
        for mode in [Mode::Weak, Mode::Full] {
            let d = check_bounded(&ta, &sel, mode).unwrap();
            if let OracleVerdict::Violated(..) = oracle_check(&ta, mode, Some(&sel), &params).unwrap() {
                assert!(!d.holds, "instance {i} {mode:?}\n{}", topaq::model::print_model(&ta));
            }
        }
    }
}
