mod common;

use basecheck::committee::{self, CommitteeConfig, Variant};
use basecheck::parser::parse_formula;
use basecheck::semantics::{check_direct, check_recursive, epistemic_related, expand_state, sat0, State};
use basecheck::{Agent, Formula};
use rand::seq::SliceRandom;
use rand::Rng;

fn base_conj(s: &State, i: Agent) -> Formula {
    Formula::conj(s.base(i).cloned())
}

#[test]
fn relation_partitions_the_context() {
    let mut rng = common::rng(21);
    for _ in 0..40 {
        let inst = common::instance(&mut rng, 9);
        let states = common::states(&inst);
        for s in states.iter().take(16) {
            for i in inst.agents.iter() {
                let b = base_conj(s, i);
                let related = states.iter().filter(|t| epistemic_related(s, t, i)).count();
                let satisfying = states.iter().filter(|t| sat0(t, &b).unwrap()).count();
                let unrelated = states.iter().filter(|t| !epistemic_related(s, t, i)).count();
                assert_eq!(related, satisfying);
                assert_eq!(related + unrelated, states.len());
            }
        }
    }
}

#[test]
fn larger_bases_see_fewer_states() {
    let mut rng = common::rng(22);
    for _ in 0..40 {
        let inst = common::instance(&mut rng, 8);
        let states = common::states(&inst);
        for _ in 0..20 {
            let s = states.choose(&mut rng).unwrap();
            let t = states.choose(&mut rng).unwrap();
            for i in inst.agents.iter() {
                if s.base(i).all(|a| t.believes(i, a)) {
                    for u in &states {
                        if epistemic_related(t, u, i) {
                            assert!(epistemic_related(s, u, i));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn expansion_refines_alternatives() {
    let mut rng = common::rng(23);
    for _ in 0..40 {
        let inst = common::instance(&mut rng, 8);
        let states = common::states(&inst);
        let pool: Vec<Formula> = inst.vocab.union().cloned().collect();
        for _ in 0..10 {
            let s = states.choose(&mut rng).unwrap();
            let i = *inst.agents.as_slice().choose(&mut rng).unwrap();
            let alpha = match pool.choose(&mut rng) {
                Some(a) if rng.gen_bool(0.8) => a.clone(),
                _ => common::l0(&mut rng, &inst.atoms, &[], &[], 3),
            };
            let e = expand_state(s, i, &alpha).unwrap();
            assert_eq!(expand_state(&e, i, &alpha).unwrap(), e);
            for u in &states {
                let want = epistemic_related(s, u, i) && sat0(u, &alpha).unwrap();
                assert_eq!(epistemic_related(&e, u, i), want);
                for j in inst.agents.iter().filter(|j| *j != i) {
                    assert_eq!(epistemic_related(&e, u, j), epistemic_related(s, u, j));
                }
            }
        }
    }
}

/// `O i φ` against its definition, and `~K i ~φ` against a search for a
/// related witness.
#[test]
fn modal_definitions() {
    let mut rng = common::rng(24);
    for _ in 0..60 {
        let inst = common::instance(&mut rng, 8).normalized();
        let states = common::states(&inst);
        let i = *inst.agents.as_slice().choose(&mut rng).unwrap();
        let phi = common::query(&mut rng, &inst, 1, 6);
        let ctx = inst.context().covering(&inst.initial_state, &phi);
        let only = Formula::only(i, phi.clone());
        let def = Formula::and(Formula::at_least(i, phi.clone()), Formula::at_most(i, Formula::not(phi.clone())));
        let possible = Formula::possible(i, phi.clone());
        let holds: Vec<bool> = states.iter().map(|t| check_direct(t, &ctx, &phi).unwrap()).collect();
        for s in &states {
            assert_eq!(check_direct(s, &ctx, &only).unwrap(), check_direct(s, &ctx, &def).unwrap());
            let witness = states.iter().zip(&holds).any(|(t, h)| *h && epistemic_related(s, t, i));
            assert_eq!(check_direct(s, &ctx, &possible).unwrap(), witness);
        }
    }
}

#[test]
fn recursive_and_labeling_agree_everywhere() {
    let mut rng = common::rng(25);
    for _ in 0..40 {
        let inst = common::instance(&mut rng, 7).normalized();
        let phi = common::dynamic_query(&mut rng, &inst, 2, 8);
        let ctx = inst.context().covering(&inst.initial_state, &phi);
        for s in common::states(&inst) {
            assert_eq!(check_direct(&s, &ctx, &phi).unwrap(), check_recursive(&s, &ctx, &phi, 16).unwrap(), "{phi}");
        }
    }
}

#[test]
fn tautologies() {
    let mut rng = common::rng(26);
    for _ in 0..20 {
        let inst = common::instance(&mut rng, 8);
        let ctx = inst.context();
        for s in common::states(&inst).iter().take(32) {
            for i in inst.agents.iter() {
                assert!(check_direct(s, &ctx, &Formula::at_least(i, Formula::top())).unwrap());
                assert!(check_direct(s, &ctx, &Formula::at_most(i, Formula::top())).unwrap());
            }
        }
    }
}

#[test]
fn committee_expansion() {
    let cfg = CommitteeConfig::benchmark(3);
    let s0 = committee::initial_state(&cfg, Variant::First).unwrap();
    let v = parse_formula("vote(1,c2)").unwrap();
    let e = expand_state(&s0, Agent(2), &v).unwrap();
    assert!(e.believes(Agent(2), &v));
    assert!(!s0.believes(Agent(2), &v));
    assert_eq!(e.base_len(Agent(2)), s0.base_len(Agent(2)) + 1);
    for i in [1, 3] {
        assert!(e.base(Agent(i)).eq(s0.base(Agent(i))));
    }
    assert!(e.valuation().eq(s0.valuation()));
    assert!(sat0(&s0, &v).unwrap());
}
