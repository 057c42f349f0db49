mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use basecheck::bdd::{BddStore, StoreLimits};
use basecheck::committee::{self, CommitteeConfig, Variant};
use basecheck::formula::{expand_only, modal_depth};
use basecheck::qbf::{
    build, check_sentence, closed_sentence, evaluate_qdimacs, export_qdimacs, LeveledVar, Qbf, QbfFormula, Translator,
    VarOrder,
};
use rand::Rng;
use rustc_hash::FxHashMap;

fn shifted(a: &QbfFormula, b: &QbfFormula) -> bool {
    let up = |v: &LeveledVar| LeveledVar { kind: v.kind.clone(), level: v.level + 1 };
    match (a, b) {
        (QbfFormula::Const(x), QbfFormula::Const(y)) => x == y,
        (QbfFormula::Var(x), QbfFormula::Var(y)) => up(x) == *y,
        (QbfFormula::Not(x), QbfFormula::Not(y)) => shifted(x, y),
        (QbfFormula::And(x1, x2), QbfFormula::And(y1, y2))
        | (QbfFormula::Or(x1, x2), QbfFormula::Or(y1, y2))
        | (QbfFormula::Implies(x1, x2), QbfFormula::Implies(y1, y2)) => shifted(x1, y1) && shifted(x2, y2),
        (QbfFormula::ForAll(xs, x), QbfFormula::ForAll(ys, y))
        | (QbfFormula::Exists(xs, x), QbfFormula::Exists(ys, y)) => {
            xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(v, w)| up(v) == *w) && shifted(x, y)
        }
        _ => false,
    }
}

#[test]
fn levels_are_local_and_shift_uniformly() {
    let mut rng = common::rng(31);
    for _ in 0..150 {
        let inst = common::instance(&mut rng, 10).normalized();
        let phi = expand_only(&common::query(&mut rng, &inst, 3, 12));
        let tr = Translator::for_instance(&inst);
        let k = rng.gen_range(0..3);
        let d = modal_depth(&phi) as u32;
        let q = tr.translate(&phi, k).unwrap();
        for v in q.vars() {
            assert!(v.level >= k && v.level <= k + d, "{v} outside {k}..={}", k + d);
        }
        assert!(shifted(&q, &tr.translate(&phi, k + 1).unwrap()));
    }
}

#[test]
fn descriptor_has_one_model() {
    let mut rng = common::rng(32);
    for _ in 0..50 {
        let inst = common::instance(&mut rng, 12);
        let tr = Translator::for_instance(&inst);
        let order = VarOrder::new(&inst.atoms, &inst.vocab, 1);
        let mut st = BddStore::new(order.len());
        let d = build(&tr.describe_state(&inst.initial_state).unwrap(), &mut st, &order).unwrap();
        assert_eq!(st.sat_count(d, order.len()).unwrap(), 1);
    }
    let inst = committee::instance(&CommitteeConfig::benchmark(3), Variant::First).unwrap();
    let tr = Translator::for_instance(&inst);
    let desc = tr.describe_state(&inst.initial_state).unwrap();
    assert_eq!(desc.vars().len(), 51);
}

fn random_qbf(rng: &mut impl Rng, vars: &[LeveledVar], size: u32) -> Qbf {
    if size <= 1 {
        return QbfFormula::var(vars[rng.gen_range(0..vars.len())].clone());
    }
    let s = size - 1;
    match rng.gen_range(0..7) {
        0 => QbfFormula::not(random_qbf(rng, vars, s)),
        1 => QbfFormula::and(random_qbf(rng, vars, s / 2), random_qbf(rng, vars, s / 2)),
        2 => QbfFormula::or(random_qbf(rng, vars, s / 2), random_qbf(rng, vars, s / 2)),
        3 => QbfFormula::implies(random_qbf(rng, vars, s / 2), random_qbf(rng, vars, s / 2)),
        q => {
            let k = rng.gen_range(1..=2.min(vars.len()));
            let picked: Arc<[LeveledVar]> = vars[..k].to_vec().into();
            let body = random_qbf(rng, vars, s);
            if q % 2 == 0 {
                QbfFormula::forall(picked, body)
            } else {
                QbfFormula::exists(picked, body)
            }
        }
    }
}

fn close(q: Qbf, rng: &mut impl Rng) -> Qbf {
    let free: Arc<[LeveledVar]> = q.free_vars().into();
    if free.is_empty() {
        q
    } else if rng.gen_bool(0.5) {
        QbfFormula::forall(free, q)
    } else {
        QbfFormula::exists(free, q)
    }
}

#[test]
fn qdimacs_matches_the_bdd_engine() {
    let mut rng = common::rng(33);
    let names = ["a", "b", "c", "d", "e"];
    let pool: Vec<LeveledVar> = names.iter().map(|n| LeveledVar::prop((*n).into(), 0)).collect();
    let atoms = basecheck::AtomTable::new(names.iter().map(|n| (*n).into()));
    let order = VarOrder::new(&atoms, &Default::default(), 1);
    let mut seen = BTreeSet::new();
    for _ in 0..40 {
        let q = close(random_qbf(&mut rng, &pool, 14), &mut rng);
        let mut st = BddStore::new(order.len());
        let n = build(&q, &mut st, &order).unwrap();
        let want = st.is_const(n).unwrap();
        assert_eq!(q.evaluate_naive(&mut FxHashMap::default()).unwrap(), want);
        assert_eq!(evaluate_qdimacs(&export_qdimacs(&q).unwrap()).unwrap(), want);
        seen.insert(want);
    }
    assert_eq!(seen.len(), 2);
    // closed sentences of tiny instances
    let mut checked = 0;
    while checked < 20 {
        let inst = common::instance(&mut rng, 4).normalized();
        let phi = common::query(&mut rng, &inst, 1, 6);
        let inst = inst.with_query(phi);
        let sentence = closed_sentence(&inst).unwrap();
        let text = export_qdimacs(&sentence).unwrap();
        let Ok(got) = evaluate_qdimacs(&text) else { continue };
        assert_eq!(got, check_sentence(&inst, StoreLimits::default()).unwrap());
        checked += 1;
    }
}

#[test]
fn committee_export_names_every_variable() {
    let inst = committee::instance(&CommitteeConfig::benchmark(3), Variant::First).unwrap().normalized();
    let order = VarOrder::new(&inst.atoms, &inst.vocab, 2);
    let known: BTreeSet<String> = (0..order.len()).map(|p| order.var_at(p).unwrap().to_string()).collect();
    let text = export_qdimacs(&closed_sentence(&inst).unwrap()).unwrap();
    let mut mapped = BTreeSet::new();
    let mut quantified = BTreeSet::new();
    let mut declared = 0;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("c map ") {
            let (id, name) = rest.split_once(' ').unwrap();
            assert!(known.contains(name), "{name}");
            assert!(mapped.insert(id.parse::<u32>().unwrap()));
        } else if let Some(rest) = line.strip_prefix("p cnf ") {
            declared = rest.split(' ').next().unwrap().parse().unwrap();
        } else if line.starts_with("a ") || line.starts_with("e ") {
            quantified.extend(line[2..].split(' ').map(|x| x.parse::<u32>().unwrap()).filter(|x| *x != 0));
        }
    }
    // copies renamed apart share a name; every copy is quantified
    assert!(mapped.len() > known.len() / 2);
    assert!(mapped.iter().all(|i| quantified.contains(i) && *i <= declared));
    assert_eq!(quantified.len() as u32, declared);
}
