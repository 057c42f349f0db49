mod common;

use std::time::Duration;

use basecheck::dynamics::reduce_dynamics;
use basecheck::formula::expand_only;
use basecheck::parser::{parse_formula, parse_instance};
use basecheck::symbolic::{check_dynamic_direct, check_symbolic, Limits, Verdict};
use basecheck::{Formula, Kind};
use rand::Rng;

/// Modal depth with expansions counted as transparent.
fn static_depth(phi: &Formula) -> usize {
    match phi.kind() {
        Kind::AtLeast(_, a) | Kind::AtMost(_, a) | Kind::Only(_, a) => 1 + static_depth(a),
        Kind::Expand(_, _, body) => static_depth(body),
        _ => phi.children().into_iter().map(static_depth).max().unwrap_or(0),
    }
}

fn expansions(phi: &Formula) -> usize {
    let mut n = 0;
    phi.visit(&mut |f| n += matches!(f.kind(), Kind::Expand(..)) as usize);
    n
}

#[test]
fn reduction_removes_expansions_without_deepening() {
    let mut rng = common::rng(41);
    for _ in 0..300 {
        let inst = common::instance(&mut rng, 10);
        let phi = common::dynamic_query(&mut rng, &inst, 3, 14);
        let r = reduce_dynamics(&phi);
        assert!(r.is_static(), "{r}");
        assert!(basecheck::formula::modal_depth(&r) <= static_depth(&expand_only(&phi)) + expansions(&phi));
    }
}

#[test]
fn routes_agree_on_dynamic_queries() {
    let mut rng = common::rng(42);
    let lim = Limits::default();
    for _ in 0..200 {
        let base = common::instance(&mut rng, 14);
        let depth = rng.gen_range(1..=2);
        let inst = base.with_query(common::dynamic_query(&mut rng, &base, depth, 10));
        let a = check_dynamic_direct(&inst, &lim).unwrap().verdict;
        let b = check_symbolic(&inst, &lim).unwrap().verdict;
        assert_eq!(a, b, "{}", inst.query);
    }
}

#[test]
fn verdicts_and_statistics_are_deterministic() {
    let mut rng = common::rng(43);
    for _ in 0..30 {
        let base = common::instance(&mut rng, 14);
        let inst = base.with_query(common::query(&mut rng, &base, 3, 12));
        let a = check_symbolic(&inst, &Limits::default()).unwrap();
        let b = check_symbolic(&inst, &Limits::default()).unwrap();
        assert_eq!((a.verdict, a.stats.peak_nodes), (b.verdict, b.stats.peak_nodes));
    }
}

const ONE_AGENT: &str = r#"{
    "agents": 2, "atoms": ["p"],
    "gamma": {"1": ["p"], "2": []}, "base": {"1": ["p"]},
    "valuation": ["p"], "query": "O 1 p"
}"#;

#[test]
fn small_instance_examples() {
    let inst = parse_instance(ONE_AGENT).unwrap();
    let lim = Limits::default();
    for (q, want) in [
        ("O 1 p", true),
        ("K 2 p", false),
        ("K 1 false", false),
        ("false", false),
        ("[+1 p] true", true),
        ("W 1 ~p", true),
        ("K 1 B 1 p", false),
        ("~K 1 ~B 1 p", true),
    ] {
        let out = check_symbolic(&inst.with_query(parse_formula(q).unwrap()), &lim).unwrap();
        assert_eq!(out.verdict, Verdict::from(want), "{q}");
        assert!(out.reason.is_none());
    }
}

#[test]
fn exhausted_budgets_give_ko() {
    let inst = parse_instance(ONE_AGENT).unwrap().with_query(parse_formula("K 1 K 2 (p & K 1 p)").unwrap());
    let out = check_symbolic(&inst, &Limits { max_nodes: 4, timeout: Duration::from_secs(60) }).unwrap();
    assert_eq!(out.verdict, Verdict::Ko);
    let out = check_symbolic(&inst, &Limits { max_nodes: 1 << 20, timeout: Duration::ZERO }).unwrap();
    assert_eq!(out.verdict, Verdict::Ko);
}
