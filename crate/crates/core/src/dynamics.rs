//! Elimination of private-expansion operators by the reduction axioms.

use rustc_hash::FxHashMap;

use crate::formula::{expand_only, rebuild, Agent, Formula, Kind};

/// Rewrites every `[+i α] φ` into an equivalent expansion-free formula.
///
/// `O` is expanded first so the operator only ever meets primitive
/// modalities. Rewriting is innermost first: the body of an expansion is
/// reduced before the operator is pushed through it.
pub fn reduce_dynamics(phi: &Formula) -> Formula {
    let phi = expand_only(phi);
    Reducer::default().reduce(&phi)
}

#[derive(Default)]
struct Reducer {
    memo: FxHashMap<Formula, Formula>,
    push_memo: FxHashMap<(Agent, Formula, Formula), Formula>,
}

impl Reducer {
    fn reduce(&mut self, phi: &Formula) -> Formula {
        if phi.is_static() {
            return phi.clone();
        }
        if let Some(r) = self.memo.get(phi) {
            return r.clone();
        }
        let out = match phi.kind() {
            Kind::Expand(i, alpha, body) => {
                let body = self.reduce(body);
                self.push(*i, alpha, &body)
            }
            _ => {
                let kids: Vec<Formula> = phi.children().into_iter().map(|c| self.reduce(c)).collect();
                rebuild(phi, &kids)
            }
        };
        self.memo.insert(phi.clone(), out.clone());
        out
    }

    /// `[+i α] φ` for an expansion-free, only-free `φ`.
    fn push(&mut self, i: Agent, alpha: &Formula, phi: &Formula) -> Formula {
        let key = (i, alpha.clone(), phi.clone());
        if let Some(r) = self.push_memo.get(&key) {
            return r.clone();
        }
        let out = match phi.kind() {
            Kind::Atom(_) | Kind::Top | Kind::Bottom => phi.clone(),
            Kind::Explicit(j, beta) => {
                if *j == i && beta == alpha {
                    Formula::top()
                } else {
                    phi.clone()
                }
            }
            Kind::AtLeast(j, body) if *j == i => Formula::at_least(i, Formula::implies(alpha.clone(), body.clone())),
            Kind::AtMost(j, body) if *j == i => Formula::and(
                Formula::at_least(i, Formula::implies(Formula::not(alpha.clone()), body.clone())),
                phi.clone(),
            ),
            Kind::AtLeast(..) | Kind::AtMost(..) => phi.clone(),
            Kind::Only(j, body) => {
                let e =
                    Formula::and(Formula::at_least(*j, body.clone()), Formula::at_most(*j, Formula::not(body.clone())));
                self.push(i, alpha, &e)
            }
            Kind::Expand(j, beta, body) => {
                let inner = self.push(*j, beta, body);
                self.push(i, alpha, &inner)
            }
            _ => {
                let kids: Vec<Formula> = phi.children().into_iter().map(|c| self.push(i, alpha, c)).collect();
                rebuild(phi, &kids)
            }
        };
        self.push_memo.insert(key, out.clone());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn explicit_self_becomes_true() {
        assert_eq!(reduce_dynamics(&f("[+1 p] B 1 p")), Formula::top());
        assert_eq!(reduce_dynamics(&f("[+1 p] B 2 p")), f("B 2 p"));
        assert_eq!(reduce_dynamics(&f("[+1 p] B 1 q")), f("B 1 q"));
    }

    #[test]
    fn at_least_clause() {
        assert_eq!(reduce_dynamics(&f("[+1 p] K 1 q")), f("K 1 (p -> q)"));
        assert_eq!(reduce_dynamics(&f("[+1 p] K 2 q")), f("K 2 q"));
    }

    #[test]
    fn at_most_clause() {
        assert_eq!(reduce_dynamics(&f("[+1 p] W 1 q")), f("K 1 (~p -> q) & W 1 q"));
        assert_eq!(reduce_dynamics(&f("[+1 p] W 2 q")), f("W 2 q"));
    }

    #[test]
    fn boolean_distribution() {
        assert_eq!(reduce_dynamics(&f("[+1 p] ~(q & B 1 p)")), f("~(q & true)"));
        assert_eq!(reduce_dynamics(&f("[+1 p] (q | r)")), f("q | r"));
    }

    #[test]
    fn nested_innermost_first() {
        let r = reduce_dynamics(&f("[+1 p][+1 q] K 1 r"));
        assert_eq!(r, f("K 1 (p -> q -> r)"));
        assert!(r.is_static());
    }

    #[test]
    fn expansion_under_modality() {
        let r = reduce_dynamics(&f("K 2 [+1 p] K 1 q"));
        assert_eq!(r, f("K 2 K 1 (p -> q)"));
    }
}
