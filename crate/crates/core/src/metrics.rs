//! Size accounting for an instance: relevant atoms and the size of the
//! search space.

use std::collections::BTreeSet;

use rustc_hash::FxHashSet;

use crate::formula::{subformulas, AgentSet, AtomTable, Formula};
use crate::semantics::VocabularyProfile;

/// Number of relevant atoms, counted once each:
///
/// * every formula of every `Γ_i`, as a whole;
/// * `B j α` for every declared agent `j` and every `α` in some `Γ_i`;
/// * every atom occurring in `Γ` or in `φ0`;
/// * every subformula of `φ0` that is free of `K`, `W`, `O` and expansions.
///   `O` is not unfolded; derived connectives count as nodes.
pub fn ratoms(gamma: &VocabularyProfile, phi0: &Formula) -> usize {
    let mut seen: FxHashSet<Formula> = FxHashSet::default();
    let union: Vec<Formula> = gamma.union().cloned().collect();
    for a in &union {
        seen.insert(a.clone());
    }
    for j in gamma.agents() {
        for a in &union {
            seen.insert(Formula::explicit(j, a.clone()));
        }
    }
    let mut atoms = BTreeSet::new();
    for a in &union {
        a.collect_atoms(&mut atoms);
    }
    phi0.collect_atoms(&mut atoms);
    for p in atoms {
        seen.insert(Formula::atom(p));
    }
    for s in subformulas(phi0) {
        if s.is_l0() {
            seen.insert(s);
        }
    }
    seen.len()
}

/// Base-2 logarithm of `2^|Atm| · (2^ratoms)^|Agt|`.
pub fn state_count_exponent(gamma: &VocabularyProfile, phi0: &Formula, atoms: &AtomTable, agents: &AgentSet) -> usize {
    atoms.len() + agents.len() * ratoms(gamma, phi0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Agent;
    use crate::parser::parse_formula;

    #[test]
    fn small_count() {
        let mut g = VocabularyProfile::new();
        g.insert(Agent(1), Formula::atom("p"));
        g.declare(Agent(2));
        let phi = parse_formula("K 1 (p & q)").unwrap();
        // p, B1 p, B2 p, q, p & q
        assert_eq!(ratoms(&g, &phi), 5);
        let atoms = AtomTable::new(["p".into(), "q".into()]);
        assert_eq!(state_count_exponent(&g, &phi, &atoms, &AgentSet::numbered(2)), 12);
    }

    #[test]
    fn only_is_not_unfolded() {
        let g = VocabularyProfile::new();
        let phi = parse_formula("O 1 p").unwrap();
        assert_eq!(ratoms(&g, &phi), 1);
    }
}
