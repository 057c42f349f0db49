//! States, vocabularies, the universal context and the explicit-state
//! checkers.

mod direct;
mod enumerate;

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::formula::{normalize, Agent, AtomId, AtomTable, Formula, Kind};

pub use direct::{check_direct, check_direct_with_cap};
pub use enumerate::{check_recursive, enumerate_context, ContextIter};

/// Default limit on `|atoms| + Σ|Γ_i|` for explicit enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("context has {bits} state bits, over the enumeration cap of {cap}; use the symbolic engine")]
    CapExceeded { bits: usize, cap: usize },
    #[error("`{0}` is not an explicit-belief formula")]
    NotExplicit(String),
    #[error("`{0}` still contains an expansion operator inside a modality and the context is too large to enumerate")]
    InnerDynamics(String),
}

/// Per-agent vocabularies `Γ_i`. Each `Γ_i` keeps insertion order and
/// holds no duplicates.
#[derive(Clone, Debug, Default)]
pub struct VocabularyProfile {
    vocab: BTreeMap<Agent, Gamma>,
}

#[derive(Clone, Debug, Default)]
struct Gamma {
    items: Vec<Formula>,
    index: FxHashMap<Formula, usize>,
}

impl PartialEq for VocabularyProfile {
    fn eq(&self, other: &Self) -> bool {
        self.vocab.len() == other.vocab.len()
            && self.vocab.iter().zip(&other.vocab).all(|((a, g), (b, h))| a == b && g.items == h.items)
    }
}

impl VocabularyProfile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an agent, possibly with an empty vocabulary.
    pub fn declare(&mut self, i: Agent) {
        self.vocab.entry(i).or_default();
    }

    /// Adds `α` to `Γ_i` unless present; returns its position.
    pub fn insert(&mut self, i: Agent, alpha: Formula) -> usize {
        let g = self.vocab.entry(i).or_default();
        if let Some(&k) = g.index.get(&alpha) {
            return k;
        }
        let k = g.items.len();
        g.index.insert(alpha.clone(), k);
        g.items.push(alpha);
        k
    }

    pub fn agents(&self) -> impl Iterator<Item = Agent> + '_ {
        self.vocab.keys().copied()
    }

    pub fn gamma(&self, i: Agent) -> &[Formula] {
        self.vocab.get(&i).map(|g| g.items.as_slice()).unwrap_or(&[])
    }

    pub fn contains(&self, i: Agent, alpha: &Formula) -> bool {
        self.index_of(i, alpha).is_some()
    }

    pub fn index_of(&self, i: Agent, alpha: &Formula) -> Option<usize> {
        self.vocab.get(&i).and_then(|g| g.index.get(alpha).copied())
    }

    /// Total number of belief slots, `Σ|Γ_i|`.
    pub fn total(&self) -> usize {
        self.vocab.values().map(|g| g.items.len()).sum()
    }

    /// Formulas occurring in some `Γ_i`, first occurrence order.
    pub fn union(&self) -> impl Iterator<Item = &Formula> + '_ {
        let mut seen = rustc_hash::FxHashSet::default();
        self.vocab.values().flat_map(|g| g.items.iter()).filter(move |f| seen.insert((*f).clone()))
    }

    /// Atoms occurring in the vocabulary.
    pub fn atoms(&self) -> BTreeSet<AtomId> {
        let mut out = BTreeSet::new();
        for g in self.vocab.values() {
            for f in &g.items {
                f.collect_atoms(&mut out);
            }
        }
        out
    }
}

/// A multi-agent state: one belief base per agent and a valuation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    bases: BTreeMap<Agent, BTreeSet<Formula>>,
    valuation: BTreeSet<AtomId>,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_base<I: IntoIterator<Item = Formula>>(mut self, i: Agent, base: I) -> Self {
        for a in base {
            self.add_belief(i, a);
        }
        self
    }

    pub fn with_valuation<I: IntoIterator<Item = AtomId>>(mut self, atoms: I) -> Self {
        for p in atoms {
            self.set_true(p);
        }
        self
    }

    pub fn add_belief(&mut self, i: Agent, alpha: Formula) {
        self.bases.entry(i).or_default().insert(alpha);
    }

    pub fn set_true(&mut self, p: AtomId) {
        self.valuation.insert(p);
    }

    /// `B_i`; empty for agents without an entry.
    pub fn base(&self, i: Agent) -> impl Iterator<Item = &Formula> + '_ {
        self.bases.get(&i).into_iter().flatten()
    }

    /// Agents with a non-empty base, with their bases.
    pub fn bases(&self) -> impl Iterator<Item = (Agent, &BTreeSet<Formula>)> + '_ {
        self.bases.iter().map(|(i, b)| (*i, b))
    }

    pub fn base_len(&self, i: Agent) -> usize {
        self.bases.get(&i).map_or(0, |b| b.len())
    }

    pub fn believes(&self, i: Agent, alpha: &Formula) -> bool {
        self.bases.get(&i).is_some_and(|b| b.contains(alpha))
    }

    pub fn valuation(&self) -> impl Iterator<Item = &AtomId> + '_ {
        self.valuation.iter()
    }

    pub fn holds(&self, p: &AtomId) -> bool {
        self.valuation.contains(p)
    }

    /// Normalizes every base element.
    pub fn normalized(&self) -> State {
        State {
            bases: self.bases.iter().map(|(i, b)| (*i, b.iter().map(normalize).collect())).collect(),
            valuation: self.valuation.clone(),
        }
    }
}

/// Every state whose bases draw from a vocabulary profile and whose
/// valuation draws from an atom table. Never materialized.
#[derive(Clone, Debug, PartialEq)]
pub struct UniversalContext {
    pub profile: VocabularyProfile,
    pub atoms: AtomTable,
}

impl UniversalContext {
    pub fn new(profile: VocabularyProfile, atoms: AtomTable) -> Self {
        UniversalContext { profile, atoms }
    }

    /// `|atoms| + Σ|Γ_i|`.
    pub fn bits(&self) -> usize {
        self.atoms.len() + self.profile.total()
    }

    /// The same context with its atom table extended by every atom of the
    /// vocabulary, of `phi` and of the bases of `s`. Atoms outside the table
    /// would otherwise be frozen to false in every context state.
    pub fn covering(&self, s: &State, phi: &Formula) -> UniversalContext {
        let mut extra = self.profile.atoms();
        phi.collect_atoms(&mut extra);
        for (_, b) in s.bases() {
            for a in b {
                a.collect_atoms(&mut extra);
            }
        }
        let mut atoms = self.atoms.clone();
        for p in extra {
            atoms.insert(p);
        }
        UniversalContext { profile: self.profile.clone(), atoms }
    }

    pub fn contains(&self, s: &State) -> bool {
        s.bases().all(|(i, b)| b.iter().all(|a| self.profile.contains(i, a)))
            && s.valuation().all(|p| self.atoms.contains(p))
    }
}

/// Truth of an explicit-belief formula at a state. Explicit belief is
/// syntactic membership.
pub fn sat0(s: &State, alpha: &Formula) -> Result<bool, CheckError> {
    if !alpha.is_l0() {
        return Err(CheckError::NotExplicit(alpha.to_string()));
    }
    Ok(sat0_unchecked(s, alpha))
}

pub(crate) fn sat0_unchecked(s: &State, alpha: &Formula) -> bool {
    match alpha.kind() {
        Kind::Atom(p) => s.holds(p),
        Kind::Top => true,
        Kind::Bottom => false,
        Kind::Not(a) => !sat0_unchecked(s, a),
        Kind::And(a, b) => sat0_unchecked(s, a) && sat0_unchecked(s, b),
        Kind::Or(a, b) => sat0_unchecked(s, a) || sat0_unchecked(s, b),
        Kind::Implies(a, b) => !sat0_unchecked(s, a) || sat0_unchecked(s, b),
        Kind::Iff(a, b) => sat0_unchecked(s, a) == sat0_unchecked(s, b),
        Kind::Xor(a, b) => sat0_unchecked(s, a) != sat0_unchecked(s, b),
        Kind::Explicit(i, b) => s.believes(*i, b),
        Kind::AtLeast(..) | Kind::AtMost(..) | Kind::Only(..) | Kind::Expand(..) => {
            unreachable!("checked by caller")
        }
    }
}

/// `S ≀_i S'`: `S'` satisfies everything in `B_i(S)`.
pub fn epistemic_related(s: &State, t: &State, i: Agent) -> bool {
    s.base(i).all(|a| sat0_unchecked(t, a))
}

/// `S` with `α` added to `B_i`.
pub fn expand_state(s: &State, i: Agent, alpha: &Formula) -> Result<State, CheckError> {
    if !alpha.is_l0() {
        return Err(CheckError::NotExplicit(alpha.to_string()));
    }
    let mut out = s.clone();
    out.add_belief(i, alpha.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn sat0_membership_is_syntactic() {
        let s = State::new().with_base(Agent(1), [f("p")]).with_valuation(["p".into()]);
        assert!(sat0(&s, &f("p")).unwrap());
        assert!(sat0(&s, &f("B 1 p")).unwrap());
        assert!(!sat0(&s, &f("B 1 (p & p)")).unwrap());
        assert!(sat0(&s, &f("K 1 p")).is_err());
    }

    #[test]
    fn relation_examples() {
        let empty = State::new();
        let s = State::new().with_base(Agent(1), [f("p")]);
        assert!(epistemic_related(&empty, &s, Agent(1)));
        assert!(!epistemic_related(&s, &empty, Agent(1)));
    }

    #[test]
    fn expansion_is_idempotent_and_local() {
        let s = State::new().with_base(Agent(1), [f("p")]).with_base(Agent(2), [f("q")]);
        let once = expand_state(&s, Agent(2), &f("r")).unwrap();
        let twice = expand_state(&once, Agent(2), &f("r")).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.base(Agent(1)).count(), 1);
        assert!(once.believes(Agent(2), &f("r")));
        assert!(expand_state(&s, Agent(1), &f("K 1 p")).is_err());
    }

    #[test]
    fn vocabulary_dedups() {
        let mut g = VocabularyProfile::new();
        assert_eq!(g.insert(Agent(1), f("p")), 0);
        assert_eq!(g.insert(Agent(1), f("q")), 1);
        assert_eq!(g.insert(Agent(1), f("p")), 0);
        g.insert(Agent(2), f("p"));
        assert_eq!(g.total(), 3);
        assert_eq!(g.union().count(), 2);
    }
}
