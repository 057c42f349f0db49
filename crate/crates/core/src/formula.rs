//! The formula languages: propositional explicit-belief formulas, the static
//! language with at-least / at-most implicit belief, and its dynamic
//! extension with private expansion. All three share one AST.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHasher};
use serde::{Deserialize, Serialize};

/// An agent identifier. Agents are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Agent(pub u32);

impl Agent {
    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An opaque propositional atom name such as `p` or `vote(1,c2)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(Arc<str>);

impl AtomId {
    pub fn new(name: &str) -> Self {
        AtomId(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AtomId {
    fn from(s: &str) -> Self {
        AtomId::new(s)
    }
}

/// The shape of one formula node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Atom(AtomId),
    Top,
    Bottom,
    Not(Formula),
    And(Formula, Formula),
    Or(Formula, Formula),
    Implies(Formula, Formula),
    Iff(Formula, Formula),
    Xor(Formula, Formula),
    /// `B i α`: α is literally a member of agent i's base.
    Explicit(Agent, Formula),
    /// `K i φ`: φ holds at every context state agent i considers possible.
    AtLeast(Agent, Formula),
    /// `W i φ`: φ holds at every context state agent i does not consider possible.
    AtMost(Agent, Formula),
    /// `O i φ`, shorthand for `K i φ & W i ~φ`.
    Only(Agent, Formula),
    /// `[+i α] φ`: φ holds after agent i privately adds α to its base.
    Expand(Agent, Formula, Formula),
}

struct Node {
    kind: Kind,
    hash: u64,
}

/// A shared, immutable formula. Equality, ordering and hashing are
/// structural; the hash is computed once at construction.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

impl Formula {
    fn make(kind: Kind) -> Self {
        let mut h = FxHasher::default();
        std::mem::discriminant(&kind).hash(&mut h);
        match &kind {
            Kind::Atom(p) => p.hash(&mut h),
            Kind::Top | Kind::Bottom => {}
            Kind::Not(a) => a.0.hash.hash(&mut h),
            Kind::And(a, b) | Kind::Or(a, b) | Kind::Implies(a, b) | Kind::Iff(a, b) | Kind::Xor(a, b) => {
                a.0.hash.hash(&mut h);
                b.0.hash.hash(&mut h);
            }
            Kind::Explicit(i, a) | Kind::AtLeast(i, a) | Kind::AtMost(i, a) | Kind::Only(i, a) => {
                i.hash(&mut h);
                a.0.hash.hash(&mut h);
            }
            Kind::Expand(i, a, b) => {
                i.hash(&mut h);
                a.0.hash.hash(&mut h);
                b.0.hash.hash(&mut h);
            }
        }
        let hash = h.finish();
        Formula(Arc::new(Node { kind, hash }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn atom(name: impl Into<AtomId>) -> Self {
        Self::make(Kind::Atom(name.into()))
    }

    pub fn top() -> Self {
        Self::make(Kind::Top)
    }

    pub fn bottom() -> Self {
        Self::make(Kind::Bottom)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Self::make(Kind::Not(a))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Self::make(Kind::And(a, b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Self::make(Kind::Or(a, b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Self::make(Kind::Implies(a, b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Self::make(Kind::Iff(a, b))
    }

    pub fn xor(a: Formula, b: Formula) -> Self {
        Self::make(Kind::Xor(a, b))
    }

    pub fn explicit(i: Agent, a: Formula) -> Self {
        Self::make(Kind::Explicit(i, a))
    }

    pub fn at_least(i: Agent, a: Formula) -> Self {
        Self::make(Kind::AtLeast(i, a))
    }

    pub fn at_most(i: Agent, a: Formula) -> Self {
        Self::make(Kind::AtMost(i, a))
    }

    pub fn only(i: Agent, a: Formula) -> Self {
        Self::make(Kind::Only(i, a))
    }

    pub fn expand(i: Agent, info: Formula, body: Formula) -> Self {
        Self::make(Kind::Expand(i, info, body))
    }

    /// Left-nested conjunction; `Top` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items.into_iter().reduce(Formula::and).unwrap_or_else(Formula::top)
    }

    /// Left-nested disjunction; `Bottom` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items.into_iter().reduce(Formula::or).unwrap_or_else(Formula::bottom)
    }

    /// Left-nested exclusive or; `Bottom` when empty.
    pub fn xor_chain<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items.into_iter().reduce(Formula::xor).unwrap_or_else(Formula::bottom)
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self.kind() {
            Kind::Atom(_) | Kind::Top | Kind::Bottom => vec![],
            Kind::Not(a) | Kind::Explicit(_, a) | Kind::AtLeast(_, a) | Kind::AtMost(_, a) | Kind::Only(_, a) => {
                vec![a]
            }
            Kind::And(a, b)
            | Kind::Or(a, b)
            | Kind::Implies(a, b)
            | Kind::Iff(a, b)
            | Kind::Xor(a, b)
            | Kind::Expand(_, a, b) => vec![a, b],
        }
    }

    pub fn ptr_eq(&self, other: &Formula) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// True when the formula belongs to the explicit-belief language:
    /// no at-least, at-most, only or expansion operators anywhere.
    pub fn is_l0(&self) -> bool {
        match self.kind() {
            Kind::AtLeast(..) | Kind::AtMost(..) | Kind::Only(..) | Kind::Expand(..) => false,
            _ => self.children().into_iter().all(Formula::is_l0),
        }
    }

    /// True when no expansion operator occurs.
    pub fn is_static(&self) -> bool {
        match self.kind() {
            Kind::Expand(..) => false,
            _ => self.children().into_iter().all(Formula::is_static),
        }
    }

    /// Checks the grammar side conditions: bodies of explicit beliefs and
    /// expansion payloads must be explicit-belief formulas.
    pub fn is_well_formed(&self) -> bool {
        match self.kind() {
            Kind::Explicit(_, a) => a.is_l0(),
            Kind::Expand(_, a, b) => a.is_l0() && b.is_well_formed(),
            _ => self.children().into_iter().all(Formula::is_well_formed),
        }
    }

    /// Every atom occurring anywhere, including under explicit beliefs.
    pub fn atoms(&self) -> BTreeSet<AtomId> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<AtomId>) {
        if let Kind::Atom(p) = self.kind() {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    /// Every agent mentioned by a modality.
    pub fn agents(&self) -> BTreeSet<Agent> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f.kind() {
            Kind::Explicit(i, _)
            | Kind::AtLeast(i, _)
            | Kind::AtMost(i, _)
            | Kind::Only(i, _)
            | Kind::Expand(i, _, _) => {
                out.insert(*i);
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal of the syntax tree (shared subtrees are visited
    /// once per occurrence).
    pub fn visit<F: FnMut(&Formula)>(&self, f: &mut F) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// `~K i ~φ`.
    pub fn possible(i: Agent, a: Formula) -> Self {
        Formula::not(Formula::at_least(i, Formula::not(a)))
    }

    /// `~W i ~φ`.
    pub fn possible_most(i: Agent, a: Formula) -> Self {
        Formula::not(Formula::at_most(i, Formula::not(a)))
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.kind == other.0.kind)
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ordering::Equal
        } else {
            self.0.kind.cmp(&other.0.kind)
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// All syntactic subformulas, the formula itself included. Derived
/// connectives are kept as they are.
pub fn subformulas(phi: &Formula) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    fn go(f: &Formula, out: &mut BTreeSet<Formula>) {
        if out.insert(f.clone()) {
            for c in f.children() {
                go(c, out);
            }
        }
    }
    go(phi, &mut out);
    out
}

/// Nesting depth of at-least / at-most operators. Explicit belief costs
/// nothing; `O i φ` costs one; an expansion is measured on its rewritten
/// static form.
pub fn modal_depth(phi: &Formula) -> usize {
    match phi.kind() {
        Kind::Atom(_) | Kind::Top | Kind::Bottom | Kind::Explicit(..) => 0,
        Kind::Not(a) => modal_depth(a),
        Kind::And(a, b) | Kind::Or(a, b) | Kind::Implies(a, b) | Kind::Iff(a, b) | Kind::Xor(a, b) => {
            modal_depth(a).max(modal_depth(b))
        }
        Kind::AtLeast(_, a) | Kind::AtMost(_, a) | Kind::Only(_, a) => 1 + modal_depth(a),
        Kind::Expand(..) => modal_depth(&crate::dynamics::reduce_dynamics(phi)),
    }
}

/// Rewrites `O i φ` into `K i φ & W i ~φ`, everywhere.
pub fn expand_only(phi: &Formula) -> Formula {
    rewrite(phi, &mut FxHashMap::default(), &|f, kids| match f.kind() {
        Kind::Only(i, _) => {
            let body = kids[0].clone();
            Some(Formula::and(Formula::at_least(*i, body.clone()), Formula::at_most(*i, Formula::not(body))))
        }
        _ => None,
    })
}

/// Rewrites the derived connectives (`|`, `->`, `<->`, `^`, `false`) in
/// terms of `~` and `&`. `true` is kept as the one constant; `false`
/// becomes `~true`. Explicit-belief bodies are normalized too, so base
/// membership compares normal forms.
pub fn normalize(phi: &Formula) -> Formula {
    rewrite(phi, &mut FxHashMap::default(), &|f, kids| {
        let not = Formula::not;
        let and = Formula::and;
        Some(match f.kind() {
            Kind::Bottom => not(Formula::top()),
            Kind::Or(..) => not(and(not(kids[0].clone()), not(kids[1].clone()))),
            Kind::Implies(..) => not(and(kids[0].clone(), not(kids[1].clone()))),
            Kind::Iff(..) => {
                let (a, b) = (kids[0].clone(), kids[1].clone());
                and(not(and(a.clone(), not(b.clone()))), not(and(b, not(a))))
            }
            Kind::Xor(..) => {
                let (a, b) = (kids[0].clone(), kids[1].clone());
                and(not(and(a.clone(), b.clone())), not(and(not(a), not(b))))
            }
            _ => return None,
        })
    })
}

/// Generic bottom-up rewriter. `step` receives the node and its rewritten
/// children; returning `None` rebuilds the node unchanged around them.
/// Results are memoized per distinct subformula.
pub(crate) fn rewrite<F>(phi: &Formula, memo: &mut FxHashMap<Formula, Formula>, step: &F) -> Formula
where
    F: Fn(&Formula, &[Formula]) -> Option<Formula>,
{
    if let Some(r) = memo.get(phi) {
        return r.clone();
    }
    let kids: Vec<Formula> = phi.children().into_iter().map(|c| rewrite(c, memo, step)).collect();
    let out = match step(phi, &kids) {
        Some(f) => f,
        None => rebuild(phi, &kids),
    };
    memo.insert(phi.clone(), out.clone());
    out
}

/// Rebuilds `phi`'s top node over new children, reusing `phi` when they
/// are unchanged.
pub(crate) fn rebuild(phi: &Formula, kids: &[Formula]) -> Formula {
    if phi.children().iter().zip(kids).all(|(a, b)| a.ptr_eq(b)) {
        return phi.clone();
    }
    let k = |n: usize| kids[n].clone();
    match phi.kind() {
        Kind::Atom(_) | Kind::Top | Kind::Bottom => phi.clone(),
        Kind::Not(_) => Formula::not(k(0)),
        Kind::And(..) => Formula::and(k(0), k(1)),
        Kind::Or(..) => Formula::or(k(0), k(1)),
        Kind::Implies(..) => Formula::implies(k(0), k(1)),
        Kind::Iff(..) => Formula::iff(k(0), k(1)),
        Kind::Xor(..) => Formula::xor(k(0), k(1)),
        Kind::Explicit(i, _) => Formula::explicit(*i, k(0)),
        Kind::AtLeast(i, _) => Formula::at_least(*i, k(0)),
        Kind::AtMost(i, _) => Formula::at_most(*i, k(0)),
        Kind::Only(i, _) => Formula::only(*i, k(0)),
        Kind::Expand(i, ..) => Formula::expand(*i, k(0), k(1)),
    }
}

/// Replaces every `B i α` with `α` outside agent i's vocabulary by `false`.
///
/// The body of a surviving `B i α` is left alone: membership is syntactic,
/// so pruning inside `α` would turn a true explicit belief into a false one.
pub fn prune_to_vocabulary(phi: &Formula, vocab: &crate::semantics::VocabularyProfile) -> Formula {
    rewrite(phi, &mut FxHashMap::default(), &|f, _| match f.kind() {
        Kind::Explicit(i, body) if !vocab.contains(*i, body) => Some(Formula::bottom()),
        Kind::Explicit(..) => Some(f.clone()),
        _ => None,
    })
}

/// Ordered, duplicate-free set of agents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentSet {
    agents: Vec<Agent>,
}

impl AgentSet {
    /// Agents `1..=n`.
    pub fn numbered(n: u32) -> Self {
        AgentSet { agents: (1..=n).map(Agent).collect() }
    }

    /// Keeps the first occurrence of each agent.
    pub fn new<I: IntoIterator<Item = Agent>>(agents: I) -> Self {
        let mut seen = BTreeSet::new();
        AgentSet { agents: agents.into_iter().filter(|a| seen.insert(*a)).collect() }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn contains(&self, a: Agent) -> bool {
        self.agents.contains(&a)
    }

    pub fn iter(&self) -> impl Iterator<Item = Agent> + '_ {
        self.agents.iter().copied()
    }

    pub fn position(&self, a: Agent) -> Option<usize> {
        self.agents.iter().position(|b| *b == a)
    }

    pub fn as_slice(&self) -> &[Agent] {
        &self.agents
    }
}

/// Ordered, duplicate-free slice of the atoms relevant to an instance.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    atoms: Vec<AtomId>,
    index: FxHashMap<AtomId, usize>,
}

impl PartialEq for AtomTable {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Eq for AtomTable {}

impl AtomTable {
    pub fn new<I: IntoIterator<Item = AtomId>>(atoms: I) -> Self {
        let mut t = AtomTable::default();
        for a in atoms {
            t.insert(a);
        }
        t
    }

    /// Appends the atom unless already present; returns its position.
    pub fn insert(&mut self, a: AtomId) -> usize {
        if let Some(&i) = self.index.get(&a) {
            return i;
        }
        let i = self.atoms.len();
        self.index.insert(a.clone(), i);
        self.atoms.push(a);
        i
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn position(&self, a: &AtomId) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn contains(&self, a: &AtomId) -> bool {
        self.index.contains_key(a)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AtomId> + '_ {
        self.atoms.iter()
    }

    pub fn as_slice(&self) -> &[AtomId] {
        &self.atoms
    }
}
