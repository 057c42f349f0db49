//! Leveled quantified Boolean formulas and the translation into them.
//!
//! A state at modal nesting depth `k` is encoded by the variables `X_k`:
//! one `x_{p,k}` per atom and one `x_{B i α,k}` per vocabulary slot.
//! `K i φ` at level `k` becomes `∀X_{k+1}(R_{i,k} → tr_{k+1} φ)`, where
//! `R_{i,k}` says that the level-`k+1` state satisfies everything agent
//! `i` believes at level `k`.

pub mod qdimacs;

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::bdd::{BddError, BddStore, NodeRef, StoreLimits};
use crate::formula::{expand_only, modal_depth, Agent, AtomId, AtomTable, Formula, Kind};
use crate::instance::ProblemInstance;
use crate::semantics::{State, VocabularyProfile};

pub use qdimacs::{evaluate_qdimacs, export_qdimacs, QdimacsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QbfError {
    #[error("translation applies to formulas without O and expansions; found `{0}`")]
    Contract(String),
    #[error("atom `{0}` is not in the instance's atom table")]
    UnknownAtom(String),
    #[error("variable {0} is not in the variable order")]
    UnknownVariable(String),
    #[error("base of agent {agent} contains `{formula}`, which is outside its vocabulary")]
    BaseOutsideVocabulary { agent: u32, formula: String },
    #[error(transparent)]
    Bdd(#[from] BddError),
}

/// What a leveled variable stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    /// Truth of an atom.
    Prop(AtomId),
    /// Membership of `α` in agent `i`'s base.
    Belief(Agent, Formula),
}

/// `x_{p,k}` or `x_{B i α,k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeveledVar {
    pub kind: VarKind,
    pub level: u32,
}

impl LeveledVar {
    pub fn prop(p: AtomId, level: u32) -> Self {
        LeveledVar { kind: VarKind::Prop(p), level }
    }

    pub fn belief(i: Agent, alpha: Formula, level: u32) -> Self {
        LeveledVar { kind: VarKind::Belief(i, alpha), level }
    }
}

impl fmt::Display for LeveledVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            VarKind::Prop(p) => write!(f, "{p}@{}", self.level),
            VarKind::Belief(i, a) => write!(f, "{}@{}", Formula::explicit(*i, a.clone()), self.level),
        }
    }
}

pub type Qbf = Arc<QbfFormula>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QbfFormula {
    Const(bool),
    Var(LeveledVar),
    Not(Qbf),
    And(Qbf, Qbf),
    Or(Qbf, Qbf),
    Implies(Qbf, Qbf),
    ForAll(Arc<[LeveledVar]>, Qbf),
    Exists(Arc<[LeveledVar]>, Qbf),
}

impl QbfFormula {
    pub fn constant(b: bool) -> Qbf {
        Arc::new(QbfFormula::Const(b))
    }

    pub fn var(v: LeveledVar) -> Qbf {
        Arc::new(QbfFormula::Var(v))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Qbf) -> Qbf {
        Arc::new(QbfFormula::Not(a))
    }

    pub fn and(a: Qbf, b: Qbf) -> Qbf {
        Arc::new(QbfFormula::And(a, b))
    }

    pub fn or(a: Qbf, b: Qbf) -> Qbf {
        Arc::new(QbfFormula::Or(a, b))
    }

    pub fn implies(a: Qbf, b: Qbf) -> Qbf {
        Arc::new(QbfFormula::Implies(a, b))
    }

    pub fn forall(vars: Arc<[LeveledVar]>, body: Qbf) -> Qbf {
        Arc::new(QbfFormula::ForAll(vars, body))
    }

    pub fn exists(vars: Arc<[LeveledVar]>, body: Qbf) -> Qbf {
        Arc::new(QbfFormula::Exists(vars, body))
    }

    /// Left-nested conjunction; `Const(true)` when empty.
    pub fn conj<I: IntoIterator<Item = Qbf>>(items: I) -> Qbf {
        items.into_iter().reduce(QbfFormula::and).unwrap_or_else(|| QbfFormula::constant(true))
    }

    /// Every variable occurrence, bound or free, without duplicates.
    pub fn vars(&self) -> Vec<LeveledVar> {
        let mut seen = rustc_hash::FxHashSet::default();
        let mut out = Vec::new();
        let mut visited = rustc_hash::FxHashSet::default();
        fn go(
            q: &QbfFormula,
            seen: &mut rustc_hash::FxHashSet<LeveledVar>,
            out: &mut Vec<LeveledVar>,
            visited: &mut rustc_hash::FxHashSet<*const QbfFormula>,
        ) {
            if !visited.insert(q as *const _) {
                return;
            }
            match q {
                QbfFormula::Const(_) => {}
                QbfFormula::Var(v) => {
                    if seen.insert(v.clone()) {
                        out.push(v.clone());
                    }
                }
                QbfFormula::Not(a) => go(a, seen, out, visited),
                QbfFormula::And(a, b) | QbfFormula::Or(a, b) | QbfFormula::Implies(a, b) => {
                    go(a, seen, out, visited);
                    go(b, seen, out, visited);
                }
                QbfFormula::ForAll(_, a) | QbfFormula::Exists(_, a) => go(a, seen, out, visited),
            }
        }
        go(self, &mut seen, &mut out, &mut visited);
        out
    }

    /// Variables with an occurrence outside every binder for them.
    pub fn free_vars(&self) -> Vec<LeveledVar> {
        let mut out = Vec::new();
        let mut seen = rustc_hash::FxHashSet::default();
        fn go(
            q: &QbfFormula,
            bound: &mut Vec<LeveledVar>,
            seen: &mut rustc_hash::FxHashSet<LeveledVar>,
            out: &mut Vec<LeveledVar>,
        ) {
            match q {
                QbfFormula::Const(_) => {}
                QbfFormula::Var(v) => {
                    if !bound.contains(v) && seen.insert(v.clone()) {
                        out.push(v.clone());
                    }
                }
                QbfFormula::Not(a) => go(a, bound, seen, out),
                QbfFormula::And(a, b) | QbfFormula::Or(a, b) | QbfFormula::Implies(a, b) => {
                    go(a, bound, seen, out);
                    go(b, bound, seen, out);
                }
                QbfFormula::ForAll(vs, a) | QbfFormula::Exists(vs, a) => {
                    let n = bound.len();
                    bound.extend(vs.iter().cloned());
                    go(a, bound, seen, out);
                    bound.truncate(n);
                }
            }
        }
        go(self, &mut Vec::new(), &mut seen, &mut out);
        out
    }

    /// Truth by exhaustive expansion of quantifiers. Exponential in the
    /// number of bound variables; meant for small sentences.
    pub fn evaluate_naive(&self, env: &mut FxHashMap<LeveledVar, bool>) -> Result<bool, QbfError> {
        Ok(match self {
            QbfFormula::Const(b) => *b,
            QbfFormula::Var(v) => *env.get(v).ok_or_else(|| QbfError::UnknownVariable(v.to_string()))?,
            QbfFormula::Not(a) => !a.evaluate_naive(env)?,
            QbfFormula::And(a, b) => a.evaluate_naive(env)? && b.evaluate_naive(env)?,
            QbfFormula::Or(a, b) => a.evaluate_naive(env)? || b.evaluate_naive(env)?,
            QbfFormula::Implies(a, b) => !a.evaluate_naive(env)? || b.evaluate_naive(env)?,
            QbfFormula::ForAll(vs, a) => quantify_naive(vs, a, env, true)?,
            QbfFormula::Exists(vs, a) => quantify_naive(vs, a, env, false)?,
        })
    }
}

fn quantify_naive(
    vs: &[LeveledVar],
    body: &QbfFormula,
    env: &mut FxHashMap<LeveledVar, bool>,
    universal: bool,
) -> Result<bool, QbfError> {
    let saved: Vec<Option<bool>> = vs.iter().map(|v| env.get(v).copied()).collect();
    let mut result = universal;
    for code in 0u64..(1u64 << vs.len()) {
        for (b, v) in vs.iter().enumerate() {
            env.insert(v.clone(), code >> b & 1 == 1);
        }
        let r = body.evaluate_naive(env)?;
        if r != universal {
            result = r;
            break;
        }
    }
    for (v, old) in vs.iter().zip(saved) {
        match old {
            Some(b) => env.insert(v.clone(), b),
            None => env.remove(v),
        };
    }
    Ok(result)
}

/// The fixed leveled variable order: level by level, and within a level
/// atoms first, then vocabulary slots agent by agent.
#[derive(Clone, Debug)]
pub struct VarOrder {
    atoms: AtomTable,
    vocab: VocabularyProfile,
    offsets: FxHashMap<Agent, u32>,
    width: u32,
    levels: u32,
}

impl VarOrder {
    pub fn new(atoms: &AtomTable, vocab: &VocabularyProfile, levels: u32) -> Self {
        let mut offsets = FxHashMap::default();
        let mut w = atoms.len() as u32;
        for i in vocab.agents() {
            offsets.insert(i, w);
            w += vocab.gamma(i).len() as u32;
        }
        VarOrder { atoms: atoms.clone(), vocab: vocab.clone(), offsets, width: w, levels }
    }

    /// Variables per level, `|X_k|`.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn len(&self) -> u32 {
        self.width * self.levels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, v: &LeveledVar) -> Option<u32> {
        if v.level >= self.levels {
            return None;
        }
        let slot = match &v.kind {
            VarKind::Prop(p) => self.atoms.position(p)? as u32,
            VarKind::Belief(i, a) => self.offsets.get(i)? + self.vocab.index_of(*i, a)? as u32,
        };
        Some(v.level * self.width + slot)
    }

    pub fn var_at(&self, pos: u32) -> Option<LeveledVar> {
        if pos >= self.len() {
            return None;
        }
        let (level, mut slot) = (pos / self.width, pos % self.width);
        if (slot as usize) < self.atoms.len() {
            return Some(LeveledVar::prop(self.atoms.as_slice()[slot as usize].clone(), level));
        }
        slot -= self.atoms.len() as u32;
        for i in self.vocab.agents() {
            let g = self.vocab.gamma(i);
            if (slot as usize) < g.len() {
                return Some(LeveledVar::belief(i, g[slot as usize].clone(), level));
            }
            slot -= g.len() as u32;
        }
        None
    }

    /// Positions of `X_k`.
    pub fn level_positions(&self, k: u32) -> Vec<u32> {
        (k * self.width..(k + 1) * self.width).collect()
    }

    /// `X_k` in order.
    pub fn level_vars(&self, k: u32) -> Vec<LeveledVar> {
        self.level_positions(k).into_iter().filter_map(|p| self.var_at(p)).collect()
    }
}

/// Memoizing implementation of `tr_k`, `R_{i,k}` and `desc`.
pub struct Translator<'a> {
    atoms: &'a AtomTable,
    vocab: &'a VocabularyProfile,
    order: VarOrder,
    tr_cache: RefCell<FxHashMap<(Formula, u32), Qbf>>,
    rel_cache: RefCell<FxHashMap<(Agent, u32), Qbf>>,
    level_cache: RefCell<FxHashMap<u32, Arc<[LeveledVar]>>>,
}

impl<'a> Translator<'a> {
    pub fn new(atoms: &'a AtomTable, vocab: &'a VocabularyProfile) -> Self {
        Translator {
            atoms,
            vocab,
            order: VarOrder::new(atoms, vocab, 1),
            tr_cache: RefCell::default(),
            rel_cache: RefCell::default(),
            level_cache: RefCell::default(),
        }
    }

    pub fn for_instance(inst: &'a ProblemInstance) -> Self {
        Self::new(&inst.atoms, &inst.vocab)
    }

    /// `X_k`.
    pub fn level(&self, k: u32) -> Arc<[LeveledVar]> {
        self.level_cache
            .borrow_mut()
            .entry(k)
            .or_insert_with(|| {
                let order = VarOrder { levels: k + 1, ..self.order.clone() };
                order.level_vars(k).into()
            })
            .clone()
    }

    /// `tr_k(φ)` for a formula without `O` and expansions.
    pub fn translate(&self, phi: &Formula, k: u32) -> Result<Qbf, QbfError> {
        if let Some(q) = self.tr_cache.borrow().get(&(phi.clone(), k)) {
            return Ok(q.clone());
        }
        let q = match phi.kind() {
            Kind::Atom(p) => {
                if !self.atoms.contains(p) {
                    return Err(QbfError::UnknownAtom(p.to_string()));
                }
                QbfFormula::var(LeveledVar::prop(p.clone(), k))
            }
            Kind::Top => QbfFormula::constant(true),
            Kind::Bottom => QbfFormula::constant(false),
            Kind::Not(a) => QbfFormula::not(self.translate(a, k)?),
            Kind::And(a, b) => QbfFormula::and(self.translate(a, k)?, self.translate(b, k)?),
            Kind::Or(a, b) => QbfFormula::or(self.translate(a, k)?, self.translate(b, k)?),
            Kind::Implies(a, b) => QbfFormula::implies(self.translate(a, k)?, self.translate(b, k)?),
            Kind::Iff(a, b) => {
                let (x, y) = (self.translate(a, k)?, self.translate(b, k)?);
                QbfFormula::and(QbfFormula::implies(x.clone(), y.clone()), QbfFormula::implies(y, x))
            }
            Kind::Xor(a, b) => {
                let (x, y) = (self.translate(a, k)?, self.translate(b, k)?);
                QbfFormula::not(QbfFormula::and(QbfFormula::implies(x.clone(), y.clone()), QbfFormula::implies(y, x)))
            }
            Kind::Explicit(i, a) => {
                if self.vocab.contains(*i, a) {
                    QbfFormula::var(LeveledVar::belief(*i, a.clone(), k))
                } else {
                    QbfFormula::constant(false)
                }
            }
            Kind::AtLeast(i, a) => QbfFormula::forall(
                self.level(k + 1),
                QbfFormula::implies(self.relation_formula(*i, k)?, self.translate(a, k + 1)?),
            ),
            Kind::AtMost(i, a) => QbfFormula::forall(
                self.level(k + 1),
                QbfFormula::implies(QbfFormula::not(self.relation_formula(*i, k)?), self.translate(a, k + 1)?),
            ),
            Kind::Only(..) | Kind::Expand(..) => return Err(QbfError::Contract(phi.to_string())),
        };
        self.tr_cache.borrow_mut().insert((phi.clone(), k), q.clone());
        Ok(q)
    }

    /// `R_{i,k} = ⋀_{α∈Γ_i} (x_{B i α,k} → tr_{k+1}(α))`.
    pub fn relation_formula(&self, i: Agent, k: u32) -> Result<Qbf, QbfError> {
        if let Some(q) = self.rel_cache.borrow().get(&(i, k)) {
            return Ok(q.clone());
        }
        let parts = self
            .vocab
            .gamma(i)
            .iter()
            .map(|a| {
                Ok(QbfFormula::implies(QbfFormula::var(LeveledVar::belief(i, a.clone(), k)), self.translate(a, k + 1)?))
            })
            .collect::<Result<Vec<_>, QbfError>>()?;
        let q = QbfFormula::conj(parts);
        self.rel_cache.borrow_mut().insert((i, k), q.clone());
        Ok(q)
    }

    /// The minterm over `X_0` that pins down `S0`: vocabulary slots first,
    /// then atoms.
    pub fn describe_state(&self, s0: &State) -> Result<Qbf, QbfError> {
        for (i, base) in s0.bases() {
            for a in base {
                if !self.vocab.contains(i, a) {
                    return Err(QbfError::BaseOutsideVocabulary { agent: i.0, formula: a.to_string() });
                }
            }
        }
        let mut lits = Vec::new();
        for i in self.vocab.agents() {
            for a in self.vocab.gamma(i) {
                let x = QbfFormula::var(LeveledVar::belief(i, a.clone(), 0));
                lits.push(if s0.believes(i, a) { x } else { QbfFormula::not(x) });
            }
        }
        for p in self.atoms.iter() {
            let x = QbfFormula::var(LeveledVar::prop(p.clone(), 0));
            lits.push(if s0.holds(p) { x } else { QbfFormula::not(x) });
        }
        Ok(QbfFormula::conj(lits))
    }

    /// `∃X_0 (desc_{S0}(X_0) ∧ tr_0(φ0))`, true iff `(S0, S_Γ) ⊨ φ0`.
    pub fn closed_sentence(&self, s0: &State, phi0: &Formula) -> Result<Qbf, QbfError> {
        let body = QbfFormula::and(self.describe_state(s0)?, self.translate(phi0, 0)?);
        Ok(QbfFormula::exists(self.level(0), body))
    }
}

/// The closed sentence for an instance, with `O` expanded. The instance is
/// taken as given; normalize it first if base membership should ignore
/// derived connectives.
pub fn closed_sentence(inst: &ProblemInstance) -> Result<Qbf, QbfError> {
    let tr = Translator::for_instance(inst);
    tr.closed_sentence(&inst.initial_state, &expand_only(&inst.query))
}

/// Builds the BDD of a QBF bottom-up. Quantifiers are eliminated as soon as
/// their body is built; `∀X(a → b)` goes through a fused and-exists.
pub fn build(q: &Qbf, store: &mut BddStore, order: &VarOrder) -> Result<NodeRef, QbfError> {
    let mut memo: FxHashMap<*const QbfFormula, NodeRef> = FxHashMap::default();
    build_rec(q, store, order, &mut memo)
}

fn positions(vs: &[LeveledVar], order: &VarOrder) -> Result<Vec<u32>, QbfError> {
    vs.iter().map(|v| order.position(v).ok_or_else(|| QbfError::UnknownVariable(v.to_string()))).collect()
}

fn build_rec(
    q: &Qbf,
    store: &mut BddStore,
    order: &VarOrder,
    memo: &mut FxHashMap<*const QbfFormula, NodeRef>,
) -> Result<NodeRef, QbfError> {
    let key = Arc::as_ptr(q);
    if let Some(&n) = memo.get(&key) {
        return Ok(n);
    }
    let n = match &**q {
        QbfFormula::Const(b) => store.constant(*b),
        QbfFormula::Var(v) => {
            let p = order.position(v).ok_or_else(|| QbfError::UnknownVariable(v.to_string()))?;
            store.var(p)?
        }
        QbfFormula::Not(a) => {
            let a = build_rec(a, store, order, memo)?;
            store.not(a)?
        }
        QbfFormula::And(a, b) => {
            let a = build_rec(a, store, order, memo)?;
            let b = build_rec(b, store, order, memo)?;
            store.and(a, b)?
        }
        QbfFormula::Or(a, b) => {
            let a = build_rec(a, store, order, memo)?;
            let b = build_rec(b, store, order, memo)?;
            store.or(a, b)?
        }
        QbfFormula::Implies(a, b) => {
            let a = build_rec(a, store, order, memo)?;
            let b = build_rec(b, store, order, memo)?;
            store.implies(a, b)?
        }
        QbfFormula::ForAll(vs, body) => {
            let ps = positions(vs, order)?;
            if let QbfFormula::Implies(a, b) = &**body {
                let a = build_rec(a, store, order, memo)?;
                let b = build_rec(b, store, order, memo)?;
                let nb = store.not(b)?;
                let witness = store.and_exists(&ps, a, nb)?;
                store.not(witness)?
            } else {
                let b = build_rec(body, store, order, memo)?;
                store.forall(&ps, b)?
            }
        }
        QbfFormula::Exists(vs, body) => {
            let ps = positions(vs, order)?;
            if let QbfFormula::And(a, b) = &**body {
                let a = build_rec(a, store, order, memo)?;
                let b = build_rec(b, store, order, memo)?;
                store.and_exists(&ps, a, b)?
            } else {
                let b = build_rec(body, store, order, memo)?;
                store.exists(&ps, b)?
            }
        }
    };
    memo.insert(key, n);
    Ok(n)
}

/// Decides an instance by building its whole closed sentence, level 0
/// included. Slower than [`crate::symbolic::check_symbolic`], which pins
/// level 0 to the actual state first; kept as an independent route.
pub fn check_sentence(inst: &ProblemInstance, limits: StoreLimits) -> Result<bool, QbfError> {
    let phi = expand_only(&inst.query);
    let levels = modal_depth(&phi) as u32 + 1;
    let order = VarOrder::new(&inst.atoms, &inst.vocab, levels);
    let tr = Translator::for_instance(inst);
    let sentence = tr.closed_sentence(&inst.initial_state, &phi)?;
    let mut store = BddStore::with_limits(order.len(), limits);
    let n = build(&sentence, &mut store, &order)?;
    store.is_const(n).ok_or_else(|| QbfError::Contract("sentence is not closed".into()))
}
