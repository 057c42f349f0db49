//! The symbolic pipeline: rewrite expansions and `O`, translate level by
//! level into BDDs with eager quantification, and read off the verdict at
//! the actual state.
//!
//! Level 0 is never put in the BDD. Restricting `X_0` to the descriptor of
//! the actual state up front turns every level-0 relation into the
//! conjunction of the actual base, so the quantified blocks start at `X_1`.
//! This also covers actual states outside the context.

use std::fmt;
use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::bdd::{BddError, BddStore, NodeRef, StoreLimits};
use crate::dynamics::reduce_dynamics;
use crate::formula::{expand_only, modal_depth, Agent, Formula, Kind};
use crate::instance::ProblemInstance;
use crate::metrics;
use crate::qbf::VarOrder;
use crate::semantics::{self, CheckError, State, DEFAULT_ENUMERATION_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("atom `{0}` is not in the instance's atom table")]
    UnknownAtom(String),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Bdd(BddError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "TRUE")]
    True,
    #[serde(rename = "FALSE")]
    False,
    /// Resource budget exhausted.
    #[serde(rename = "KO")]
    Ko,
}

impl From<bool> for Verdict {
    fn from(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "TRUE",
            Verdict::False => "FALSE",
            Verdict::Ko => "KO",
        })
    }
}

/// Budget for one symbolic check.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_nodes: usize,
    pub timeout: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_nodes: 50_000_000, timeout: Duration::from_secs(600) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub atom_count: usize,
    pub ratoms: usize,
    pub state_exponent: usize,
    pub peak_nodes: usize,
    pub wall_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub verdict: Verdict,
    /// Why the check gave up, for `KO`.
    pub reason: Option<String>,
    pub stats: Stats,
}

fn size_stats(inst: &ProblemInstance) -> Stats {
    Stats {
        atom_count: inst.atoms.len(),
        ratoms: metrics::ratoms(&inst.vocab, &inst.query),
        state_exponent: metrics::state_count_exponent(&inst.vocab, &inst.query, &inst.atoms, &inst.agents),
        ..Stats::default()
    }
}

/// Decides `(S0, S_Γ) ⊨ φ0` symbolically. Expansions are removed by the
/// reduction axioms first. Running out of budget yields [`Verdict::Ko`].
pub fn check_symbolic(inst: &ProblemInstance, limits: &Limits) -> Result<Outcome, SymbolicError> {
    let started = Instant::now();
    let mut stats = size_stats(inst);
    let norm = inst.normalized();
    let phi = reduce_dynamics(&norm.query);
    let (result, peak) = run(&norm, &norm.initial_state, &phi, limits, started);
    stats.peak_nodes = peak;
    stats.wall_ms = started.elapsed().as_millis();
    finish(result, stats)
}

fn finish(result: Result<bool, SymbolicError>, stats: Stats) -> Result<Outcome, SymbolicError> {
    match result {
        Ok(b) => Ok(Outcome { verdict: b.into(), reason: None, stats }),
        Err(SymbolicError::Bdd(e)) if e.is_resource() => {
            Ok(Outcome { verdict: Verdict::Ko, reason: Some(e.to_string()), stats })
        }
        Err(e) => Err(e),
    }
}

/// Decides a query that may contain expansions by executing them.
///
/// Within the enumeration cap the explicit-state checker runs directly.
/// Otherwise an outermost chain `[+i α][+j β]... ψ` is applied to the
/// actual state and the static remainder `ψ` goes to the symbolic engine;
/// expansions nested deeper are refused.
pub fn check_dynamic_direct(inst: &ProblemInstance, limits: &Limits) -> Result<Outcome, SymbolicError> {
    let started = Instant::now();
    let mut stats = size_stats(inst);
    let norm = inst.normalized();
    let ctx = norm.context().covering(&norm.initial_state, &norm.query);
    if ctx.bits() <= DEFAULT_ENUMERATION_CAP {
        let v = semantics::check_direct(&norm.initial_state, &ctx, &norm.query)?;
        stats.wall_ms = started.elapsed().as_millis();
        return Ok(Outcome { verdict: v.into(), reason: None, stats });
    }
    let mut state = norm.initial_state.clone();
    let mut phi = norm.query.clone();
    while let Kind::Expand(i, alpha, body) = phi.kind() {
        state = semantics::expand_state(&state, *i, alpha)?;
        phi = body.clone();
    }
    if !phi.is_static() {
        return Err(CheckError::InnerDynamics(phi.to_string()).into());
    }
    let (result, peak) = run(&norm, &state, &phi, limits, started);
    stats.peak_nodes = peak;
    stats.wall_ms = started.elapsed().as_millis();
    finish(result, stats)
}

/// Symbolic evaluation of a static `phi` at an arbitrary `state` over the
/// context of `inst`, which must already be normalized.
fn run(
    inst: &ProblemInstance,
    state: &State,
    phi: &Formula,
    limits: &Limits,
    started: Instant,
) -> (Result<bool, SymbolicError>, usize) {
    let phi = expand_only(phi);
    let levels = modal_depth(&phi) as u32 + 1;
    let order = VarOrder::new(&inst.atoms, &inst.vocab, levels);
    let remaining = limits.timeout.saturating_sub(started.elapsed());
    let store =
        BddStore::with_limits(order.len(), StoreLimits { max_nodes: limits.max_nodes, timeout: Some(remaining) });
    let mut c = Compiler { inst, order, store, tr: FxHashMap::default(), rel: FxHashMap::default() };
    let r = c.eval0(state, &phi);
    (r, c.store.node_count())
}

struct Compiler<'a> {
    inst: &'a ProblemInstance,
    order: VarOrder,
    store: BddStore,
    tr: FxHashMap<(Formula, u32), NodeRef>,
    rel: FxHashMap<(Agent, u32), NodeRef>,
}

impl Compiler<'_> {
    fn bdd<T>(r: Result<T, BddError>) -> Result<T, SymbolicError> {
        r.map_err(SymbolicError::Bdd)
    }

    /// Truth at the actual state: level 0 evaluated concretely.
    fn eval0(&mut self, s: &State, phi: &Formula) -> Result<bool, SymbolicError> {
        Ok(match phi.kind() {
            Kind::Atom(p) => s.holds(p),
            Kind::Top => true,
            Kind::Bottom => false,
            Kind::Explicit(i, a) => s.believes(*i, a),
            Kind::Not(a) => !self.eval0(s, a)?,
            Kind::And(a, b) => self.eval0(s, a)? && self.eval0(s, b)?,
            Kind::Or(a, b) => self.eval0(s, a)? || self.eval0(s, b)?,
            Kind::Implies(a, b) => !self.eval0(s, a)? || self.eval0(s, b)?,
            Kind::Iff(a, b) => self.eval0(s, a)? == self.eval0(s, b)?,
            Kind::Xor(a, b) => self.eval0(s, a)? != self.eval0(s, b)?,
            Kind::AtLeast(i, body) | Kind::AtMost(i, body) => {
                let mut rel = self.store.constant(true);
                let base: Vec<Formula> = s.base(*i).cloned().collect();
                for a in &base {
                    let t = self.tr(a, 1)?;
                    rel = Self::bdd(self.store.and(rel, t))?;
                }
                if matches!(phi.kind(), Kind::AtMost(..)) {
                    rel = Self::bdd(self.store.not(rel))?;
                }
                let b = self.tr(body, 1)?;
                let nb = Self::bdd(self.store.not(b))?;
                let xs = self.order.level_positions(1);
                let witness = Self::bdd(self.store.and_exists(&xs, rel, nb))?;
                self.store.is_const(witness) == Some(false)
            }
            Kind::Only(..) | Kind::Expand(..) => unreachable!("eliminated before evaluation"),
        })
    }

    fn var(&mut self, v: &crate::qbf::LeveledVar) -> Result<NodeRef, SymbolicError> {
        let p = self.order.position(v).ok_or_else(|| match &v.kind {
            crate::qbf::VarKind::Prop(a) => SymbolicError::UnknownAtom(a.to_string()),
            crate::qbf::VarKind::Belief(..) => unreachable!("belief slots come from the vocabulary"),
        })?;
        Self::bdd(self.store.var(p))
    }

    /// `tr_k(φ)` as a BDD over `X_k ∪ X_{k+1} ∪ ...`, for `k ≥ 1`.
    fn tr(&mut self, phi: &Formula, k: u32) -> Result<NodeRef, SymbolicError> {
        if let Some(&n) = self.tr.get(&(phi.clone(), k)) {
            return Ok(n);
        }
        let n = match phi.kind() {
            Kind::Atom(p) => self.var(&crate::qbf::LeveledVar::prop(p.clone(), k))?,
            Kind::Top => self.store.constant(true),
            Kind::Bottom => self.store.constant(false),
            Kind::Explicit(i, a) => {
                if self.inst.vocab.contains(*i, a) {
                    self.var(&crate::qbf::LeveledVar::belief(*i, a.clone(), k))?
                } else {
                    self.store.constant(false)
                }
            }
            Kind::Not(a) => {
                let a = self.tr(a, k)?;
                Self::bdd(self.store.not(a))?
            }
            Kind::And(a, b) | Kind::Or(a, b) | Kind::Implies(a, b) | Kind::Iff(a, b) | Kind::Xor(a, b) => {
                let (x, y) = (self.tr(a, k)?, self.tr(b, k)?);
                let op = match phi.kind() {
                    Kind::And(..) => crate::bdd::BinOp::And,
                    Kind::Or(..) => crate::bdd::BinOp::Or,
                    Kind::Implies(..) => crate::bdd::BinOp::Implies,
                    Kind::Iff(..) => crate::bdd::BinOp::Iff,
                    _ => crate::bdd::BinOp::Xor,
                };
                Self::bdd(self.store.apply(op, x, y))?
            }
            Kind::AtLeast(i, body) | Kind::AtMost(i, body) => {
                let mut rel = self.relation(*i, k)?;
                if matches!(phi.kind(), Kind::AtMost(..)) {
                    rel = Self::bdd(self.store.not(rel))?;
                }
                let b = self.tr(body, k + 1)?;
                let nb = Self::bdd(self.store.not(b))?;
                let xs = self.order.level_positions(k + 1);
                let witness = Self::bdd(self.store.and_exists(&xs, rel, nb))?;
                Self::bdd(self.store.not(witness))?
            }
            Kind::Only(..) | Kind::Expand(..) => unreachable!("eliminated before evaluation"),
        };
        self.tr.insert((phi.clone(), k), n);
        Ok(n)
    }

    /// `R_{i,k}`.
    fn relation(&mut self, i: Agent, k: u32) -> Result<NodeRef, SymbolicError> {
        if let Some(&n) = self.rel.get(&(i, k)) {
            return Ok(n);
        }
        let mut r = self.store.constant(true);
        let gamma: Vec<Formula> = self.inst.vocab.gamma(i).to_vec();
        for a in &gamma {
            let x = self.var(&crate::qbf::LeveledVar::belief(i, a.clone(), k))?;
            let t = self.tr(a, k + 1)?;
            let imp = Self::bdd(self.store.implies(x, t))?;
            r = Self::bdd(self.store.and(r, imp))?;
        }
        self.rel.insert((i, k), r);
        Ok(r)
    }
}
