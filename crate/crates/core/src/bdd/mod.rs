//! A reduced ordered BDD kernel: hash-consed nodes, memoized apply,
//! negation, block quantification and a fused and-exists.
//!
//! Variables are positions `0..num_vars`; smaller positions sit closer to
//! the root. There are no complement edges and no garbage collection, so the
//! node count only grows and doubles as the peak.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU32, Ordering};
use std::time::{Duration, Instant};

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BddError {
    #[error("node reference belongs to another store")]
    StoreMismatch,
    #[error("node budget of {limit} exhausted")]
    NodeLimit { limit: usize },
    #[error("time budget of {:.1}s exhausted", .limit.as_secs_f64())]
    Timeout { limit: Duration },
    #[error("variable {var} is outside the store's {count} variables")]
    VarOutOfRange { var: u32, count: u32 },
    #[error("assignment leaves variable {0} undefined")]
    MissingVariable(u32),
}

impl BddError {
    /// Budget exhaustion, as opposed to a misuse of the API.
    pub fn is_resource(&self) -> bool {
        matches!(self, BddError::NodeLimit { .. } | BddError::Timeout { .. })
    }
}

/// A node handle, meaningful only in the store that made it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    store: u32,
    idx: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Xor,
    Iff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    ForAll,
    Exists,
}

const FALSE: u32 = 0;
const TRUE: u32 = 1;
const TERMINAL_VAR: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Node {
    var: u32,
    lo: u32,
    hi: u32,
}

struct VarSet {
    member: FxHashSet<u32>,
    max: u32,
}

/// Resource limits for one store.
#[derive(Clone, Copy, Debug)]
pub struct StoreLimits {
    pub max_nodes: usize,
    pub timeout: Option<Duration>,
}

impl Default for StoreLimits {
    fn default() -> Self {
        StoreLimits { max_nodes: 50_000_000, timeout: None }
    }
}

static NEXT_STORE: AtomicU32 = AtomicU32::new(1);

pub struct BddStore {
    id: u32,
    num_vars: u32,
    nodes: Vec<Node>,
    unique: FxHashMap<(u32, u32, u32), u32>,
    apply_cache: FxHashMap<(BinOp, u32, u32), u32>,
    not_cache: FxHashMap<u32, u32>,
    quant_cache: FxHashMap<(Quantifier, u32, u32), u32>,
    relprod_cache: FxHashMap<(u32, u32, u32), u32>,
    sets: Vec<VarSet>,
    set_ids: FxHashMap<Vec<u32>, u32>,
    limits: StoreLimits,
    started: Instant,
    ticks: u32,
}

impl BddStore {
    pub fn new(num_vars: u32) -> Self {
        Self::with_limits(num_vars, StoreLimits::default())
    }

    pub fn with_limits(num_vars: u32, limits: StoreLimits) -> Self {
        let terminal = Node { var: TERMINAL_VAR, lo: 0, hi: 0 };
        BddStore {
            id: NEXT_STORE.fetch_add(1, Ordering::Relaxed),
            num_vars,
            nodes: vec![terminal, terminal],
            unique: FxHashMap::default(),
            apply_cache: FxHashMap::default(),
            not_cache: FxHashMap::default(),
            quant_cache: FxHashMap::default(),
            relprod_cache: FxHashMap::default(),
            sets: Vec::new(),
            set_ids: FxHashMap::default(),
            limits,
            started: Instant::now(),
            ticks: 0,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Nodes allocated so far, terminals included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn clear_caches(&mut self) {
        self.apply_cache.clear();
        self.not_cache.clear();
        self.quant_cache.clear();
        self.relprod_cache.clear();
    }

    fn wrap(&self, idx: u32) -> NodeRef {
        NodeRef { store: self.id, idx }
    }

    fn open(&self, a: NodeRef) -> Result<u32, BddError> {
        if a.store == self.id {
            Ok(a.idx)
        } else {
            Err(BddError::StoreMismatch)
        }
    }

    pub fn constant(&self, value: bool) -> NodeRef {
        self.wrap(if value { TRUE } else { FALSE })
    }

    pub fn is_const(&self, a: NodeRef) -> Option<bool> {
        match a.idx {
            FALSE if a.store == self.id => Some(false),
            TRUE if a.store == self.id => Some(true),
            _ => None,
        }
    }

    /// The function that is true iff variable `v` is.
    pub fn var(&mut self, v: u32) -> Result<NodeRef, BddError> {
        self.check_var(v)?;
        let n = self.mk(v, FALSE, TRUE)?;
        Ok(self.wrap(n))
    }

    pub fn nvar(&mut self, v: u32) -> Result<NodeRef, BddError> {
        self.check_var(v)?;
        let n = self.mk(v, TRUE, FALSE)?;
        Ok(self.wrap(n))
    }

    fn check_var(&self, v: u32) -> Result<(), BddError> {
        if v < self.num_vars {
            Ok(())
        } else {
            Err(BddError::VarOutOfRange { var: v, count: self.num_vars })
        }
    }

    /// Top variable, low child and high child of an internal node.
    pub fn node(&self, a: NodeRef) -> Option<(u32, NodeRef, NodeRef)> {
        if a.store != self.id || a.idx <= TRUE {
            return None;
        }
        let n = self.nodes[a.idx as usize];
        Some((n.var, self.wrap(n.lo), self.wrap(n.hi)))
    }

    fn tick(&mut self) -> Result<(), BddError> {
        let t = self.ticks;
        self.ticks = t.wrapping_add(1);
        if t & 0xfff == 0 {
            if let Some(limit) = self.limits.timeout {
                if self.started.elapsed() >= limit {
                    return Err(BddError::Timeout { limit });
                }
            }
        }
        Ok(())
    }

    fn mk(&mut self, var: u32, lo: u32, hi: u32) -> Result<u32, BddError> {
        if lo == hi {
            return Ok(lo);
        }
        if let Some(&n) = self.unique.get(&(var, lo, hi)) {
            return Ok(n);
        }
        if self.nodes.len() >= self.limits.max_nodes {
            return Err(BddError::NodeLimit { limit: self.limits.max_nodes });
        }
        let n = self.nodes.len() as u32;
        self.nodes.push(Node { var, lo, hi });
        self.unique.insert((var, lo, hi), n);
        Ok(n)
    }

    #[inline]
    fn var_of(&self, n: u32) -> u32 {
        self.nodes[n as usize].var
    }

    #[inline]
    fn cofactors(&self, n: u32, var: u32) -> (u32, u32) {
        let node = self.nodes[n as usize];
        if node.var == var {
            (node.lo, node.hi)
        } else {
            (n, n)
        }
    }

    pub fn not(&mut self, a: NodeRef) -> Result<NodeRef, BddError> {
        let a = self.open(a)?;
        let r = self.not_rec(a)?;
        Ok(self.wrap(r))
    }

    fn not_rec(&mut self, a: u32) -> Result<u32, BddError> {
        match a {
            FALSE => return Ok(TRUE),
            TRUE => return Ok(FALSE),
            _ => {}
        }
        if let Some(&r) = self.not_cache.get(&a) {
            return Ok(r);
        }
        self.tick()?;
        let Node { var, lo, hi } = self.nodes[a as usize];
        let l = self.not_rec(lo)?;
        let h = self.not_rec(hi)?;
        let r = self.mk(var, l, h)?;
        self.not_cache.insert(a, r);
        Ok(r)
    }

    pub fn apply(&mut self, op: BinOp, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        let (a, b) = (self.open(a)?, self.open(b)?);
        let r = self.apply_rec(op, a, b)?;
        Ok(self.wrap(r))
    }

    pub fn and(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(BinOp::And, a, b)
    }

    pub fn or(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(BinOp::Or, a, b)
    }

    pub fn implies(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(BinOp::Implies, a, b)
    }

    pub fn xor(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(BinOp::Xor, a, b)
    }

    pub fn iff(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        self.apply(BinOp::Iff, a, b)
    }

    fn apply_rec(&mut self, op: BinOp, f: u32, g: u32) -> Result<u32, BddError> {
        // terminal cases
        match op {
            BinOp::And => {
                if f == FALSE || g == FALSE {
                    return Ok(FALSE);
                }
                if f == TRUE || f == g {
                    return Ok(g);
                }
                if g == TRUE {
                    return Ok(f);
                }
            }
            BinOp::Or => {
                if f == TRUE || g == TRUE {
                    return Ok(TRUE);
                }
                if f == FALSE || f == g {
                    return Ok(g);
                }
                if g == FALSE {
                    return Ok(f);
                }
            }
            BinOp::Implies => {
                if f == FALSE || g == TRUE || f == g {
                    return Ok(TRUE);
                }
                if f == TRUE {
                    return Ok(g);
                }
                if g == FALSE {
                    return self.not_rec(f);
                }
            }
            BinOp::Xor => {
                if f == g {
                    return Ok(FALSE);
                }
                if f == FALSE {
                    return Ok(g);
                }
                if g == FALSE {
                    return Ok(f);
                }
                if f == TRUE {
                    return self.not_rec(g);
                }
                if g == TRUE {
                    return self.not_rec(f);
                }
            }
            BinOp::Iff => {
                if f == g {
                    return Ok(TRUE);
                }
                if f == TRUE {
                    return Ok(g);
                }
                if g == TRUE {
                    return Ok(f);
                }
                if f == FALSE {
                    return self.not_rec(g);
                }
                if g == FALSE {
                    return self.not_rec(f);
                }
            }
        }
        let key = if op != BinOp::Implies && f > g { (op, g, f) } else { (op, f, g) };
        if let Some(&r) = self.apply_cache.get(&key) {
            return Ok(r);
        }
        self.tick()?;
        let var = self.var_of(f).min(self.var_of(g));
        let (f0, f1) = self.cofactors(f, var);
        let (g0, g1) = self.cofactors(g, var);
        let lo = self.apply_rec(op, f0, g0)?;
        let hi = self.apply_rec(op, f1, g1)?;
        let r = self.mk(var, lo, hi)?;
        self.apply_cache.insert(key, r);
        Ok(r)
    }

    fn set_id(&mut self, vars: &[u32]) -> Result<Option<u32>, BddError> {
        let mut vs: Vec<u32> = vars.to_vec();
        vs.sort_unstable();
        vs.dedup();
        if let Some(&v) = vs.iter().find(|v| **v >= self.num_vars) {
            return Err(BddError::VarOutOfRange { var: v, count: self.num_vars });
        }
        let Some(&max) = vs.last() else { return Ok(None) };
        if let Some(&id) = self.set_ids.get(&vs) {
            return Ok(Some(id));
        }
        let id = self.sets.len() as u32;
        self.sets.push(VarSet { member: vs.iter().copied().collect(), max });
        self.set_ids.insert(vs, id);
        Ok(Some(id))
    }

    /// `∀vars. a` or `∃vars. a`.
    pub fn quantify(&mut self, q: Quantifier, vars: &[u32], a: NodeRef) -> Result<NodeRef, BddError> {
        let a = self.open(a)?;
        let Some(set) = self.set_id(vars)? else { return Ok(self.wrap(a)) };
        let r = self.quant_rec(q, set, a)?;
        Ok(self.wrap(r))
    }

    pub fn exists(&mut self, vars: &[u32], a: NodeRef) -> Result<NodeRef, BddError> {
        self.quantify(Quantifier::Exists, vars, a)
    }

    pub fn forall(&mut self, vars: &[u32], a: NodeRef) -> Result<NodeRef, BddError> {
        self.quantify(Quantifier::ForAll, vars, a)
    }

    fn quant_rec(&mut self, q: Quantifier, set: u32, a: u32) -> Result<u32, BddError> {
        if a <= TRUE || self.var_of(a) > self.sets[set as usize].max {
            return Ok(a);
        }
        if let Some(&r) = self.quant_cache.get(&(q, set, a)) {
            return Ok(r);
        }
        self.tick()?;
        let Node { var, lo, hi } = self.nodes[a as usize];
        let l = self.quant_rec(q, set, lo)?;
        let r = if self.sets[set as usize].member.contains(&var) {
            match q {
                Quantifier::Exists if l == TRUE => TRUE,
                Quantifier::ForAll if l == FALSE => FALSE,
                Quantifier::Exists => {
                    let h = self.quant_rec(q, set, hi)?;
                    self.apply_rec(BinOp::Or, l, h)?
                }
                Quantifier::ForAll => {
                    let h = self.quant_rec(q, set, hi)?;
                    self.apply_rec(BinOp::And, l, h)?
                }
            }
        } else {
            let h = self.quant_rec(q, set, hi)?;
            self.mk(var, l, h)?
        };
        self.quant_cache.insert((q, set, a), r);
        Ok(r)
    }

    /// `∃vars. (a ∧ b)` without building the conjunction first.
    pub fn and_exists(&mut self, vars: &[u32], a: NodeRef, b: NodeRef) -> Result<NodeRef, BddError> {
        let (a, b) = (self.open(a)?, self.open(b)?);
        let r = match self.set_id(vars)? {
            None => self.apply_rec(BinOp::And, a, b)?,
            Some(set) => self.relprod_rec(set, a, b)?,
        };
        Ok(self.wrap(r))
    }

    fn relprod_rec(&mut self, set: u32, f: u32, g: u32) -> Result<u32, BddError> {
        if f == FALSE || g == FALSE {
            return Ok(FALSE);
        }
        if f == TRUE && g == TRUE {
            return Ok(TRUE);
        }
        if f == TRUE || f == g {
            return self.quant_rec(Quantifier::Exists, set, g);
        }
        if g == TRUE {
            return self.quant_rec(Quantifier::Exists, set, f);
        }
        let var = self.var_of(f).min(self.var_of(g));
        if var > self.sets[set as usize].max {
            return self.apply_rec(BinOp::And, f, g);
        }
        let (f, g) = if f > g { (g, f) } else { (f, g) };
        if let Some(&r) = self.relprod_cache.get(&(set, f, g)) {
            return Ok(r);
        }
        self.tick()?;
        let (f0, f1) = self.cofactors(f, var);
        let (g0, g1) = self.cofactors(g, var);
        let lo = self.relprod_rec(set, f0, g0)?;
        let r = if self.sets[set as usize].member.contains(&var) {
            if lo == TRUE {
                TRUE
            } else {
                let hi = self.relprod_rec(set, f1, g1)?;
                self.apply_rec(BinOp::Or, lo, hi)?
            }
        } else {
            let hi = self.relprod_rec(set, f1, g1)?;
            self.mk(var, lo, hi)?
        };
        self.relprod_cache.insert((set, f, g), r);
        Ok(r)
    }

    /// Cofactor of `a` with variable `v` fixed to `value`.
    pub fn restrict(&mut self, a: NodeRef, v: u32, value: bool) -> Result<NodeRef, BddError> {
        let a = self.open(a)?;
        self.check_var(v)?;
        let mut memo = FxHashMap::default();
        let r = self.restrict_rec(a, v, value, &mut memo)?;
        Ok(self.wrap(r))
    }

    fn restrict_rec(&mut self, a: u32, v: u32, value: bool, memo: &mut FxHashMap<u32, u32>) -> Result<u32, BddError> {
        if a <= TRUE || self.var_of(a) > v {
            return Ok(a);
        }
        if let Some(&r) = memo.get(&a) {
            return Ok(r);
        }
        let Node { var, lo, hi } = self.nodes[a as usize];
        let r = if var == v {
            if value {
                hi
            } else {
                lo
            }
        } else {
            let l = self.restrict_rec(lo, v, value, memo)?;
            let h = self.restrict_rec(hi, v, value, memo)?;
            self.mk(var, l, h)?
        };
        memo.insert(a, r);
        Ok(r)
    }

    /// Follows the path selected by `assignment` to a terminal.
    pub fn evaluate(&self, a: NodeRef, assignment: impl Fn(u32) -> Option<bool>) -> Result<bool, BddError> {
        let mut n = self.open(a)?;
        while n > TRUE {
            let node = self.nodes[n as usize];
            n = match assignment(node.var) {
                Some(true) => node.hi,
                Some(false) => node.lo,
                None => return Err(BddError::MissingVariable(node.var)),
            };
        }
        Ok(n == TRUE)
    }

    /// Number of assignments to the first `nvars` variables that satisfy
    /// `a`; every variable on `a` must be below `nvars`.
    pub fn sat_count(&self, a: NodeRef, nvars: u32) -> Result<u128, BddError> {
        let a = self.open(a)?;
        let mut memo: FxHashMap<u32, u128> = FxHashMap::default();
        fn go(s: &BddStore, n: u32, nvars: u32, memo: &mut FxHashMap<u32, u128>) -> u128 {
            // count over variables var(n)..nvars
            if n == FALSE {
                return 0;
            }
            if n == TRUE {
                return 1;
            }
            if let Some(&c) = memo.get(&n) {
                return c;
            }
            let Node { var, lo, hi } = s.nodes[n as usize];
            let level = |m: u32| if m <= TRUE { nvars } else { s.var_of(m) };
            let cl = go(s, lo, nvars, memo) << (level(lo) - var - 1);
            let ch = go(s, hi, nvars, memo) << (level(hi) - var - 1);
            memo.insert(n, cl + ch);
            cl + ch
        }
        let top = if a <= TRUE { nvars } else { self.var_of(a) };
        Ok(go(self, a, nvars, &mut memo) << top)
    }

    /// Number of nodes reachable from `a`, terminals included.
    pub fn size(&self, a: NodeRef) -> usize {
        let mut seen = FxHashSet::default();
        let mut stack = vec![a.idx];
        while let Some(n) = stack.pop() {
            if seen.insert(n) && n > TRUE {
                let node = self.nodes[n as usize];
                stack.push(node.lo);
                stack.push(node.hi);
            }
        }
        seen.len()
    }

    /// Checks that the store is ordered, reduced and free of duplicates.
    pub fn audit(&self) -> Result<(), String> {
        let mut seen = FxHashSet::default();
        for (k, n) in self.nodes.iter().enumerate().skip(2) {
            if n.lo == n.hi {
                return Err(format!("node {k} has equal children"));
            }
            for c in [n.lo, n.hi] {
                if c > TRUE && self.var_of(c) <= n.var {
                    return Err(format!("node {k} is out of order"));
                }
            }
            if !seen.insert((n.var, n.lo, n.hi)) {
                return Err(format!("node {k} duplicates another node"));
            }
            if self.unique.get(&(n.var, n.lo, n.hi)) != Some(&(k as u32)) {
                return Err(format!("node {k} is missing from the unique table"));
            }
        }
        Ok(())
    }

    /// Graphviz rendering of the diagram rooted at `a`.
    pub fn to_dot(&self, a: NodeRef, name: impl Fn(u32) -> String) -> String {
        let mut out = String::from("digraph bdd {\n  t0 [shape=box,label=\"0\"];\n  t1 [shape=box,label=\"1\"];\n");
        let id = |n: u32| if n <= TRUE { format!("t{n}") } else { format!("n{n}") };
        let mut seen = FxHashSet::default();
        let mut stack = vec![a.idx];
        while let Some(n) = stack.pop() {
            if n <= TRUE || !seen.insert(n) {
                continue;
            }
            let node = self.nodes[n as usize];
            let _ = writeln!(out, "  n{n} [label=\"{}\"];", name(node.var).replace('"', "\\\""));
            let _ = writeln!(out, "  n{n} -> {} [style=dashed];", id(node.lo));
            let _ = writeln!(out, "  n{n} -> {};", id(node.hi));
            stack.push(node.lo);
            stack.push(node.hi);
        }
        out.push_str("}\n");
        out
    }
}
