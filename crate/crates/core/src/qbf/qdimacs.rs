//! QDIMACS export and a small reference evaluator for the files it writes.

use std::fmt::Write as _;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use super::{LeveledVar, QbfFormula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QdimacsError {
    #[error("sentence is not closed: `{0}` is free")]
    FreeVariable(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0} outer variables are too many for exhaustive evaluation")]
    TooLarge(usize),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Q {
    A,
    E,
}

#[derive(Clone, Copy)]
enum Lit {
    Const(bool),
    Var(i32),
}

impl Lit {
    fn neg(self) -> Lit {
        match self {
            Lit::Const(b) => Lit::Const(!b),
            Lit::Var(v) => Lit::Var(-v),
        }
    }
}

struct Encoder {
    next: i32,
    clauses: Vec<Vec<i32>>,
    blocks: Vec<(usize, Q, Vec<i32>)>,
    names: Vec<(i32, String)>,
    aux: Vec<i32>,
    env: FxHashMap<LeveledVar, Vec<i32>>,
    memo: FxHashMap<(*const QbfFormula, bool, usize), Lit>,
    scope: usize,
    scopes: usize,
}

impl Encoder {
    fn fresh(&mut self) -> i32 {
        self.next += 1;
        self.next
    }

    fn gate(&mut self, conj: bool, a: Lit, b: Lit) -> Lit {
        match (a, b, conj) {
            (Lit::Const(false), _, true) | (_, Lit::Const(false), true) => Lit::Const(false),
            (Lit::Const(true), _, false) | (_, Lit::Const(true), false) => Lit::Const(true),
            (Lit::Const(_), x, _) | (x, Lit::Const(_), _) => x,
            (Lit::Var(x), Lit::Var(y), _) => {
                let g = self.fresh();
                self.aux.push(g);
                if conj {
                    self.clauses.push(vec![-g, x]);
                    self.clauses.push(vec![-g, y]);
                    self.clauses.push(vec![g, -x, -y]);
                } else {
                    self.clauses.push(vec![g, -x]);
                    self.clauses.push(vec![g, -y]);
                    self.clauses.push(vec![-g, x, y]);
                }
                Lit::Var(g)
            }
        }
    }

    /// Returns the literal equivalent to `q`; `positive` tracks polarity so
    /// quantifiers under an odd number of negations switch kind.
    fn encode(&mut self, q: &Arc<QbfFormula>, positive: bool, depth: usize) -> Result<Lit, QdimacsError> {
        let key = (Arc::as_ptr(q), positive, self.scope);
        if let Some(&l) = self.memo.get(&key) {
            return Ok(l);
        }
        let l = match &**q {
            QbfFormula::Const(b) => Lit::Const(*b),
            QbfFormula::Var(v) => match self.env.get(v).and_then(|s| s.last()) {
                Some(&id) => Lit::Var(id),
                None => return Err(QdimacsError::FreeVariable(v.to_string())),
            },
            QbfFormula::Not(a) => self.encode(a, !positive, depth)?.neg(),
            QbfFormula::And(a, b) => {
                let (x, y) = (self.encode(a, positive, depth)?, self.encode(b, positive, depth)?);
                self.gate(true, x, y)
            }
            QbfFormula::Or(a, b) => {
                let (x, y) = (self.encode(a, positive, depth)?, self.encode(b, positive, depth)?);
                self.gate(false, x, y)
            }
            QbfFormula::Implies(a, b) => {
                let x = self.encode(a, !positive, depth)?.neg();
                let y = self.encode(b, positive, depth)?;
                self.gate(false, x, y)
            }
            QbfFormula::ForAll(vs, body) | QbfFormula::Exists(vs, body) => {
                let universal = matches!(&**q, QbfFormula::ForAll(..)) == positive;
                let ids: Vec<i32> = vs.iter().map(|_| self.fresh()).collect();
                for (v, id) in vs.iter().zip(&ids) {
                    self.env.entry(v.clone()).or_default().push(*id);
                    self.names.push((*id, v.to_string()));
                }
                if !ids.is_empty() {
                    self.blocks.push((depth, if universal { Q::A } else { Q::E }, ids));
                }
                let outer = self.scope;
                self.scopes += 1;
                self.scope = self.scopes;
                let r = self.encode(body, positive, depth + 1);
                self.scope = outer;
                for v in vs.iter() {
                    if let Some(s) = self.env.get_mut(v) {
                        s.pop();
                    }
                }
                r?
            }
        };
        self.memo.insert(key, l);
        Ok(l)
    }
}

/// Prenexes a closed QBF (blocks ordered by nesting depth, universal before
/// existential within a depth), Tseitin-encodes the matrix with the gate
/// variables in the innermost existential block, and prints QDIMACS. Every
/// quantified variable gets a `c map <id> <name>` comment.
pub fn export_qdimacs(q: &Arc<QbfFormula>) -> Result<String, QdimacsError> {
    let mut enc = Encoder {
        next: 0,
        clauses: Vec::new(),
        blocks: Vec::new(),
        names: Vec::new(),
        aux: Vec::new(),
        env: FxHashMap::default(),
        memo: FxHashMap::default(),
        scope: 0,
        scopes: 0,
    };
    let top = enc.encode(q, true, 0)?;
    let mut out = String::new();
    let top = match top {
        Lit::Const(true) => {
            out.push_str("p cnf 0 0\n");
            return Ok(out);
        }
        Lit::Const(false) => {
            out.push_str("p cnf 0 1\n0\n");
            return Ok(out);
        }
        Lit::Var(v) => v,
    };
    enc.clauses.push(vec![top]);
    for (id, name) in &enc.names {
        let _ = writeln!(out, "c map {id} {name}");
    }
    let _ = writeln!(out, "p cnf {} {}", enc.next, enc.clauses.len());

    let mut blocks = std::mem::take(&mut enc.blocks);
    blocks.sort_by_key(|(d, k, _)| (*d, *k == Q::E));
    let mut merged: Vec<(Q, Vec<i32>)> = Vec::new();
    for (_, k, ids) in blocks.into_iter().chain(std::iter::once((usize::MAX, Q::E, enc.aux.clone()))) {
        if ids.is_empty() {
            continue;
        }
        match merged.last_mut() {
            Some((lk, lids)) if *lk == k => lids.extend(ids),
            _ => merged.push((k, ids)),
        }
    }
    for (k, ids) in &merged {
        out.push(if *k == Q::A { 'a' } else { 'e' });
        for id in ids {
            let _ = write!(out, " {id}");
        }
        out.push_str(" 0\n");
    }
    for c in &enc.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    Ok(out)
}

struct Parsed {
    prefix: Vec<(Q, Vec<usize>)>,
    clauses: Vec<Vec<i32>>,
    nvars: usize,
}

fn parse(text: &str) -> Result<Parsed, QdimacsError> {
    let err = |line: usize, msg: &str| QdimacsError::Parse { line: line + 1, msg: msg.into() };
    let mut nvars = None;
    let mut prefix = Vec::new();
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or_default();
        if head == "p" {
            if words.next() != Some("cnf") {
                return Err(err(ln, "expected `p cnf`"));
            }
            let v: usize = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| err(ln, "bad variable count"))?;
            nvars = Some(v);
            continue;
        }
        let nv = nvars.ok_or_else(|| err(ln, "missing problem line"))?;
        if head == "a" || head == "e" {
            let mut ids = Vec::new();
            for w in words {
                let id: usize = w.parse().map_err(|_| err(ln, "bad variable"))?;
                if id == 0 {
                    break;
                }
                if id > nv {
                    return Err(err(ln, "variable out of range"));
                }
                ids.push(id);
            }
            prefix.push((if head == "a" { Q::A } else { Q::E }, ids));
            continue;
        }
        for w in std::iter::once(head).chain(words) {
            let l: i32 = w.parse().map_err(|_| err(ln, "bad literal"))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if l.unsigned_abs() as usize > nv {
                    return Err(err(ln, "literal out of range"));
                }
                current.push(l);
            }
        }
    }
    let nvars = nvars.ok_or_else(|| err(0, "missing problem line"))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    Ok(Parsed { prefix, clauses, nvars })
}

/// Truth of a QDIMACS file: outer blocks are expanded exhaustively, the
/// innermost existential block goes to a DPLL search. Variables missing
/// from the prefix are existential at the outermost level.
pub fn evaluate_qdimacs(text: &str) -> Result<bool, QdimacsError> {
    let mut p = parse(text)?;
    let mut quantified = vec![false; p.nvars + 1];
    for (_, ids) in &p.prefix {
        for &v in ids {
            quantified[v] = true;
        }
    }
    let free: Vec<usize> = (1..=p.nvars).filter(|v| !quantified[*v]).collect();
    if !free.is_empty() {
        p.prefix.insert(0, (Q::E, free));
    }
    let inner = match p.prefix.last() {
        Some((Q::E, ids)) => ids.clone(),
        _ => Vec::new(),
    };
    let outer: Vec<(Q, usize)> = p.prefix[..p.prefix.len() - usize::from(!inner.is_empty())]
        .iter()
        .flat_map(|(q, ids)| ids.iter().map(move |v| (*q, *v)))
        .collect();
    if outer.len() > 26 {
        return Err(QdimacsError::TooLarge(outer.len()));
    }
    let mut assign = vec![0i8; p.nvars + 1];
    Ok(expand(&outer, 0, &mut assign, &p.clauses))
}

fn expand(outer: &[(Q, usize)], k: usize, assign: &mut Vec<i8>, clauses: &[Vec<i32>]) -> bool {
    if k == outer.len() {
        return dpll(clauses, &mut assign.clone());
    }
    let (q, v) = outer[k];
    for val in [1i8, -1] {
        assign[v] = val;
        let r = expand(outer, k + 1, assign, clauses);
        if (q == Q::E && r) || (q == Q::A && !r) {
            assign[v] = 0;
            return r;
        }
    }
    assign[v] = 0;
    q == Q::A
}

fn lit_value(assign: &[i8], l: i32) -> i8 {
    let v = assign[l.unsigned_abs() as usize];
    if l > 0 {
        v
    } else {
        -v
    }
}

fn dpll(clauses: &[Vec<i32>], assign: &mut [i8]) -> bool {
    loop {
        let mut unit = None;
        let mut branch = None;
        for c in clauses {
            let mut open = 0;
            let mut last = 0;
            let mut sat = false;
            for &l in c {
                match lit_value(assign, l) {
                    1 => {
                        sat = true;
                        break;
                    }
                    0 => {
                        open += 1;
                        last = l;
                    }
                    _ => {}
                }
            }
            if sat {
                continue;
            }
            match open {
                0 => return false,
                1 => {
                    unit = Some(last);
                    break;
                }
                _ => {
                    branch.get_or_insert(last);
                }
            }
        }
        if let Some(l) = unit {
            assign[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 };
            continue;
        }
        let Some(l) = branch else { return true };
        let v = l.unsigned_abs() as usize;
        for val in [1i8, -1] {
            let mut a = assign.to_vec();
            a[v] = val;
            if dpll(clauses, &mut a) {
                return true;
            }
        }
        return false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(name: &str) -> LeveledVar {
        LeveledVar::prop(name.into(), 0)
    }

    #[test]
    fn constants() {
        let t = export_qdimacs(&QbfFormula::constant(true)).unwrap();
        assert_eq!(t, "p cnf 0 0\n");
        assert!(evaluate_qdimacs(&t).unwrap());
        let f = export_qdimacs(&QbfFormula::constant(false)).unwrap();
        assert!(!evaluate_qdimacs(&f).unwrap());
    }

    #[test]
    fn excluded_middle() {
        let v = QbfFormula::var(x("x"));
        let q = QbfFormula::forall(vec![x("x")].into(), QbfFormula::or(v.clone(), QbfFormula::not(v)));
        let text = export_qdimacs(&q).unwrap();
        assert!(text.contains("c map 1 x@0"));
        assert!(text.lines().any(|l| l.starts_with("a 1 ")));
        assert!(evaluate_qdimacs(&text).unwrap());
    }

    #[test]
    fn alternation_and_negated_quantifier() {
        // ∀x ∃y (x ↔ y) is true, ∃y ∀x (x ↔ y) is false
        let (vx, vy) = (QbfFormula::var(x("x")), QbfFormula::var(x("y")));
        let iff =
            QbfFormula::and(QbfFormula::implies(vx.clone(), vy.clone()), QbfFormula::implies(vy.clone(), vx.clone()));
        let ae = QbfFormula::forall(vec![x("x")].into(), QbfFormula::exists(vec![x("y")].into(), iff.clone()));
        let ea = QbfFormula::exists(vec![x("y")].into(), QbfFormula::forall(vec![x("x")].into(), iff.clone()));
        assert!(evaluate_qdimacs(&export_qdimacs(&ae).unwrap()).unwrap());
        assert!(!evaluate_qdimacs(&export_qdimacs(&ea).unwrap()).unwrap());
        // ¬∃y∀x(x↔y) is true
        assert!(evaluate_qdimacs(&export_qdimacs(&QbfFormula::not(ea)).unwrap()).unwrap());
    }

    #[test]
    fn free_variables_are_rejected() {
        let q = QbfFormula::var(x("x"));
        assert!(matches!(export_qdimacs(&q), Err(QdimacsError::FreeVariable(_))));
    }

    #[test]
    fn parse_errors() {
        assert!(evaluate_qdimacs("1 2 0\n").is_err());
        assert!(evaluate_qdimacs("p cnf 1 1\n2 0\n").is_err());
    }
}
