//! Explicit-state checking by labeling: every subformula gets a bitset over
//! all context states, and each modality is resolved with a subset-lattice
//! sweep over the agent's vocabulary masks instead of a pairwise loop.

use std::collections::{BTreeMap, BTreeSet};

use std::rc::Rc;

use rustc_hash::FxHashMap;

use super::{CheckError, State, UniversalContext, VocabularyProfile, DEFAULT_ENUMERATION_CAP};
use crate::formula::{Agent, AtomTable, Formula, Kind};

/// Decides `(S, S_Γ) ⊨ φ` by enumerating the context. `S` may lie outside
/// the context; only quantification is restricted to it.
pub fn check_direct(s: &State, ctx: &UniversalContext, phi: &Formula) -> Result<bool, CheckError> {
    check_direct_with_cap(s, ctx, phi, DEFAULT_ENUMERATION_CAP)
}

pub fn check_direct_with_cap(s: &State, ctx: &UniversalContext, phi: &Formula, cap: usize) -> Result<bool, CheckError> {
    if !phi.is_well_formed() {
        return Err(CheckError::NotExplicit(phi.to_string()));
    }
    let atoms = ctx.covering(s, phi).atoms;
    let bits = atoms.len() + ctx.profile.total();
    if bits > cap || bits > 30 {
        return Err(CheckError::CapExceeded { bits, cap });
    }
    let mut lab = Labeler::new(&ctx.profile, &atoms);

    let mut index = 0usize;
    for (b, p) in atoms.iter().enumerate() {
        if s.holds(p) {
            index |= 1 << b;
        }
    }
    let mut extra = Extra::new();
    for (i, base) in s.bases() {
        for a in base {
            match lab.slot(i, a) {
                Some(bit) => index |= 1 << bit,
                None => {
                    extra.entry(i).or_default().insert(a.clone());
                }
            }
        }
    }
    Ok(lab.label(phi, &extra).get(index))
}

/// Base elements of the evaluation point that lie outside the vocabulary.
type Extra = BTreeMap<Agent, BTreeSet<Formula>>;

#[derive(Clone)]
struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    fn zeros(len: usize) -> Self {
        Bits { words: vec![0; len.div_ceil(64)], len }
    }

    fn ones(len: usize) -> Self {
        let mut b = Bits { words: vec![!0; len.div_ceil(64)], len };
        b.trim();
        b
    }

    fn trim(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << r) - 1;
            }
        }
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn map(&self, f: impl Fn(u64) -> u64) -> Bits {
        let mut b = Bits { words: self.words.iter().map(|w| f(*w)).collect(), len: self.len };
        b.trim();
        b
    }

    fn zip(&self, other: &Bits, f: impl Fn(u64, u64) -> u64) -> Bits {
        let mut b =
            Bits { words: self.words.iter().zip(&other.words).map(|(a, c)| f(*a, *c)).collect(), len: self.len };
        b.trim();
        b
    }

    /// Bit pattern of "state bit `b` is set".
    fn of_bit(len: usize, b: usize) -> Bits {
        let mut out = Bits::zeros(len);
        if b < 6 {
            let pat = (0..64u64).filter(|s| s >> b & 1 == 1).fold(0u64, |w, s| w | 1 << s);
            out.words.iter_mut().for_each(|w| *w = pat);
        } else {
            let block = 1usize << (b - 6);
            for (k, w) in out.words.iter_mut().enumerate() {
                if (k / block) & 1 == 1 {
                    *w = !0;
                }
            }
        }
        out.trim();
        out
    }
}

struct Labeler<'a> {
    profile: &'a VocabularyProfile,
    len: usize,
    /// First state bit and size of each agent's vocabulary block.
    blocks: FxHashMap<Agent, (usize, usize)>,
    memo: FxHashMap<(Formula, Extra), Rc<Bits>>,
    sat_masks: FxHashMap<Agent, Rc<Vec<u32>>>,
    atoms: &'a AtomTable,
}

impl<'a> Labeler<'a> {
    fn new(profile: &'a VocabularyProfile, atoms: &'a AtomTable) -> Self {
        let mut blocks = FxHashMap::default();
        let mut off = atoms.len();
        for i in profile.agents() {
            let g = profile.gamma(i).len();
            blocks.insert(i, (off, g));
            off += g;
        }
        Labeler {
            profile,
            len: 1usize << off,
            blocks,
            memo: FxHashMap::default(),
            sat_masks: FxHashMap::default(),
            atoms,
        }
    }

    fn block(&self, i: Agent) -> (usize, usize) {
        self.blocks.get(&i).copied().unwrap_or((0, 0))
    }

    fn slot(&self, i: Agent, a: &Formula) -> Option<usize> {
        self.profile.index_of(i, a).map(|k| self.block(i).0 + k)
    }

    /// For each context state, the set of `Γ_i` elements it satisfies.
    fn sat_mask(&mut self, i: Agent) -> Rc<Vec<u32>> {
        if let Some(m) = self.sat_masks.get(&i) {
            return m.clone();
        }
        let mut masks = vec![0u32; self.len];
        let gamma: Vec<Formula> = self.profile.gamma(i).to_vec();
        for (k, a) in gamma.iter().enumerate() {
            let l = self.label(a, &Extra::new());
            for (s, m) in masks.iter_mut().enumerate() {
                if l.get(s) {
                    *m |= 1 << k;
                }
            }
        }
        let m = Rc::new(masks);
        self.sat_masks.insert(i, m.clone());
        m
    }

    /// States satisfying every extra belief of agent `i`.
    fn extra_filter(&mut self, i: Agent, extra: &Extra) -> Bits {
        let mut out = Bits::ones(self.len);
        if let Some(set) = extra.get(&i) {
            for a in set.clone() {
                let l = self.label(&a, &Extra::new());
                out = out.zip(&l, |x, y| x & y);
            }
        }
        out
    }

    fn label(&mut self, phi: &Formula, extra: &Extra) -> Rc<Bits> {
        let key = (phi.clone(), extra.clone());
        if let Some(b) = self.memo.get(&key) {
            return b.clone();
        }
        let n = self.len;
        let out = match phi.kind() {
            Kind::Top => Bits::ones(n),
            Kind::Bottom => Bits::zeros(n),
            Kind::Atom(p) => match self.atoms.position(p) {
                Some(b) => Bits::of_bit(n, b),
                None => unreachable!("atom table is extended before labeling"),
            },
            Kind::Not(a) => self.label(a, extra).map(|w| !w),
            Kind::And(a, b) => self.binary(a, b, extra, |x, y| x & y),
            Kind::Or(a, b) => self.binary(a, b, extra, |x, y| x | y),
            Kind::Implies(a, b) => self.binary(a, b, extra, |x, y| !x | y),
            Kind::Iff(a, b) => self.binary(a, b, extra, |x, y| !(x ^ y)),
            Kind::Xor(a, b) => self.binary(a, b, extra, |x, y| x ^ y),
            Kind::Explicit(i, a) => {
                if extra.get(i).is_some_and(|s| s.contains(a)) {
                    Bits::ones(n)
                } else {
                    match self.slot(*i, a) {
                        Some(bit) => Bits::of_bit(n, bit),
                        None => Bits::zeros(n),
                    }
                }
            }
            Kind::AtLeast(i, a) => self.at_least(*i, a, extra),
            Kind::AtMost(i, a) => self.at_most(*i, a, extra),
            Kind::Only(i, a) => {
                let e = Formula::and(Formula::at_least(*i, a.clone()), Formula::at_most(*i, Formula::not(a.clone())));
                return self.label(&e, extra);
            }
            Kind::Expand(i, alpha, body) => match self.slot(*i, alpha) {
                Some(bit) => {
                    let l = self.label(body, extra);
                    let mut out = Bits::zeros(n);
                    for s in 0..n {
                        if l.get(s | 1 << bit) {
                            out.set(s);
                        }
                    }
                    out
                }
                None => {
                    let mut e = extra.clone();
                    e.entry(*i).or_default().insert(alpha.clone());
                    return self.label(body, &e);
                }
            },
        };
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }

    fn binary(&mut self, a: &Formula, b: &Formula, extra: &Extra, f: impl Fn(u64, u64) -> u64) -> Bits {
        let x = self.label(a, extra);
        let y = self.label(b, extra);
        x.zip(&y, f)
    }

    /// `K i φ` holds at `s` iff no state `s'` with `ext(s')`,
    /// `t_i(s) ⊆ sat_i(s')` and `¬φ(s')` exists.
    fn at_least(&mut self, i: Agent, body: &Formula, extra: &Extra) -> Bits {
        let l = self.label(body, &Extra::new());
        let sat = self.sat_mask(i);
        let ext = self.extra_filter(i, extra);
        let (off, g) = self.block(i);
        let mut bad = vec![false; 1 << g];
        for s in 0..self.len {
            if ext.get(s) && !l.get(s) {
                bad[sat[s] as usize] = true;
            }
        }
        for b in 0..g {
            for m in 0..(1usize << g) {
                if m & (1 << b) == 0 && bad[m | 1 << b] {
                    bad[m] = true;
                }
            }
        }
        let mut out = Bits::zeros(self.len);
        let mask = (1usize << g) - 1;
        for s in 0..self.len {
            if !bad[(s >> off) & mask] {
                out.set(s);
            }
        }
        out
    }

    /// `W i φ` holds at `s` iff every `¬φ` state is related to `s`.
    fn at_most(&mut self, i: Agent, body: &Formula, extra: &Extra) -> Bits {
        let l = self.label(body, &Extra::new());
        let sat = self.sat_mask(i);
        let ext = self.extra_filter(i, extra);
        let (off, g) = self.block(i);
        let mut cnt = vec![0u32; 1 << g];
        let mut total = 0u32;
        for s in 0..self.len {
            if !l.get(s) {
                if !ext.get(s) {
                    return Bits::zeros(self.len);
                }
                cnt[sat[s] as usize] += 1;
                total += 1;
            }
        }
        for b in 0..g {
            for m in 0..(1usize << g) {
                if m & (1 << b) == 0 {
                    cnt[m] += cnt[m | 1 << b];
                }
            }
        }
        let mut out = Bits::zeros(self.len);
        let mask = (1usize << g) - 1;
        for s in 0..self.len {
            if cnt[(s >> off) & mask] == total {
                out.set(s);
            }
        }
        out
    }
}
