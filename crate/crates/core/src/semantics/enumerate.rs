use rustc_hash::FxHashMap;

use super::{epistemic_related, sat0_unchecked, CheckError, State, UniversalContext};
use crate::formula::{Agent, Formula, Kind};

/// Iterator over every state of a universal context. Bit `b` of the
/// counter is atom `b` for `b < |atoms|`, then the vocabulary slots agent
/// by agent in vocabulary order.
pub struct ContextIter<'a> {
    ctx: &'a UniversalContext,
    slots: Vec<(Agent, &'a Formula)>,
    next: u64,
    end: u64,
}

impl Iterator for ContextIter<'_> {
    type Item = State;

    fn next(&mut self) -> Option<State> {
        if self.next >= self.end {
            return None;
        }
        let code = self.next;
        self.next += 1;
        let mut s = State::new();
        let na = self.ctx.atoms.len();
        for (b, p) in self.ctx.atoms.iter().enumerate() {
            if code >> b & 1 == 1 {
                s.set_true(p.clone());
            }
        }
        for (k, (i, a)) in self.slots.iter().enumerate() {
            if code >> (na + k) & 1 == 1 {
                s.add_belief(*i, (*a).clone());
            }
        }
        Some(s)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for ContextIter<'_> {}

/// Streams every state of the context exactly once, in counter order.
pub fn enumerate_context(ctx: &UniversalContext, cap: usize) -> Result<ContextIter<'_>, CheckError> {
    let bits = ctx.bits();
    if bits > cap || bits >= 63 {
        return Err(CheckError::CapExceeded { bits, cap });
    }
    let slots = ctx.profile.agents().flat_map(|i| ctx.profile.gamma(i).iter().map(move |a| (i, a))).collect();
    Ok(ContextIter { ctx, slots, next: 0, end: 1u64 << bits })
}

/// The textbook recursive checker: quantifies over the materialized context
/// for every modality. Exponential; meant as an oracle for tiny instances.
pub fn check_recursive(s: &State, ctx: &UniversalContext, phi: &Formula, cap: usize) -> Result<bool, CheckError> {
    let ctx = ctx.covering(s, phi);
    let states: Vec<State> = enumerate_context(&ctx, cap)?.collect();
    let mut memo = FxHashMap::default();
    Ok(mc(s, &states, phi, &mut memo))
}

fn mc(s: &State, states: &[State], phi: &Formula, memo: &mut FxHashMap<(State, Formula), bool>) -> bool {
    if phi.is_l0() {
        return sat0_unchecked(s, phi);
    }
    let key = (s.clone(), phi.clone());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let v = match phi.kind() {
        Kind::Not(a) => !mc(s, states, a, memo),
        Kind::And(a, b) => mc(s, states, a, memo) && mc(s, states, b, memo),
        Kind::Or(a, b) => mc(s, states, a, memo) || mc(s, states, b, memo),
        Kind::Implies(a, b) => !mc(s, states, a, memo) || mc(s, states, b, memo),
        Kind::Iff(a, b) => mc(s, states, a, memo) == mc(s, states, b, memo),
        Kind::Xor(a, b) => mc(s, states, a, memo) != mc(s, states, b, memo),
        Kind::AtLeast(i, a) => states.iter().filter(|t| epistemic_related(s, t, *i)).all(|t| mc(t, states, a, memo)),
        Kind::AtMost(i, a) => states.iter().filter(|t| !epistemic_related(s, t, *i)).all(|t| mc(t, states, a, memo)),
        Kind::Only(i, a) => {
            let k = Formula::at_least(*i, a.clone());
            let w = Formula::at_most(*i, Formula::not(a.clone()));
            mc(s, states, &k, memo) && mc(s, states, &w, memo)
        }
        Kind::Expand(i, alpha, body) => {
            let mut t = s.clone();
            t.add_belief(*i, alpha.clone());
            mc(&t, states, body, memo)
        }
        Kind::Atom(_) | Kind::Top | Kind::Bottom | Kind::Explicit(..) => unreachable!("explicit-belief case"),
    };
    memo.insert(key, v);
    v
}
