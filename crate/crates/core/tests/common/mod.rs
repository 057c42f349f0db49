//! Random instances and formulas shared by the property suites.
#![allow(dead_code)]

use basecheck::semantics::{State, VocabularyProfile};
use basecheck::{Agent, AgentSet, AtomId, AtomTable, Formula, ProblemInstance};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const ATOMS: [&str; 3] = ["p", "q", "r"];

pub fn atom(rng: &mut ChaCha8Rng, atoms: &AtomTable) -> Formula {
    Formula::atom(atoms.as_slice().choose(rng).unwrap().clone())
}

/// A random formula without modal operators; explicit beliefs about
/// `pool` formulas appear when `agents` is non-empty.
pub fn l0(rng: &mut ChaCha8Rng, atoms: &AtomTable, agents: &[Agent], pool: &[Formula], size: u32) -> Formula {
    if size <= 1 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0 => Formula::top(),
            1 => Formula::bottom(),
            2 | 3 if !agents.is_empty() && !pool.is_empty() => {
                Formula::explicit(*agents.choose(rng).unwrap(), pool.choose(rng).unwrap().clone())
            }
            _ => atom(rng, atoms),
        };
    }
    let s = size - 1;
    match rng.gen_range(0..7) {
        0 | 1 => Formula::not(l0(rng, atoms, agents, pool, s)),
        2 => Formula::and(l0(rng, atoms, agents, pool, s / 2), l0(rng, atoms, agents, pool, s / 2)),
        3 => Formula::or(l0(rng, atoms, agents, pool, s / 2), l0(rng, atoms, agents, pool, s / 2)),
        4 => Formula::implies(l0(rng, atoms, agents, pool, s / 2), l0(rng, atoms, agents, pool, s / 2)),
        5 => Formula::iff(l0(rng, atoms, agents, pool, s / 2), l0(rng, atoms, agents, pool, s / 2)),
        _ => Formula::xor(l0(rng, atoms, agents, pool, s / 2), l0(rng, atoms, agents, pool, s / 2)),
    }
}

/// A random instance with at most `max_bits` context bits and a trivial query.
pub fn instance(rng: &mut ChaCha8Rng, max_bits: usize) -> ProblemInstance {
    let n = rng.gen_range(1..=3u32);
    let agents: Vec<Agent> = (1..=n).map(Agent).collect();
    let na = rng.gen_range(1..=ATOMS.len());
    let atoms = AtomTable::new(ATOMS[..na].iter().map(|a| AtomId::new(a)));
    let room = max_bits.saturating_sub(na);
    let budget = rng.gen_range(room / 2..=room);
    let mut vocab = VocabularyProfile::new();
    let mut pool: Vec<Formula> = Vec::new();
    for &i in &agents {
        vocab.declare(i);
    }
    for _ in 0..budget {
        let i = *agents.choose(rng).unwrap();
        let size = rng.gen_range(1..=4);
        let a = l0(rng, &atoms, &agents, &pool, size);
        if !vocab.contains(i, &a) {
            vocab.insert(i, a.clone());
            pool.push(a);
        }
    }
    let mut s = State::new();
    for &i in &agents {
        let base: Vec<Formula> = vocab.gamma(i).iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        s = s.with_base(i, base);
    }
    let val: Vec<AtomId> = atoms.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    s = s.with_valuation(val);
    ProblemInstance::new(AgentSet::numbered(n), atoms, vocab, s, Formula::top()).unwrap()
}

fn pool_of(inst: &ProblemInstance) -> Vec<Formula> {
    inst.vocab.union().cloned().collect()
}

/// A random static formula of modal depth at most `depth`.
pub fn query(rng: &mut ChaCha8Rng, inst: &ProblemInstance, depth: u32, size: u32) -> Formula {
    let pool = pool_of(inst);
    gen(rng, inst, &pool, depth, size, false)
}

/// Like [`query`], with private expansions mixed in.
pub fn dynamic_query(rng: &mut ChaCha8Rng, inst: &ProblemInstance, depth: u32, size: u32) -> Formula {
    let pool = pool_of(inst);
    gen(rng, inst, &pool, depth, size, true)
}

fn gen(
    rng: &mut ChaCha8Rng,
    inst: &ProblemInstance,
    pool: &[Formula],
    depth: u32,
    size: u32,
    dynamic: bool,
) -> Formula {
    let agents = inst.agents.as_slice();
    if size <= 1 || rng.gen_bool(0.15) {
        return l0(rng, &inst.atoms, agents, pool, 2);
    }
    let s = size - 1;
    let i = *agents.choose(rng).unwrap();
    let pick = if dynamic && rng.gen_bool(0.3) { 3 } else { rng.gen_range(0..10) };
    match pick {
        0..=2 if depth > 0 => {
            let body = gen(rng, inst, pool, depth - 1, s, dynamic);
            match pick {
                0 => Formula::at_least(i, body),
                1 => Formula::at_most(i, body),
                _ => Formula::only(i, body),
            }
        }
        3 if dynamic => {
            // mostly vocabulary members so that the expanded state stays in the context
            let alpha = if !pool.is_empty() && rng.gen_bool(0.7) {
                pool.choose(rng).unwrap().clone()
            } else {
                l0(rng, &inst.atoms, agents, pool, 2)
            };
            Formula::expand(i, alpha, gen(rng, inst, pool, depth, s, dynamic))
        }
        4 | 5 => Formula::not(gen(rng, inst, pool, depth, s, dynamic)),
        6 => Formula::or(gen(rng, inst, pool, depth, s / 2, dynamic), gen(rng, inst, pool, depth, s / 2, dynamic)),
        7 => Formula::implies(gen(rng, inst, pool, depth, s / 2, dynamic), gen(rng, inst, pool, depth, s / 2, dynamic)),
        _ => Formula::and(gen(rng, inst, pool, depth, s / 2, dynamic), gen(rng, inst, pool, depth, s / 2, dynamic)),
    }
}

/// Every state of the (small) context of `inst`.
pub fn states(inst: &ProblemInstance) -> Vec<State> {
    let ctx = inst.context();
    basecheck::semantics::enumerate_context(&ctx, 20).unwrap().collect()
}
