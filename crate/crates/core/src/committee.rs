//! The selection-committee scenario.
//!
//! `n` committee members vote, in secret, for one of `m` candidates. A
//! member may not vote for a co-author, and a candidate is admitted to the
//! interview when somebody voted for them. In the benchmark family `m = n`,
//! member `i` co-authored with `c_i`, member `i < n` votes for `c_{i+1}` and
//! member `n` votes for `c_{n-1}`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::formula::{Agent, AgentSet, AtomId, AtomTable, Formula};
use crate::instance::ProblemInstance;
use crate::semantics::{State, VocabularyProfile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitteeError {
    #[error("the voting scenario needs as many candidates as members and more than two of each (n = {n}, m = {m})")]
    Unsupported { n: u32, m: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Every member believes only the rules, the admissions and their own vote.
    First,
    /// Member 1 additionally believes that member 2 believes the shared part.
    Second,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitteeConfig {
    pub n: u32,
    pub m: u32,
    /// Candidates each member co-authored with.
    pub coauthors: BTreeMap<u32, BTreeSet<u32>>,
}

impl CommitteeConfig {
    /// `m = n`, member `i` co-authored with `c_i`.
    pub fn benchmark(n: u32) -> Self {
        CommitteeConfig { n, m: n, coauthors: (1..=n).map(|i| (i, BTreeSet::from([i]))).collect() }
    }

    fn check(&self) -> Result<(), CommitteeError> {
        if self.n == self.m && self.n > 2 {
            Ok(())
        } else {
            Err(CommitteeError::Unsupported { n: self.n, m: self.m })
        }
    }

    /// Candidate index member `i` votes for.
    pub fn vote_of(&self, i: u32) -> u32 {
        if i < self.n {
            i + 1
        } else {
            self.n - 1
        }
    }

    pub fn atoms(&self) -> AtomTable {
        AtomTable::new((1..=self.n).flat_map(|i| (1..=self.m).map(move |c| vote_atom(i, c))))
    }
}

pub fn vote_atom(i: u32, c: u32) -> AtomId {
    AtomId::new(&format!("vote({i},c{c})"))
}

pub fn vote(i: u32, c: u32) -> Formula {
    Formula::atom(vote_atom(i, c))
}

/// `adm(c)`: somebody voted for `c`, spelled out as a disjunction.
pub fn adm(cfg: &CommitteeConfig, c: u32) -> Formula {
    Formula::disj((1..=cfg.n).map(|i| vote(i, c)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rules {
    /// Everybody votes for some candidate.
    pub alpha1: Formula,
    /// Nobody votes for two candidates.
    pub alpha2: Formula,
    /// Nobody votes for a co-author.
    pub alpha3: Formula,
}

pub fn rules(cfg: &CommitteeConfig) -> Rules {
    let members = 1..=cfg.n;
    let alpha1 = Formula::conj(members.clone().map(|i| Formula::disj((1..=cfg.m).map(|c| vote(i, c)))));
    let alpha2 = Formula::conj(members.clone().map(|i| {
        Formula::conj((1..=cfg.m).flat_map(|c| {
            (1..=cfg.m).filter(move |d| *d != c).map(move |d| Formula::implies(vote(i, c), Formula::not(vote(i, d))))
        }))
    }));
    let alpha3 = Formula::conj(members.map(|i| {
        let fs = cfg.coauthors.get(&i).cloned().unwrap_or_default();
        Formula::conj(fs.into_iter().map(|c| Formula::not(vote(i, c))))
    }));
    Rules { alpha1, alpha2, alpha3 }
}

/// The part of every base that does not depend on the member:
/// `¬adm(c1), adm(c2), ..., adm(cn), α1, α2, α3`.
fn shared(cfg: &CommitteeConfig) -> Vec<Formula> {
    let r = rules(cfg);
    let mut out = vec![Formula::not(adm(cfg, 1))];
    out.extend((2..=cfg.m).map(|c| adm(cfg, c)));
    out.extend([r.alpha1, r.alpha2, r.alpha3]);
    out
}

/// Bases as ordered lists: own vote first, then the shared part; for the
/// second variant member 1 also gets `B 2 β` for each shared `β`.
pub fn bases(cfg: &CommitteeConfig, variant: Variant) -> Result<BTreeMap<Agent, Vec<Formula>>, CommitteeError> {
    cfg.check()?;
    let common = shared(cfg);
    let mut out = BTreeMap::new();
    for i in 1..=cfg.n {
        let mut b = vec![vote(i, cfg.vote_of(i))];
        b.extend(common.iter().cloned());
        if variant == Variant::Second && i == 1 {
            b.extend(common.iter().map(|a| Formula::explicit(Agent(2), a.clone())));
        }
        out.insert(Agent(i), b);
    }
    Ok(out)
}

pub fn initial_state(cfg: &CommitteeConfig, variant: Variant) -> Result<State, CommitteeError> {
    let mut s = State::new();
    for (i, b) in bases(cfg, variant)? {
        s = s.with_base(i, b);
    }
    Ok(s.with_valuation((1..=cfg.n).map(|i| vote_atom(i, cfg.vote_of(i)))))
}

/// `Γ_i = B_i ∪ {¬α : α ∈ B_i}`, listed as `α, ¬α, β, ¬β, ...`.
pub fn vocabulary(cfg: &CommitteeConfig, variant: Variant) -> Result<VocabularyProfile, CommitteeError> {
    let mut g = VocabularyProfile::new();
    for (i, b) in bases(cfg, variant)? {
        for a in b {
            g.insert(i, a.clone());
            g.insert(i, Formula::not(a));
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Queries {
    /// The complete description of the actual votes.
    pub psi1: Formula,
    /// Like `ψ1`, except that member 1's vote is only known to go to one of
    /// `c2..cn` (an exclusive-or chain, not `c1`).
    pub psi2: Formula,
    /// `O 1 ψ1 & O 2 ψ2 & ... & O n ψ2`.
    pub phi0: Formula,
    /// `O 2 ψ2 & K 1 K 2 ψ2 & ~K 1 O 2 ψ2`.
    pub higher_order: Formula,
    /// `O 1 ψ1 & ... & O n ψ1`.
    pub chi0: Formula,
    /// Members 2..n privately learn member 1's vote, then `χ0`.
    pub dynamic: Formula,
}

fn member_literals(cfg: &CommitteeConfig, i: u32) -> Vec<Formula> {
    let v = cfg.vote_of(i);
    let mut out = vec![vote(i, v)];
    out.extend((1..=cfg.m).filter(|c| *c != v).map(|c| Formula::not(vote(i, c))));
    out
}

pub fn queries(cfg: &CommitteeConfig) -> Result<Queries, CommitteeError> {
    cfg.check()?;
    let psi1 = Formula::conj((1..=cfg.n).flat_map(|i| member_literals(cfg, i)));
    let mut p2 = vec![Formula::not(vote(1, 1)), Formula::xor_chain((2..=cfg.m).map(|c| vote(1, c)))];
    p2.extend((2..=cfg.n).flat_map(|i| member_literals(cfg, i)));
    let psi2 = Formula::conj(p2);
    let phi0 = Formula::conj(
        std::iter::once(Formula::only(Agent(1), psi1.clone()))
            .chain((2..=cfg.n).map(|i| Formula::only(Agent(i), psi2.clone()))),
    );
    let o2 = Formula::only(Agent(2), psi2.clone());
    let higher_order = Formula::conj([
        o2.clone(),
        Formula::at_least(Agent(1), Formula::at_least(Agent(2), psi2.clone())),
        Formula::not(Formula::at_least(Agent(1), o2)),
    ]);
    let chi0 = Formula::conj((1..=cfg.n).map(|i| Formula::only(Agent(i), psi1.clone())));
    let learned = vote(1, cfg.vote_of(1));
    let dynamic = (2..=cfg.n).rev().fold(chi0.clone(), |acc, i| Formula::expand(Agent(i), learned.clone(), acc));
    Ok(Queries { psi1, psi2, phi0, higher_order, chi0, dynamic })
}

/// The benchmark instance: `φ0` over the first variant, the higher-order
/// query over the second.
pub fn instance(cfg: &CommitteeConfig, variant: Variant) -> Result<ProblemInstance, CommitteeError> {
    let q = queries(cfg)?;
    let query = match variant {
        Variant::First => q.phi0,
        Variant::Second => q.higher_order,
    };
    instance_with_query(cfg, variant, query)
}

pub fn instance_with_query(
    cfg: &CommitteeConfig,
    variant: Variant,
    query: Formula,
) -> Result<ProblemInstance, CommitteeError> {
    let inst = ProblemInstance::new(
        AgentSet::numbered(cfg.n),
        cfg.atoms(),
        vocabulary(cfg, variant)?,
        initial_state(cfg, variant)?,
        query,
    )
    .expect("generated committee instances are valid");
    Ok(inst)
}
