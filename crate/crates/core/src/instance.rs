//! Problem instances and their JSON document form.
//!
//! ```json
//! {
//!   "agents": 2,
//!   "atoms": ["p", "q"],
//!   "gamma": { "1": ["p", "~p"], "2": [] },
//!   "base": { "1": ["p"] },
//!   "valuation": ["p"],
//!   "query": "K 1 p"
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{normalize, Agent, AgentSet, AtomId, AtomTable, Formula};
use crate::parser::{parse_formula, ParseError};
use crate::semantics::{State, UniversalContext, VocabularyProfile};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in {field}: {source}")]
    Formula {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("instance needs at least one agent")]
    NoAgents,
    #[error("in {field}: unknown agent {agent}")]
    UnknownAgent { field: String, agent: u32 },
    #[error("in {field}: atom `{atom}` is not declared")]
    UnknownAtom { field: String, atom: String },
    #[error("in {field}: `{formula}` must be free of K, W, O and expansions")]
    NotExplicit { field: String, formula: String },
    #[error("base of agent {agent} contains `{formula}`, which is outside its vocabulary")]
    BaseOutsideVocabulary { agent: u32, formula: String },
}

/// A model-checking problem: does `query` hold at `initial_state` within the
/// universal context of `vocab`?
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub agents: AgentSet,
    pub atoms: AtomTable,
    pub vocab: VocabularyProfile,
    pub initial_state: State,
    pub query: Formula,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    agents: u32,
    atoms: Vec<String>,
    #[serde(default)]
    gamma: BTreeMap<u32, Vec<String>>,
    #[serde(default)]
    base: BTreeMap<u32, Vec<String>>,
    #[serde(default)]
    valuation: Vec<String>,
    query: String,
}

fn parse_field(field: &str, text: &str) -> Result<Formula, InstanceError> {
    parse_formula(text).map_err(|source| InstanceError::Formula { field: field.into(), source })
}

impl ProblemInstance {
    /// Builds and validates an instance.
    pub fn new(
        agents: AgentSet,
        atoms: AtomTable,
        vocab: VocabularyProfile,
        initial_state: State,
        query: Formula,
    ) -> Result<Self, InstanceError> {
        let inst = ProblemInstance { agents, atoms, vocab, initial_state, query };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks the invariants: known agents and atoms, explicit-belief
    /// formulas in vocabularies and bases, and `B_i ⊆ Γ_i`.
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.agents.is_empty() {
            return Err(InstanceError::NoAgents);
        }
        let check_formula = |field: &str, f: &Formula, l0: bool| -> Result<(), InstanceError> {
            if l0 && !f.is_l0() {
                return Err(InstanceError::NotExplicit { field: field.into(), formula: f.to_string() });
            }
            for a in f.agents() {
                if !self.agents.contains(a) {
                    return Err(InstanceError::UnknownAgent { field: field.into(), agent: a.0 });
                }
            }
            for p in f.atoms() {
                if !self.atoms.contains(&p) {
                    return Err(InstanceError::UnknownAtom { field: field.into(), atom: p.to_string() });
                }
            }
            Ok(())
        };
        for i in self.vocab.agents() {
            if !self.agents.contains(i) {
                return Err(InstanceError::UnknownAgent { field: "gamma".into(), agent: i.0 });
            }
            for a in self.vocab.gamma(i) {
                check_formula("gamma", a, true)?;
            }
        }
        for (i, base) in self.initial_state.bases() {
            if !self.agents.contains(i) {
                return Err(InstanceError::UnknownAgent { field: "base".into(), agent: i.0 });
            }
            for a in base {
                check_formula("base", a, true)?;
                if !self.vocab.contains(i, a) {
                    return Err(InstanceError::BaseOutsideVocabulary { agent: i.0, formula: a.to_string() });
                }
            }
        }
        for p in self.initial_state.valuation() {
            if !self.atoms.contains(p) {
                return Err(InstanceError::UnknownAtom { field: "valuation".into(), atom: p.to_string() });
            }
        }
        check_formula("query", &self.query, false)?;
        if !self.query.is_well_formed() {
            return Err(InstanceError::NotExplicit { field: "query".into(), formula: self.query.to_string() });
        }
        Ok(())
    }

    pub fn from_json(document: &str) -> Result<Self, InstanceError> {
        let doc: Document = serde_json::from_str(document)?;
        if doc.agents == 0 {
            return Err(InstanceError::NoAgents);
        }
        let agents = AgentSet::numbered(doc.agents);
        let atoms = AtomTable::new(doc.atoms.iter().map(|a| AtomId::new(a)));
        let mut vocab = VocabularyProfile::new();
        for i in agents.iter() {
            vocab.declare(i);
        }
        for (i, items) in &doc.gamma {
            for s in items {
                vocab.insert(Agent(*i), parse_field("gamma", s)?);
            }
        }
        let mut state = State::new();
        for (i, items) in &doc.base {
            for s in items {
                state.add_belief(Agent(*i), parse_field("base", s)?);
            }
        }
        for p in &doc.valuation {
            state.set_true(AtomId::new(p));
        }
        let query = parse_field("query", &doc.query)?;
        ProblemInstance::new(agents, atoms, vocab, state, query)
    }

    /// Pretty-printed JSON document. Base elements are listed in
    /// vocabulary order.
    pub fn to_json(&self) -> String {
        let print = |fs: &mut dyn Iterator<Item = &Formula>| fs.map(|f| f.to_string()).collect::<Vec<_>>();
        let gamma = self.vocab.agents().map(|i| (i.0, print(&mut self.vocab.gamma(i).iter()))).collect();
        let base = self
            .initial_state
            .bases()
            .map(|(i, b)| {
                let mut items: Vec<&Formula> = b.iter().collect();
                items.sort_by_key(|f| self.vocab.index_of(i, f).unwrap_or(usize::MAX));
                (i.0, print(&mut items.into_iter()))
            })
            .collect();
        let doc = Document {
            agents: self.agents.len() as u32,
            atoms: self.atoms.iter().map(|a| a.to_string()).collect(),
            gamma,
            base,
            valuation: self.initial_state.valuation().map(|a| a.to_string()).collect(),
            query: self.query.to_string(),
        };
        serde_json::to_string_pretty(&doc).expect("instance documents always serialize")
    }

    pub fn context(&self) -> UniversalContext {
        UniversalContext::new(self.vocab.clone(), self.atoms.clone())
    }

    pub fn with_query(&self, query: Formula) -> Self {
        ProblemInstance { query, ..self.clone() }
    }

    /// The same instance with derived connectives rewritten everywhere, so
    /// base membership compares normal forms. Atoms of the query that are
    /// missing from the table are appended.
    pub fn normalized(&self) -> Self {
        let mut vocab = VocabularyProfile::new();
        for i in self.vocab.agents() {
            vocab.declare(i);
            for a in self.vocab.gamma(i) {
                vocab.insert(i, normalize(a));
            }
        }
        let initial_state = self.initial_state.normalized();
        let query = normalize(&self.query);
        let mut atoms = self.atoms.clone();
        let mut extra = BTreeSet::new();
        query.collect_atoms(&mut extra);
        for p in extra {
            atoms.insert(p);
        }
        ProblemInstance { agents: self.agents.clone(), atoms, vocab, initial_state, query }
    }
}
