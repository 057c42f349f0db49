//! Model checking for multi-agent "only believing" over belief bases.
//!
//! A state assigns every agent a finite base of explicit beliefs and fixes a
//! valuation. Implicit belief is computed from the bases: agent `i`
//! considers possible every context state that satisfies all of `i`'s base.
//! The context is the universal one induced by a per-agent vocabulary.
//!
//! Two engines decide `(S0, S_Γ) ⊨ φ`:
//!
//! * [`semantics::check_direct`] labels every context state (small instances only);
//! * [`symbolic::check_symbolic`] translates to a leveled QBF and evaluates it
//!   with the crate's own ROBDD kernel, quantifying level blocks eagerly.
//!
//! ```
//! use basecheck::parser::parse_instance;
//! use basecheck::symbolic::{check_symbolic, Limits, Verdict};
//!
//! let doc = r#"{
//!   "agents": 1, "atoms": ["p"],
//!   "gamma": {"1": ["p"]}, "base": {"1": ["p"]},
//!   "valuation": ["p"], "query": "O 1 p"
//! }"#;
//! let inst = parse_instance(doc).unwrap();
//! let out = check_symbolic(&inst, &Limits::default()).unwrap();
//! assert_eq!(out.verdict, Verdict::True);
//! ```

pub mod bdd;
pub mod committee;
pub mod dynamics;
pub mod formula;
pub mod instance;
pub mod metrics;
pub mod parser;
pub mod qbf;
pub mod semantics;
pub mod symbolic;

pub use formula::{Agent, AgentSet, AtomId, AtomTable, Formula, Kind};
pub use instance::ProblemInstance;
pub use semantics::{State, UniversalContext, VocabularyProfile};
