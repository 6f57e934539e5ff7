//! Belief-function fusion of expert opinions on Shafer and free DSm frames.
//!
//! Focal elements are sets of Venn cells, so one set of combination rules
//! and decision functions serves both models. See [`lattice`] for the
//! encoding.
//!
//! ```
//! use evifuse::expert_models::{build_m4, ExpertDeclaration};
//! use evifuse::{combine_conjunctive, decide_singletons, Criterion};
//!
//! let e1 = build_m4(&ExpertDeclaration::says_a(0.6)?)?;
//! let e2 = build_m4(&ExpertDeclaration::says_both(0.5, 0.6, 0.5, 0.4)?)?;
//! let m = combine_conjunctive(&[e1, e2])?;
//! let report = decide_singletons(&m, Criterion::Pignistic)?;
//! assert_eq!(report.chosen.to_string(), "A");
//! # Ok::<(), evifuse::Error>(())
//! ```

pub mod corpus;
pub mod decision;
pub mod error;
pub mod expert_models;
pub mod fusion;
pub mod lattice;
pub mod mass;
pub mod stability;

pub use decision::{decide, decide_singletons, Criterion, DecisionReport};
pub use error::{Error, Result};
pub use fusion::{combine_conjunctive, combine_pcr5, combine_pcr6, restrict_to_exclusive, Rule};
pub use lattice::{CellSet, FocalElement, Frame, Model};
pub use mass::{MassFunction, World};
