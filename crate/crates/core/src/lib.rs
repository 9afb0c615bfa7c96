//! Embedding temporal logic (ETL) over finite traces of embeddings.
//!
//! Atomic propositions are *embedding predicates*: the aggregated distance from the current
//! embedding to a set of target embeddings, compared against a threshold. Formulas combine
//! predicates with negation, conjunction and until (plus the usual sugar for disjunction,
//! eventually and always) and are evaluated either qualitatively ([`semantics::sat`]) or
//! quantitatively ([`semantics::robustness`]) over a bounded horizon.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, dataset generation and the
//! command-line front end live in the companion `etlmon` crate.
//!
//! ```
//! use etl_core::semantics::{robustness, ScoredTrace};
//! use etl_core::embedding::Comparison;
//! use etl_core::spec::Formula;
//!
//! // A single predicate with threshold 0.5 and an injected distance trace.
//! let trace = ScoredTrace::from_scores(
//!     &[("near", 0.5, Comparison::Le)],
//!     &[vec![0.1, 0.2, 0.7]],
//! ).unwrap();
//!
//! let always_near = Formula::always(Formula::pred("near"));
//! let rho = robustness(&always_near, &trace, 0, 2).unwrap();
//! assert!((rho - (0.5 - 0.7)).abs() < 1e-12);
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod calibration;
pub mod dubins;
pub mod embedding;
pub mod harness;
mod math;
pub mod monitor;
pub mod semantics;
pub mod spec;

pub use embedding::{
    Aggregation, Comparison, DistanceFn, Embedding, EmbeddingError, EmbeddingPredicate, TargetSet,
};
pub use monitor::{IncrementalMonitor, Verdict, VerdictTrace};
pub use semantics::{robustness, sat, EvalConfig, EvalError, ScoredTrace, Trace, Valuation};
pub use spec::{parse, Formula, SpecDocument, SpecError};
