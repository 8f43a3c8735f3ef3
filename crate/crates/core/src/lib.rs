//! Semi-supervised attribute reduction for partially labeled categorical
//! decision tables.
//!
//! The pipeline: [`tabular`] loads and encodes a table, [`proxy`] assigns a
//! single prior-guided proxy label to every unlabeled row, [`reduction`]
//! greedily builds a reduct by granular conditional entropy
//! ([`measures`]) over equivalence-class [`partition`]s, and [`harness`]
//! scores reducts with repeated k-NN cross-validation against the
//! [`baselines`].

pub mod baselines;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod harness;
pub mod measures;
pub mod partition;
pub mod proxy;
pub mod reduction;
pub mod report;
pub mod tabular;

pub use error::{Error, Result};
pub use measures::Bits;
pub use partition::{AttributeSubset, Partition};
pub use proxy::{ProxyDecision, ProxyParams};
pub use reduction::{ReduceOptions, ReductTrace};
pub use tabular::{ClassLabel, DecisionTable, RawTable};
