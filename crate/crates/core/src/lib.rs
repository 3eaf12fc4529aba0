//! Read-once formula structure analysis, random variable partitions,
//! partial-derivative-matrix rank measures, three explicit hard polynomial
//! families, and a seeded Monte Carlo harness that checks the associated rank
//! bounds and probability claims at desk scale.
//!
//! The crate is organized along the pipeline:
//!
//! * [`formula`] — arithmetic formula ASTs, parsing, read-once validation,
//!   gate census and the `s_F` measure, plus random generators.
//! * [`partition`] — the Y/Z and four-way variable partition distributions.
//! * [`poly`] — sparse polynomial arithmetic over a prime [`field`].
//! * [`rank`] — partial derivative matrices, the coefficient-matrix
//!   generalization, exact rank, and permanent-specific matrices.
//! * [`structure`] — monotone value abstractions, rank-(1,2)-separators,
//!   depth-1 block extraction/classification, census rank bounds, special
//!   positions and the swap map on grid partitions.
//! * [`hardpolys`] — products of linear forms, the interval-recursive
//!   full-rank polynomial, and the permanent.
//! * [`harness`] — named, seeded experiments with CSV/JSON reports.

pub mod field;
pub mod formula;
pub mod hardpolys;
pub mod harness;
pub mod partition;
pub mod poly;
pub mod presets;
pub mod rank;
pub mod rng;
pub mod structure;

pub use field::{Field, DEFAULT_PRIME};
pub use formula::{Formula, FormulaBuilder, GateCensus, Node, NodeId, Var, VarId};
pub use partition::{DParams, Partition, PartitionMatrix, PartitionStats, Target};
pub use poly::SparsePoly;
pub use rank::RankMatrix;
