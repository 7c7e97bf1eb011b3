//! Pauli-flow algorithms for open graphs from measurement-based quantum
//! computation.
//!
//! An open graph is an undirected graph with designated input and output
//! vertices; a measurement labelling assigns one of the bases
//! `X, Y, Z, XY, XZ, YZ` to every non-output. A Pauli flow is a correction
//! strategy certifying that such a pattern can be run deterministically.
//! This crate provides:
//!
//! - exact linear algebra over GF(2) and over extension fields GF(2^k)
//!   ([`gf2`], [`field`]),
//! - open graphs, labellings and their (reduced) adjacency matrices,
//!   with a JSON interchange format ([`graph`]),
//! - definitional flow verification, flow extraction from right inverses,
//!   and label simplification ([`flow`]),
//! - randomized rank maximization for matrices with multi-affine entries,
//!   each variable confined to one row or one column ([`maxrank`]),
//! - the randomized decision procedure for "does any labelling admit a
//!   Pauli flow", and labelling extraction ([`search`]),
//! - output reduction, input discovery and minimal output sets ([`reduce`]),
//! - exhaustive ground-truth procedures at small scale ([`oracle`]).
//!
//! The randomized procedures have one-sided error: a NO answer is always
//! exact, a YES answer is correct with probability at least `1 - p` for a
//! caller-chosen `p`.

pub mod field;
pub mod flow;
pub mod gf2;
pub mod graph;
pub mod maxrank;
pub mod oracle;
pub mod reduce;
pub mod search;

pub use field::{FieldContext, FieldElement, FieldMatrix};
pub use flow::{Condition, FlowError, PauliFlow, Violation};
pub use gf2::Gf2Matrix;
pub use graph::{GraphError, Labelling, MeasLabel, OpenGraph};
pub use maxrank::{Expr, MaxRankError, Valuation, VarId, VarMatrix};
pub use oracle::{OracleError, OracleLimits};
pub use reduce::{ReduceError, ReductionResult};
pub use search::{SearchConfig, SearchError, SearchOutcome};
