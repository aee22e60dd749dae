//! Semidefinite-programming entanglement measures for bipartite states and
//! quantum channels.
//!
//! The crate is `no_std` and only needs an allocator. It provides
//!
//! * dense complex linear algebra with tensor-factor awareness ([`linalg`]),
//! * channel construction and application in Kraus and Choi form ([`channel`]),
//! * a primal-dual interior-point solver for small dense SDPs ([`sdp`]),
//! * the max-Rains quantities `W`, `Γ` and the transpose-bound `Q_Θ` ([`rains`]),
//! * the max-relative entropy of entanglement `W_sep`, `Σ` ([`emax`]),
//! * feasible-pair constructions and protocol-level checks showing that
//!   pre-shared entanglement does not raise these channel quantities
//!   ([`amortization`]).

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is the NaN-rejecting form throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod amortization;
pub mod channel;
pub mod emax;
pub mod error;
pub mod linalg;
pub mod rains;
pub mod random;
pub mod sdp;

pub use channel::{BipartiteState, Channel};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DimSpec, RealMatrix, C64};
pub use rains::{MeasureResult, SolveConfig};
pub use sdp::{SdpProblem, SdpSolution, SolveStatus};


