//! Three-qubit simulator for distributing entanglement between two parties
//! through a carrier qubit that stays separable from them.
//!
//! Qubits are ordered `A`, `B`, `C` with `A` the most significant bit, so the
//! basis index of `|abc⟩` is `4a + 2b + c`.
//!
//! ```
//! use edss::protocol::{run_protocol, ProtocolParams};
//!
//! let result = run_protocol(&ProtocolParams::default()).unwrap();
//! assert!(result.is_feasible());
//! ```

// Comparisons like `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod matcore;
pub mod protocol;
pub mod simplex;
pub mod states;
pub mod sweeps;

pub use entanglement::{negativity, Bipartition, NegativityValue};
pub use error::{Error, Result};
pub use matcore::CMatrix;
pub use protocol::{run_protocol, MeasurementSpec, ProtocolParams, ProtocolResult};
pub use states::{DensityMatrix, QubitId, QubitSet};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/states.md")]
    pub struct States;
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub struct Dynamics;
    #[doc = include_str!("../../../book/src/protocol.md")]
    pub struct Protocol;
    #[doc = include_str!("../../../book/src/extraction.md")]
    pub struct Extraction;
    #[doc = include_str!("../../../book/src/sweeps.md")]
    pub struct Sweeps;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
