//! Stochastic series expansion quantum Monte Carlo for the transverse-field
//! Ising model on periodic hypercubic lattices.
//!
//! Two quantization axes are available. The field-diagonal (x) basis uses
//! bond vertices with directed loops and measures ⟨J^x⟩ together with the
//! equal-time S^y correlations reconstructed during loop construction. The
//! Ising-diagonal (z) basis uses multi-branch clusters and measures Var(J^z)
//! and the imaginary-time-integrated J^z correlator behind QV(J^z).

pub mod backend;
pub mod binning;
pub mod chain;
pub mod checkpoint;
pub mod error;
pub mod run;
pub mod string;
pub mod vertex;

pub use backend::{combine_reports, point_seed, sse_observables, SseBackend, SseObservables};
pub use binning::{Binner, QmcEstimate};
pub use chain::{Representation, SseChain, SseModel};
pub use error::{Result, SseError};
pub use run::{run_sse, sse_run, validate_qmc_spec, QmcReport, SseParams, SseRun};
pub use string::{Op, OperatorString};
