//! Core types for transverse-field Ising metrology: model specification,
//! exact-diagonalization oracle, spectral QFI/QV formulas, metrological
//! figures of merit, power-law fits and phase-diagram scans.

pub mod error;
pub mod exact;
pub mod fit;
pub mod metrology;
pub mod model;
pub mod operator;
pub mod report;
pub mod scan;
pub mod spectral;
pub mod symmetry;

pub use error::{ModelError, Result};
pub use exact::{build_dense_hamiltonian, exact_observables, ExactSolver};
pub use fit::{fit_power_law, FitPoint, ScalingFit};
pub use model::{Boundary, Dimension, Lattice, ModelSpec, SubsystemGeometry, SubsystemShape};
pub use report::{Estimate, Flag, ObservableReport};
pub use scan::{scan_phase_diagram, ObservableBackend, OracleBackend, ScanPoint};
pub use spectral::{qfi_spectral, qv_spectral, SpectralDecomposition};
