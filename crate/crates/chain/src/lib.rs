//! Exact free-fermion solution of the open transverse-field Ising chain:
//! static correlators by Pfaffians, real- and imaginary-time correlators,
//! quantum variance and quantum Fisher information of J^z.

pub mod correlators;
pub mod dynamic;
pub mod error;
pub mod observables;
pub mod pfaffian;
pub mod quadrature;
pub mod solution;

pub use correlators::{transverse_magnetization, var_jy, var_jy_subsystem, var_jz, yy_correlation, zz_correlation, MajoranaCorrelators};
pub use dynamic::{
    dynamic_zz_correlation, dynamical_structure_factor, qfi_from_dsf, qv_jz, DsfWindow, QfiEstimate, QfiParams, QvEstimate,
    StructureFactor,
};
pub use error::{ChainError, Result};
pub use observables::{chain_observables, ChainBackend, ChainOptions};
pub use pfaffian::{pfaffian, Square};
pub use solution::{solve_chain, FermionSolution};
