//! Exact solution of the infinite-range transverse-field Ising model in the
//! total-spin basis, with Holstein–Primakoff and strong-field predictions.

pub mod hp;
pub mod sector;
pub mod solver;

pub use hp::{hp_predictions, perturbative_xi, perturbative_xi_for, HpPrediction};
pub use sector::{ln_sector_degeneracy, sector_degeneracy, sector_hamiltonian, SpinSectorBasis, SymTridiagonal};
pub use solver::{collective_observables, CollectiveBackend, CollectiveSolver};
