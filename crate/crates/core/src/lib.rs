//! Exact diagonalization of the periodic spin-1/2 J1-J2 Heisenberg ring with
//! two-site quantum correlation and frustration measures.

pub mod analytic;
pub mod basis;
pub mod eigensolver;
pub mod error;
pub mod frustration;
pub mod hamiltonian;
pub mod lanczos;
pub mod linalg;
pub mod measures;
mod optimize;
pub mod parallel;
pub mod rdm;
pub mod sweep;

pub use basis::{enumerate_sector, translate, ChainSpec, SzSectorBasis};
pub use eigensolver::{assemble_low_spectrum, low_energies, LevelEnergy, LowSpectrum, SolverConfig, SpectrumLevel};
pub use error::{Error, Result};
pub use parallel::Execution;
pub use rdm::{two_site_rdm, TwoSiteRdm};
