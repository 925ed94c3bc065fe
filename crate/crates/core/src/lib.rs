//! Maslov index and Evans function of linear Hamiltonian spectral problems
//! J u' = B(x, lambda) u on R^2 and R^4, computed through the second
//! exterior power of the phase space.

pub mod asymptotics;
pub mod error;
pub mod evans;
pub mod exterior;
pub mod integrator;
pub mod kdv5;
pub mod linalg;
pub mod maslov;
pub mod problems;
pub mod scan;
pub mod verify;

pub use error::{MaslovError, Result};
pub use problems::{get_problem, Params, Problem};
