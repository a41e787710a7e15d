pub mod error;
pub mod expr;
pub mod fluid;
pub mod hamiltonian;
pub mod integrals;
pub mod jetcheck;
pub mod manifold;
pub mod scenario;
pub mod solver;
