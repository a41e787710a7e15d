//! Equation-of-state algebra and grid-resident fluid state.

mod eos;
pub mod snapshot;
mod state;

pub use eos::{special_gamma, Eos, EosConfig, EosTerm, PolytropicForm, PressureJet, RHO_REF, SPECIAL_GAMMA_TOL};
pub use state::{FluidState, Grid};
