//! Scenario orchestration shared by the command line and the acceptance harness.

mod config;
mod report;
mod run;
mod verify;

pub use config::{
    Built, ChartConfig, CurveConfig, DensityConfig, DomainConfig, Expectation, GridConfig, HamiltonianConfig, InitialConfig,
    JetConfig, Scenario, Tolerances, BUNDLED,
};
pub use report::{Check, Outcome, Report, RunOptions, SCHEMA_VERSION};
pub use run::{run_simulation, RunResult};
pub use verify::{
    geometry_report, simulate, verify_circulation, verify_densities, verify_determining, verify_hamiltonian, Command,
};

#[cfg(test)]
mod tests;
