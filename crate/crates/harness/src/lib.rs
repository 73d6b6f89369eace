//! Drivers, file formats and configuration for the porous medium solvers
//! in `pme-core`.

pub mod config;
pub mod error;
pub mod meshio;
pub mod output;
pub mod run;

pub use config::{parse_config, RunConfig, Scheme};
pub use error::{HarnessError, Result};
pub use run::{run_convergence, run_simulation, ConvergenceRow, FinalState, Simulation, TimeSeriesRecord};
