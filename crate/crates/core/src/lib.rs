//! Eigenerosion and phase-field approximations of Griffith fracture on a
//! center-crack panel under equibiaxial tension, with a bilinear finite
//! element backend and a convergence-study harness.

pub mod analytic;
pub mod config;
pub mod eigenerosion;
pub mod error;
pub mod fem;
pub mod grid;
pub mod harness;
pub mod nonlocal;
pub mod phasefield;

pub use analytic::{reference_energies, ReferenceEnergies};
pub use config::{load_config, parse_config, EpsilonSetting, MaterialParams, Method, ProblemParams, Reference, StudyConfig};
pub use eigenerosion::{solve_ee, EEOptions, EEResult, EEVariant};
pub use error::{Error, Result};
pub use fem::{EnergyBreakdown, LinearSolverKind, QuadratureMode, VectorField};
pub use grid::{build_grid, Grid};
pub use harness::{run_study, PowerLawFit, StudyRecord, StudyRun};
pub use phasefield::{PFParams, PFState, PhaseField};
