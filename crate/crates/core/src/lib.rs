//! Exact inference and simulation for quantum retrodiction.
//!
//! Given a preparation ensemble, optional unitary dynamics, and a POVM
//! measurement on a finite-dimensional system, this crate computes the
//! predictive and retrodictive conditional probability tables, constructs
//! retrodictive states and evolves them backward in time, implements the
//! rival symmetrized (FSB) formulation for comparison, and checks every
//! analytic probability against a seeded Monte-Carlo frequency estimate.

pub mod dynamics;
pub mod fsb;
pub mod inference;
pub mod linalg;
pub mod mc;
pub mod scenario;
pub mod state;

pub use dynamics::{EvolvingState, TimeDirection};
pub use fsb::{FsbDecomposition, OutcomeDependenceReport};
pub use inference::ProbabilityTable;
pub use linalg::{ComplexMatrix, Spectrum};
pub use mc::{EmpiricalTable, RunRecord, TriadEstimate};
pub use scenario::{McSettings, ScenarioFile, SpinTriadScenario};
pub use state::{DensityOperator, PostselectionBias, Povm, PreparationEnsemble, StateVector};
