//! Monte-Carlo simulation of uncertain project networks combined with
//! per-iteration preference-based optimisation of planning variables or
//! mitigation measures.
//!
//! Each iteration samples a realization of the project (activity
//! durations, common-cause factors, risk events, measure effects), searches
//! the decision space with a genetic algorithm against that frozen
//! realization, and records the chosen decision. Percentiles and
//! criticality indexes are computed over the stored records.
//!
//! With the default `parallel` feature the iterations run on the rayon
//! thread pool; every iteration has its own random stream, so results are
//! identical with or without the feature.

pub mod engine;
pub mod error;
pub mod network;
pub mod objectives;
pub mod offshore;
pub mod optimizer;
pub mod preference;
pub mod rng;
pub mod sampling;
pub mod scenario;
pub mod stats;

pub use engine::{run, run_with, Execution, ModeChoice, Scenario, SimulationRecord};
pub use error::{Error, Result};
pub use rng::RngHandle;
pub use sampling::ThreePointEstimate;
