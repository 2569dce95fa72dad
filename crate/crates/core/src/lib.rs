//! Makespan scheduling on related machines with optional allowed-machine
//! sets: heuristics, local optimality, exact solving, smoothed instance
//! sampling and lower-bound instance families.

pub mod algorithms;
pub mod classification;
pub mod constructions;
pub mod error;
pub mod harness;
pub mod json;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod smoothing;

pub use error::{Error, Result};
pub use model::{Instance, MachineSet, Schedule, EPS};
