//! Design, optimization and simulation of demand-responsive connector
//! (DRC) feeder buses under fully-flexible and semi-flexible routing.
//!
//! The crate is organized bottom-up:
//!
//! - [`params`]: scenario inputs and zone geometry
//! - [`tsp`]: exact Manhattan tours for small point sets
//! - [`tour_length`] and [`calibration`]: expected tour-length laws
//! - [`expectations`]: Poisson occupancy moments and Taylor expectations
//! - [`costs`]: per-zone and system generalized cost
//! - [`optimizer`]: exhaustive discrete search with per-zone headway optimization
//! - [`simulator`]: Monte Carlo operational validation
//! - [`experiments`]: sweeps, crossover search and report tables

pub mod calibration;
pub mod costs;
pub mod error;
pub mod expectations;
pub mod experiments;
pub mod optimizer;
pub mod params;
pub mod rng;
pub mod simulator;
pub mod tour_length;
pub mod tsp;

pub use error::{DrcError, Result};
pub use params::{load_scenario, make_grid, ScenarioParams, ZoneGrid, ZoneIndex};
