//! Cost-optimal logistics for a lunar habitat, with or without in-situ
//! resource production.
//!
//! A scenario is built into a time-expanded multi-commodity flow network,
//! compiled to a mixed-integer program, solved with the bundled simplex and
//! branch-and-bound, and the resulting plan is replayed forward against the
//! physical rate tables.
//!
//! ```no_run
//! use lunar_logistics::scenario::{load_scenario, shipped, solve_scenario};
//!
//! let config = load_scenario(shipped("isru_baseline").unwrap()).unwrap();
//! let outcome = solve_scenario(&config).unwrap();
//! println!("{}", outcome.solution.objective);
//! ```

pub mod milp;
pub mod network;
pub mod replay;
pub mod report;
pub mod scenario;
pub mod transform;
