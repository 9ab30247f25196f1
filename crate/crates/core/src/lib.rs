//! Time-slotted link scheduling under one-hop interference.
//!
//! Every slot's schedule is a matching. The node-based service-balanced
//! schedulers (NSB and LC-NSB) weight nodes by workload and recent service
//! and pick a maximum vertex-weighted matching; MVM, MWM, GMM and MM are
//! provided as baselines. The crate also has evacuation and throughput run
//! loops, seeded traffic and topology generators, DIMACS ingestion and
//! property suites for the scheduling invariants.

pub mod engine;
pub mod error;
pub mod graph;
pub mod io;
pub mod matching;
pub mod report;
pub mod schedulers;
pub mod topogen;
pub mod traffic;
pub mod validate;

pub use engine::{MetricsRecord, Mode};
pub use error::{Error, Result};
pub use graph::{Matching, NetworkState, Topology};
pub use schedulers::{Policy, Scheduler};
pub use topogen::EvacInstance;
pub use traffic::TrafficModel;
