//! Real-time scheduling toolkit for multi-cell, multi-channel wireless
//! networks with probabilistic per-packet deadline guarantees.
//!
//! * [`graph`]: the conflict graph and its clique / independent-set queries.
//! * [`traffic`]: periodic traffic tuples, work demand, random traffic.
//! * [`topology`]: random multi-cell deployments and their conflict graphs.
//! * [`schedulability`]: feasible sets and the per-link schedulability test.
//! * [`oracle`]: exhaustive whole-graph reference routines.
//! * [`scheduler`]: the local-deadline-partition scheduler and simulator.
//! * [`experiment`]: end-to-end sweeps, metrics and persistence.

pub mod cliques;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod par;
pub mod rational;
pub mod schedulability;
pub mod scheduler;
pub mod stats;
pub mod topology;
pub mod traffic;

pub use error::{Error, Result};
pub use graph::{ConflictGraph, LinkId, LinkSet};
pub use rational::Rational;
pub use traffic::{LinkTraffic, Slot, TrafficSet};
