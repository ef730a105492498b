//! Deterministic discrete-event simulation of a multi-hop network running
//! one matching request, plus adversary views and parameter sweeps.

mod adversary;
mod engine;
mod privacy;
mod sweep;
mod topology;

pub use adversary::{
    byte_scan, dictionary_attack, eavesdropper_view, guess_space_log2, DictionaryReport,
};
pub use engine::{
    build_participants, run_scenario, Metrics, Scenario, Session, SimEvent, SimTrace, TraceEvent,
};
pub use privacy::{privacy_labels, PrivacyLabels, PrivacyLevel};
pub use sweep::{run_cell, sweep, sweep_cells, RequestSource, SweepCell, SweepGrid, SweepRow};
pub use topology::{build_topology, Topology, TopologyKind};

use crate::profile::ProfileError;
use crate::protocol::ProtocolError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("a network needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("too many nodes: {0}")]
    TooManyNodes(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("population has {population} profiles but the topology has {nodes} nodes")]
    SizeMismatch { population: usize, nodes: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}
