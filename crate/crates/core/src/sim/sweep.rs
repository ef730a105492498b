//! Parameter grids over (protocol, p, θ, seed).

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::profile::{Attribute, RequestSpec};
use crate::protocol::{NodeId, ParticipantState, ProtocolId, SimTime};

use super::{run_scenario, Metrics, Scenario, SimError, Topology};

#[derive(Debug, Clone, PartialEq)]
pub enum RequestSource {
    /// The same optional attributes in every cell.
    Fixed(Vec<Attribute>),
    /// The first `m_t` attributes of a seed-chosen initiator.
    FromInitiator { m_t: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub protocols: Vec<ProtocolId>,
    pub ps: Vec<u32>,
    pub thetas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub source: RequestSource,
    pub base_delay: SimTime,
    pub per_key_delay: SimTime,
    pub kappa_max: Option<usize>,
}

impl SweepGrid {
    pub fn new(
        protocols: Vec<ProtocolId>,
        ps: Vec<u32>,
        thetas: Vec<f64>,
        seeds: Vec<u64>,
        source: RequestSource,
    ) -> Self {
        SweepGrid {
            protocols,
            ps,
            thetas,
            seeds,
            source,
            base_delay: 100,
            per_key_delay: 1_000,
            kappa_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub protocol: ProtocolId,
    pub p: u32,
    pub theta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: SweepCell,
    pub initiator: NodeId,
    pub metrics: Metrics,
}

/// Cells in output order: protocol, then p, then θ, then seed.
pub fn sweep_cells(grid: &SweepGrid) -> Vec<SweepCell> {
    let mut out = Vec::new();
    for &protocol in &grid.protocols {
        for &p in &grid.ps {
            for &theta in &grid.thetas {
                for &seed in &grid.seeds {
                    out.push(SweepCell {
                        protocol,
                        p,
                        theta,
                        seed,
                    });
                }
            }
        }
    }
    out
}

fn pick_initiator(
    participants: &[ParticipantState],
    seed: u64,
    min_attrs: usize,
) -> Option<NodeId> {
    let n = participants.len();
    let start = ChaCha20Rng::seed_from_u64(seed).random_range(0..n);
    (0..n)
        .map(|k| (start + k) % n)
        .find(|&i| participants[i].profile().len() >= min_attrs)
        .map(|i| i as NodeId)
}

pub fn run_cell(
    participants: &[ParticipantState],
    topology: &Topology,
    grid: &SweepGrid,
    cell: SweepCell,
) -> Result<SweepRow, SimError> {
    let (initiator, attrs) = match &grid.source {
        RequestSource::Fixed(attrs) => {
            let start = ChaCha20Rng::seed_from_u64(cell.seed).random_range(0..participants.len());
            (start as NodeId, attrs.clone())
        }
        RequestSource::FromInitiator { m_t } => {
            let i = pick_initiator(participants, cell.seed, *m_t).ok_or(
                SimError::InvalidParameter("no profile holds m_t attributes"),
            )?;
            (
                i,
                participants[i as usize]
                    .profile()
                    .iter()
                    .take(*m_t)
                    .cloned()
                    .collect(),
            )
        }
    };
    let spec = RequestSpec::with_threshold(Vec::new(), attrs, cell.theta)?;
    let mut scenario = Scenario::new(cell.protocol, spec, cell.p, initiator, cell.seed);
    scenario.base_delay = grid.base_delay;
    scenario.per_key_delay = grid.per_key_delay;
    scenario.kappa_max = grid.kappa_max;
    let (_, metrics) = run_scenario(participants, topology, &scenario)?;
    Ok(SweepRow {
        cell,
        initiator,
        metrics,
    })
}

/// Runs every cell in order on one thread.
pub fn sweep(
    participants: &[ParticipantState],
    topology: &Topology,
    grid: &SweepGrid,
) -> Result<Vec<SweepRow>, SimError> {
    sweep_cells(grid)
        .into_iter()
        .map(|c| run_cell(participants, topology, grid, c))
        .collect()
}
