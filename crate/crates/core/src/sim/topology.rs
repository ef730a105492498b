//! Static network graphs.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::protocol::{NodeId, SimTime};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyKind {
    Complete,
    Ring,
    /// Row-major grid with `ceil(sqrt(n))` columns, 4-neighbourhood.
    Grid,
    /// Nodes uniform in the unit square, linked when closer than `radius`.
    RandomGeometric {
        radius: f64,
    },
    /// Node 0 linked to everyone else: a single broadcast reaches all.
    Star,
}

#[derive(Debug, Clone)]
pub struct Topology {
    adjacency: Vec<Vec<NodeId>>,
    edge_delay: SimTime,
}

pub fn build_topology(
    kind: TopologyKind,
    n: usize,
    edge_delay: SimTime,
    seed: u64,
) -> Result<Topology, SimError> {
    if n < 2 {
        return Err(SimError::TooFewNodes(n));
    }
    if n > NodeId::MAX as usize {
        return Err(SimError::TooManyNodes(n));
    }
    let mut adj = vec![Vec::new(); n];
    let mut link = |a: usize, b: usize| {
        adj[a].push(b as NodeId);
        adj[b].push(a as NodeId);
    };
    match kind {
        TopologyKind::Complete => {
            for a in 0..n {
                for b in a + 1..n {
                    link(a, b);
                }
            }
        }
        TopologyKind::Ring => {
            if n == 2 {
                link(0, 1);
            } else {
                for a in 0..n {
                    link(a, (a + 1) % n);
                }
            }
        }
        TopologyKind::Grid => {
            let cols = libm::ceil(libm::sqrt(n as f64)) as usize;
            for a in 0..n {
                if (a + 1) % cols != 0 && a + 1 < n {
                    link(a, a + 1);
                }
                if a + cols < n {
                    link(a, a + cols);
                }
            }
        }
        TopologyKind::Star => {
            for b in 1..n {
                link(0, b);
            }
        }
        TopologyKind::RandomGeometric { radius } => {
            if radius.is_nan() || radius <= 0.0 {
                return Err(SimError::InvalidParameter("radius must be positive"));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let pts: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
                .collect();
            // bucket into cells of side >= radius so only adjacent cells need checking
            let cells = ((1.0 / radius) as usize).clamp(1, 1 << 12);
            let cell = |v: f64| ((v * cells as f64) as usize).min(cells - 1);
            let mut grid = vec![Vec::new(); cells * cells];
            for (i, &(x, y)) in pts.iter().enumerate() {
                grid[cell(y) * cells + cell(x)].push(i);
            }
            let r2 = radius * radius;
            for (a, &(x, y)) in pts.iter().enumerate() {
                let (cx, cy) = (cell(x), cell(y));
                for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
                    for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                        for &b in &grid[gy * cells + gx] {
                            let (dx, dy) = (pts[b].0 - x, pts[b].1 - y);
                            if b > a && dx * dx + dy * dy < r2 {
                                link(a, b);
                            }
                        }
                    }
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Ok(Topology {
        adjacency: adj,
        edge_delay,
    })
}

impl Topology {
    pub fn from_adjacency(
        adjacency: Vec<Vec<NodeId>>,
        edge_delay: SimTime,
    ) -> Result<Self, SimError> {
        let n = adjacency.len();
        for (a, list) in adjacency.iter().enumerate() {
            for &b in list {
                if b as usize >= n
                    || b as usize == a
                    || !adjacency[b as usize].contains(&(a as NodeId))
                {
                    return Err(SimError::InvalidParameter(
                        "adjacency must be undirected without self loops",
                    ));
                }
            }
        }
        Ok(Topology {
            adjacency,
            edge_delay,
        })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node as usize]
    }

    pub fn edge_delay(&self) -> SimTime {
        self.edge_delay
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Hop distance from `from` to every node; `None` when unreachable.
    pub fn hops_from(&self, from: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::from([from]);
        dist[from as usize] = Some(0);
        while let Some(a) = queue.pop_front() {
            let d = dist[a as usize].unwrap();
            for &b in self.neighbors(a) {
                if dist[b as usize].is_none() {
                    dist[b as usize] = Some(d + 1);
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    /// Size of the connected component containing `node`.
    pub fn component_size(&self, node: NodeId) -> usize {
        self.hops_from(node).iter().filter(|d| d.is_some()).count()
    }

    pub fn is_connected(&self) -> bool {
        self.component_size(0) == self.len()
    }

    /// Largest hop distance from `node` within its component.
    pub fn eccentricity(&self, node: NodeId) -> u32 {
        self.hops_from(node)
            .into_iter()
            .flatten()
            .max()
            .unwrap_or(0)
    }
}
