use alloc::vec;
use alloc::vec::Vec;

use crate::digest::Digest;

use super::{MatchError, RemainderVector};

/// Per request position: the participant's hash index, or a hash to be
/// recovered through the hint matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Index(usize),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidateAssignment {
    slots: Vec<Slot>,
}

impl CandidateAssignment {
    pub fn new(slots: Vec<Slot>) -> Self {
        CandidateAssignment { slots }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn unknowns(&self) -> usize {
        self.slots.iter().filter(|s| **s == Slot::Unknown).count()
    }

    pub fn known_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().filter_map(|s| match s {
            Slot::Index(i) => Some(*i),
            Slot::Unknown => None,
        })
    }
}

/// For each request position, the participant hash indices sharing its residue.
pub fn candidate_subsets(user_hashes: &[Digest], rv: &RemainderVector) -> Vec<Vec<usize>> {
    let user: Vec<u32> = user_hashes.iter().map(|h| h.rem_u32(rv.p())).collect();
    rv.residues()
        .iter()
        .map(|&r| {
            user.iter()
                .enumerate()
                .filter(|(_, &u)| u == r)
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

/// All order-preserving assignments of participant hashes to request positions.
///
/// Necessary positions (`..alpha`) always take an index. The optional block
/// holds exactly `gamma` unknowns; any optional position may be unknown, even
/// when its subset is non-empty, because a residue coincidence must not hide
/// the genuine assignment. Indices increase strictly within each block and
/// are never reused across blocks. Emission order is lexicographic with
/// `Unknown` sorting after every index.
pub fn enumerate_candidates(
    subsets: &[Vec<usize>],
    alpha: usize,
    gamma: usize,
    limit: usize,
) -> Result<Vec<CandidateAssignment>, MatchError> {
    let m_t = subsets.len();
    if alpha > m_t || gamma > m_t - alpha {
        return Ok(Vec::new());
    }
    // Cheap exclusion before any backtracking.
    if subsets[..alpha].iter().any(Vec::is_empty) {
        return Ok(Vec::new());
    }
    let empty_optional = subsets[alpha..].iter().filter(|s| s.is_empty()).count();
    if empty_optional > gamma {
        return Ok(Vec::new());
    }
    let mut search = Search {
        subsets,
        alpha,
        gamma,
        limit,
        slots: vec![Slot::Unknown; m_t],
        used: Vec::new(),
        out: Vec::new(),
    };
    search.step(0, None, 0)?;
    Ok(search.out)
}

struct Search<'a> {
    subsets: &'a [Vec<usize>],
    alpha: usize,
    gamma: usize,
    limit: usize,
    slots: Vec<Slot>,
    used: Vec<usize>,
    out: Vec<CandidateAssignment>,
}

impl Search<'_> {
    fn step(&mut self, pos: usize, last: Option<usize>, unknowns: usize) -> Result<(), MatchError> {
        if pos == self.subsets.len() {
            if unknowns == self.gamma {
                if self.out.len() == self.limit {
                    return Err(MatchError::LimitExceeded { limit: self.limit });
                }
                self.out.push(CandidateAssignment::new(self.slots.clone()));
            }
            return Ok(());
        }
        // The ordering constraint restarts at the optional block.
        let last = if pos == self.alpha { None } else { last };
        let remaining_optional = self.subsets.len() - pos.max(self.alpha);
        let optional = pos >= self.alpha;
        let must_be_unknown = optional && self.gamma - unknowns == remaining_optional;

        if !must_be_unknown {
            for &idx in &self.subsets[pos] {
                if last.is_some_and(|l| idx <= l) || self.used.contains(&idx) {
                    continue;
                }
                self.slots[pos] = Slot::Index(idx);
                self.used.push(idx);
                self.step(pos + 1, Some(idx), unknowns)?;
                self.used.pop();
            }
        }
        if optional && unknowns < self.gamma {
            self.slots[pos] = Slot::Unknown;
            self.step(pos + 1, last, unknowns + 1)?;
        }
        Ok(())
    }
}
