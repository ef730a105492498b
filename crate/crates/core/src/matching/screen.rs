//! The participant-side pipeline: residue screen, enumeration, hint
//! recovery and candidate-key derivation for one profile vector.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::digest::Digest;
use crate::field::{FieldElement, PrimeField};
use crate::profile::{key_of_sequence, ProfileKey, ProfileVector};

use super::{
    candidate_subsets, enumerate_candidates, solve_hint, CandidateAssignment, HintMatrix,
    MatchError, RemainderVector, Slot,
};

/// The public, matching-relevant part of a request.
#[derive(Debug, Clone, Copy)]
pub struct RequestView<'a> {
    pub alpha: usize,
    pub beta: usize,
    pub remainders: &'a RemainderVector,
    pub hint: Option<&'a HintMatrix>,
}

impl RequestView<'_> {
    pub fn m_t(&self) -> usize {
        self.remainders.len()
    }

    pub fn gamma(&self) -> usize {
        self.m_t() - self.alpha - self.beta
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub key: ProfileKey,
    /// The assignment that first produced `key`.
    pub assignment: CandidateAssignment,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScreenOutcome {
    /// Assignments that passed the residue screen.
    pub assignments: usize,
    /// Distinct candidate keys that survived hint recovery.
    pub candidates: Vec<Candidate>,
}

pub fn screen_vector(
    view: &RequestView<'_>,
    vector: &ProfileVector,
    field: &PrimeField,
    limit: usize,
) -> Result<ScreenOutcome, MatchError> {
    let (alpha, beta) = (view.alpha, view.beta);
    if alpha + beta > view.m_t() {
        return Err(MatchError::HintShape);
    }
    let gamma = view.gamma();
    match view.hint {
        Some(h) if h.gamma() != gamma || h.beta() != beta => return Err(MatchError::HintShape),
        None if gamma > 0 => return Err(MatchError::HintShape),
        _ => {}
    }

    let hashes = vector.hashes();
    let subsets = candidate_subsets(hashes, view.remainders);
    let assignments = enumerate_candidates(&subsets, alpha, gamma, limit)?;
    let mut outcome = ScreenOutcome {
        assignments: assignments.len(),
        candidates: Vec::new(),
    };
    let mut seen = BTreeSet::new();
    let mut completions: Vec<Vec<Digest>> = Vec::new();
    let optional_residues = &view.remainders.residues()[alpha..];

    for assignment in assignments {
        // A full-rank system has one solution, so an assignment whose known
        // slots agree with an earlier completion recovers that completion.
        if assignment.unknowns() > 0 && completions.iter().any(|c| agrees(&assignment, hashes, c)) {
            continue;
        }
        let completed = match complete(
            &assignment,
            hashes,
            alpha,
            view.hint,
            field,
            optional_residues,
            view.remainders.p(),
        ) {
            Ok(c) => c,
            Err(
                MatchError::SingularSystem
                | MatchError::Inconsistent
                | MatchError::ValueOutOfRange
                | MatchError::ResidueMismatch,
            ) => continue,
            Err(e) => return Err(e),
        };
        let key = key_of_sequence(&completed);
        if seen.insert(key) {
            outcome.candidates.push(Candidate { key, assignment });
            if view.hint.is_some() {
                completions.push(completed);
            }
        }
    }
    Ok(outcome)
}

fn agrees(assignment: &CandidateAssignment, hashes: &[Digest], completed: &[Digest]) -> bool {
    assignment
        .slots()
        .iter()
        .zip(completed)
        .all(|(s, c)| match s {
            Slot::Index(i) => hashes[*i] == *c,
            Slot::Unknown => true,
        })
}

fn complete(
    assignment: &CandidateAssignment,
    hashes: &[Digest],
    alpha: usize,
    hint: Option<&HintMatrix>,
    field: &PrimeField,
    optional_residues: &[u32],
    p: u32,
) -> Result<Vec<Digest>, MatchError> {
    let slots = assignment.slots();
    let mut out: Vec<Digest> = Vec::with_capacity(slots.len());
    for s in &slots[..alpha] {
        match s {
            Slot::Index(i) => out.push(hashes[*i]),
            Slot::Unknown => return Err(MatchError::HintShape),
        }
    }
    let Some(hint) = hint.filter(|_| assignment.unknowns() > 0) else {
        for s in &slots[alpha..] {
            match s {
                Slot::Index(i) => out.push(hashes[*i]),
                Slot::Unknown => return Err(MatchError::HintShape),
            }
        }
        return Ok(out);
    };
    let knowns: Vec<Option<FieldElement>> = slots[alpha..]
        .iter()
        .map(|s| match s {
            Slot::Index(i) => Some(field.from_digest(&hashes[*i])),
            Slot::Unknown => None,
        })
        .collect();
    let solved = solve_hint(field, hint, &knowns, Some((optional_residues, p)))?;
    for v in solved {
        out.push(v.to_digest().ok_or(MatchError::ValueOutOfRange)?);
    }
    Ok(out)
}
