//! Remainder-vector screening, order-preserving candidate enumeration,
//! hint-matrix recovery of missing hashes, and the brute-force oracle.

mod candidates;
mod hint;
mod keys;
mod oracle;
mod remainder;
mod screen;

pub use candidates::{candidate_subsets, enumerate_candidates, CandidateAssignment, Slot};
pub use hint::{build_hint_matrix, build_hint_matrix_with, solve_hint, HintMatrix};
pub use keys::derive_candidate_keys;
pub use oracle::{expected_candidate_combinations, oracle_match, MatchVerdict, Verdict};
pub use remainder::{build_remainder_vector, is_prime, RemainderVector};
pub use screen::{screen_vector, Candidate, RequestView, ScreenOutcome};

/// Default cap on enumerated assignments per participant.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchError {
    #[error("modulus {0} is not prime")]
    NonPrimeP(u32),
    #[error("modulus {p} must exceed the request size {m_t}")]
    PTooSmall { p: u32, m_t: usize },
    #[error("residue {residue} is not below the modulus {p}")]
    ResidueRange { residue: u32, p: u32 },
    #[error("more than {limit} candidate assignments")]
    LimitExceeded { limit: usize },
    #[error("hint sub-system is singular")]
    SingularSystem,
    #[error("hint equations are inconsistent with the known values")]
    Inconsistent,
    #[error("recovered value does not fit in 256 bits")]
    ValueOutOfRange,
    #[error("recovered value disagrees with its published residue")]
    ResidueMismatch,
    #[error("hint matrix shape does not match the request")]
    HintShape,
}
