use crate::profile::{Profile, RequestSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Perfect,
    Matching,
    NonMatching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatchVerdict {
    pub verdict: Verdict,
    /// `|A_t ∩ A_m|` over all requested attributes.
    pub intersection: usize,
}

impl MatchVerdict {
    /// Perfect or threshold match.
    pub fn is_match(&self) -> bool {
        self.verdict != Verdict::NonMatching
    }
}

/// Ground truth by direct set operations: every necessary attribute held
/// and at least `beta` of the optional ones.
pub fn oracle_match(spec: &RequestSpec, profile: &Profile) -> MatchVerdict {
    let nec = spec
        .necessary()
        .iter()
        .filter(|a| profile.contains(a))
        .count();
    let opt = spec
        .optional()
        .iter()
        .filter(|a| profile.contains(a))
        .count();
    let intersection = nec + opt;
    let verdict = if intersection == spec.m_t() {
        Verdict::Perfect
    } else if nec == spec.alpha() && opt >= spec.beta() {
        Verdict::Matching
    } else {
        Verdict::NonMatching
    };
    MatchVerdict {
        verdict,
        intersection,
    }
}

/// `C(m_k, α+β) · p^-(α+β)`: expected number of residue-consistent
/// combinations for a participant with `m_k` random hashes.
pub fn expected_candidate_combinations(m_k: usize, alpha_plus_beta: usize, p: u32) -> f64 {
    if alpha_plus_beta > m_k {
        return 0.0;
    }
    let k = alpha_plus_beta.min(m_k - alpha_plus_beta);
    let mut binom = 1.0f64;
    for i in 0..k {
        binom = binom * (m_k - i) as f64 / (i + 1) as f64;
    }
    binom * libm::pow(f64::from(p), -(alpha_plus_beta as f64))
}
