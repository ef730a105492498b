use alloc::vec::Vec;

use crate::digest::Digest;

use super::MatchError;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let n = u64::from(n);
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Residues of the request hashes modulo a small prime, one per position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RemainderVector {
    p: u32,
    residues: Vec<u32>,
}

impl RemainderVector {
    /// Checks `p` prime, `p > m_t` and every residue below `p`.
    pub fn from_parts(p: u32, residues: Vec<u32>) -> Result<Self, MatchError> {
        check_modulus(p, residues.len())?;
        if let Some(&residue) = residues.iter().find(|&&r| r >= p) {
            return Err(MatchError::ResidueRange { residue, p });
        }
        Ok(RemainderVector { p, residues })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn residues(&self) -> &[u32] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

fn check_modulus(p: u32, m_t: usize) -> Result<(), MatchError> {
    if !is_prime(p) {
        return Err(MatchError::NonPrimeP(p));
    }
    if (p as usize) <= m_t {
        return Err(MatchError::PTooSmall { p, m_t });
    }
    Ok(())
}

pub fn build_remainder_vector(
    request_hashes: &[Digest],
    p: u32,
) -> Result<RemainderVector, MatchError> {
    check_modulus(p, request_hashes.len())?;
    Ok(RemainderVector {
        p,
        residues: request_hashes.iter().map(|h| h.rem_u32(p)).collect(),
    })
}
