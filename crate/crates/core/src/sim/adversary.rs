//! What a passive observer with an attribute dictionary can learn.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::digest::Digest;
use crate::profile::{hash_attribute, Attribute};
use crate::protocol::{decode_request, message_kind, MessageKind, RequestId};

use super::SimTrace;

/// Every transmitted message, in send order. Requires a trace recorded
/// with capture enabled.
pub fn eavesdropper_view(trace: &SimTrace) -> Vec<Arc<[u8]>> {
    trace
        .events
        .iter()
        .filter_map(|e| e.bytes.clone())
        .collect()
}

/// Number of (message, offset) positions where any needle occurs.
pub fn byte_scan(view: &[Arc<[u8]>], needles: &[[u8; 32]]) -> usize {
    let set: BTreeSet<&[u8]> = needles.iter().map(|n| &n[..]).collect();
    if set.is_empty() {
        return 0;
    }
    view.iter()
        .map(|msg| msg.windows(32).filter(|w| set.contains(w)).count())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryReport {
    pub request_id: RequestId,
    pub p: u32,
    /// Per request position, the dictionary indices whose hash residue fits.
    pub consistent: Vec<Vec<usize>>,
}

impl DictionaryReport {
    /// log2 of the number of full guesses left; `-inf` when some position
    /// has no consistent entry.
    pub fn guess_log2(&self) -> f64 {
        self.consistent
            .iter()
            .map(|c| libm::log2(c.len() as f64))
            .sum()
    }
}

/// Filters `dictionary` against the residues of every distinct request
/// seen in `view`.
pub fn dictionary_attack(
    view: &[Arc<[u8]>],
    dictionary: &[Attribute],
    salt: Option<&Digest>,
) -> Vec<DictionaryReport> {
    let hashes: Vec<Digest> = dictionary.iter().map(|a| hash_attribute(a, salt)).collect();
    let mut residues: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for msg in view {
        if message_kind(msg) != Some(MessageKind::Request) {
            continue;
        }
        let Ok(pkg) = decode_request(msg) else {
            continue;
        };
        if !seen.insert(pkg.request_id) {
            continue;
        }
        let p = pkg.remainders.p();
        let dict = residues
            .entry(p)
            .or_insert_with(|| hashes.iter().map(|h| h.rem_u32(p)).collect());
        let consistent = pkg
            .remainders
            .residues()
            .iter()
            .map(|&r| {
                dict.iter()
                    .enumerate()
                    .filter(|&(_, &d)| d == r)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        out.push(DictionaryReport {
            request_id: pkg.request_id,
            p,
            consistent,
        });
    }
    out
}

/// `m_t · log2(m / p)`: guesses needed against `m_t` residues when each
/// leaves `m / p` of an `m`-entry dictionary.
pub fn guess_space_log2(m: f64, p: u32, m_t: usize) -> f64 {
    m_t as f64 * libm::log2(m / f64::from(p))
}
