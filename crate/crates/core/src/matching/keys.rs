use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::digest::Digest;
use crate::profile::{key_of_sequence, ProfileKey};

/// Keys of completed candidate vectors (request order), deduplicated by value
/// and kept in first-seen order.
pub fn derive_candidate_keys<S: AsRef<[Digest]>>(completed: &[S]) -> Vec<ProfileKey> {
    let mut seen = BTreeSet::new();
    completed
        .iter()
        .map(|seq| key_of_sequence(seq.as_ref()))
        .filter(|k| seen.insert(*k))
        .collect()
}
