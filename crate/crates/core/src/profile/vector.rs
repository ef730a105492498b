use alloc::vec::Vec;

use crate::digest::Digest;

use super::{Attribute, Profile, ProfileError, SEPARATOR};

/// `H(category ∥ 0x1F ∥ value [∥ 0x1F ∥ salt])`.
pub fn hash_attribute(attr: &Attribute, dynamic_salt: Option<&Digest>) -> Digest {
    let enc = attr.encode();
    match dynamic_salt {
        None => Digest::hash(&enc),
        Some(salt) => Digest::hash_parts(&[&enc, &[SEPARATOR], salt.as_bytes()]),
    }
}

/// Attribute hashes of one profile in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileVector {
    hashes: Vec<Digest>,
    // Position of each hash's attribute in the profile's iteration order.
    origin: Vec<u32>,
}

impl ProfileVector {
    pub fn hashes(&self) -> &[Digest] {
        &self.hashes
    }

    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    /// Index (in `Profile::iter` order) of the attribute behind `hashes()[i]`.
    pub fn origin(&self, i: usize) -> usize {
        self.origin[i] as usize
    }

    /// Wraps an already sorted, duplicate-free hash list.
    pub fn from_sorted(hashes: Vec<Digest>) -> Result<Self, ProfileError> {
        if hashes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ProfileError::DuplicateHash);
        }
        let origin = (0..hashes.len() as u32).collect();
        Ok(ProfileVector { hashes, origin })
    }
}

pub fn build_profile_vector(
    profile: &Profile,
    dynamic_salt: Option<&Digest>,
) -> Result<ProfileVector, ProfileError> {
    let mut pairs: Vec<(Digest, u32)> = profile
        .iter()
        .enumerate()
        .map(|(i, a)| (hash_attribute(a, dynamic_salt), i as u32))
        .collect();
    pairs.sort_unstable();
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(ProfileError::DuplicateHash);
    }
    let (hashes, origin) = pairs.into_iter().unzip();
    Ok(ProfileVector { hashes, origin })
}

/// Hash of concatenated 256-bit entries; doubles as the sealing key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProfileKey(pub Digest);

impl ProfileKey {
    pub fn as_bytes(&self) -> &[u8; 32] {
        self.0.as_bytes()
    }
}

/// Key of an arbitrary hash sequence, taken in the given order.
pub fn key_of_sequence(entries: &[Digest]) -> ProfileKey {
    let mut buf = Vec::with_capacity(entries.len() * 32);
    for e in entries {
        buf.extend_from_slice(e.as_bytes());
    }
    ProfileKey(Digest::hash(&buf))
}

pub fn derive_profile_key(v: &ProfileVector) -> Result<ProfileKey, ProfileError> {
    if v.is_empty() {
        return Err(ProfileError::EmptyVector);
    }
    Ok(key_of_sequence(&v.hashes))
}
