//! 256-bit digests and the SHA-256 helpers everything else is built on.

use core::fmt;

use sha2::{Digest as _, Sha256};

/// A 256-bit value compared as a big-endian unsigned integer.
///
/// Attribute hashes, profile keys, session keys and the exchanged secrets
/// `x`/`y` all share this representation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const LEN: usize = 32;

    pub const fn from_bytes(bytes: [u8; 32]) -> Self {
        Digest(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// SHA-256 over the concatenation of `parts`.
    pub fn hash_parts(parts: &[&[u8]]) -> Self {
        let mut h = Sha256::new();
        for part in parts {
            h.update(part);
        }
        Digest(h.finalize().into())
    }

    pub fn hash(data: &[u8]) -> Self {
        Self::hash_parts(&[data])
    }

    /// The value reduced modulo a small modulus.
    pub fn rem_u32(&self, modulus: u32) -> u32 {
        let m = u128::from(modulus);
        let mut r: u128 = 0;
        for chunk in self.0.chunks_exact(8) {
            let limb = u64::from_be_bytes(chunk.try_into().unwrap());
            r = ((r << 64) | u128::from(limb)) % m;
        }
        r as u32
    }

    pub fn random<R: rand::RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; 32];
        rng.fill_bytes(&mut b);
        Digest(b)
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest(")?;
        for b in &self.0[..6] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl From<[u8; 32]> for Digest {
    fn from(b: [u8; 32]) -> Self {
        Digest(b)
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_value_remainder() {
        let mut b = [0u8; 32];
        b[31] = 37;
        assert_eq!(Digest(b).rem_u32(11), 4);
    }

    #[test]
    fn remainder_matches_bytewise_reduction() {
        let d = Digest::hash(b"remainder");
        for p in [2u32, 3, 11, 13, 65_521, 4_294_967_291] {
            let slow =
                d.0.iter()
                    .fold(0u64, |r, &b| (r * 256 + u64::from(b)) % u64::from(p));
            assert_eq!(u64::from(d.rem_u32(p)), slow);
        }
    }

    #[test]
    fn ordering_is_numeric() {
        let mut lo = [0u8; 32];
        let mut hi = [0u8; 32];
        lo[31] = 0xff;
        hi[30] = 0x01;
        assert!(Digest(lo) < Digest(hi));
    }

    #[test]
    fn sha256_known_vector() {
        let d = Digest::hash(b"abc");
        assert_eq!(
            alloc::format!("{d}"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
