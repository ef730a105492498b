//! Tag-free symmetric sealing, acknowledgements and key derivation.
//!
//! The keystream is SHA-256 in counter mode: block `i` is
//! `H(key ∥ nonce ∥ i as u64 BE)`. There is deliberately no integrity tag, so
//! opening a plain payload under a wrong key yields bytes that cannot be told
//! apart from the right answer.

use alloc::vec::Vec;

use rand::RngCore;

use crate::digest::Digest;
use crate::profile::ProfileKey;

pub const CONFIRM_TAG: [u8; 16] = *b"SEALEDBOTTLE-CNF";
pub const ACK_TAG: [u8; 16] = *b"SEALEDBOTTLE-ACK";

/// Ciphertext length of an acknowledgement before any extra bytes.
pub const ACK_BODY_LEN: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Nonce(pub [u8; 16]);

impl Nonce {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; 16];
        rng.fill_bytes(&mut b);
        Nonce(b)
    }
}

/// Nonce plus ciphertext; on the wire the nonce comes first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SealedPayload {
    pub nonce: Nonce,
    pub ciphertext: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SealMode {
    /// Plaintext is `CONFIRM_TAG ∥ x`; a reader can tell whether it opened correctly.
    WithConfirmation,
    /// Plaintext is `x` alone.
    Plain,
}

impl SealMode {
    pub fn payload_len(self) -> usize {
        match self {
            SealMode::WithConfirmation => 48,
            SealMode::Plain => 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Opened {
    Confirmed(Digest),
    Rejected,
    /// Plain mode: the decrypted bytes, correct or not.
    Unverified(Digest),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChannelError {
    #[error("payload is {got} bytes, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SessionKey(pub Digest);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupKey(pub Digest);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AckContents {
    pub y: Digest,
    pub extra: Vec<u8>,
}

pub fn keystream_xor(key: &Digest, nonce: &Nonce, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len());
    for (i, chunk) in data.chunks(32).enumerate() {
        let block = Digest::hash_parts(&[key.as_bytes(), &nonce.0, &(i as u64).to_be_bytes()]);
        out.extend(chunk.iter().zip(block.0.iter()).map(|(d, k)| d ^ k));
    }
    out
}

fn seal<R: RngCore + ?Sized>(key: &Digest, plaintext: &[u8], rng: &mut R) -> SealedPayload {
    let nonce = Nonce::random(rng);
    SealedPayload {
        nonce,
        ciphertext: keystream_xor(key, &nonce, plaintext),
    }
}

pub fn seal_request_payload<R: RngCore + ?Sized>(
    k_t: &ProfileKey,
    x: &Digest,
    mode: SealMode,
    rng: &mut R,
) -> SealedPayload {
    let mut plain = Vec::with_capacity(mode.payload_len());
    if mode == SealMode::WithConfirmation {
        plain.extend_from_slice(&CONFIRM_TAG);
    }
    plain.extend_from_slice(x.as_bytes());
    seal(&k_t.0, &plain, rng)
}

pub fn open_request_payload(
    k: &ProfileKey,
    sp: &SealedPayload,
    mode: SealMode,
) -> Result<Opened, ChannelError> {
    let expected = mode.payload_len();
    if sp.ciphertext.len() != expected {
        return Err(ChannelError::LengthMismatch {
            got: sp.ciphertext.len(),
            expected,
        });
    }
    let plain = keystream_xor(&k.0, &sp.nonce, &sp.ciphertext);
    Ok(match mode {
        SealMode::WithConfirmation => {
            if plain[..16] == CONFIRM_TAG {
                Opened::Confirmed(Digest(plain[16..].try_into().unwrap()))
            } else {
                Opened::Rejected
            }
        }
        SealMode::Plain => Opened::Unverified(Digest(plain[..].try_into().unwrap())),
    })
}

/// `E_{x_j}(ACK_TAG ∥ y ∥ extra)`.
pub fn make_ack<R: RngCore + ?Sized>(
    x_j: &Digest,
    y: &Digest,
    extra: &[u8],
    rng: &mut R,
) -> SealedPayload {
    let mut plain = Vec::with_capacity(ACK_BODY_LEN + extra.len());
    plain.extend_from_slice(&ACK_TAG);
    plain.extend_from_slice(y.as_bytes());
    plain.extend_from_slice(extra);
    seal(x_j, &plain, rng)
}

/// Opens each ack under `x`; the first carrying `ACK_TAG` wins.
pub fn verify_ack(x: &Digest, acks: &[SealedPayload]) -> Option<AckContents> {
    acks.iter().find_map(|ack| {
        if ack.ciphertext.len() < ACK_BODY_LEN {
            return None;
        }
        let plain = keystream_xor(x, &ack.nonce, &ack.ciphertext);
        (plain[..16] == ACK_TAG).then(|| AckContents {
            y: Digest(plain[16..48].try_into().unwrap()),
            extra: plain[48..].to_vec(),
        })
    })
}

/// Pairwise key `H(x ∥ y)`.
pub fn derive_session_key(x: &Digest, y: &Digest) -> SessionKey {
    SessionKey(Digest::hash_parts(&[x.as_bytes(), y.as_bytes()]))
}

pub fn derive_group_key(x: &Digest) -> GroupKey {
    GroupKey(*x)
}

/// A confirmation sealed under a session key, sent by the initiator to each
/// accepted matcher so the matcher learns which of its candidate secrets was
/// right.
pub fn seal_session_confirm<R: RngCore + ?Sized>(key: &SessionKey, rng: &mut R) -> SealedPayload {
    seal(&key.0, &CONFIRM_TAG, rng)
}

pub fn open_session_confirm(key: &SessionKey, sp: &SealedPayload) -> bool {
    sp.ciphertext.len() == CONFIRM_TAG.len()
        && keystream_xor(&key.0, &sp.nonce, &sp.ciphertext) == CONFIRM_TAG
}
