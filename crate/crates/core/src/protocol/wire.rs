//! Big-endian byte layouts.
//!
//! Request: `"SBTL" ∥ version ∥ protocol ∥ request_id[16] ∥ expiry u64 ∥ ttl ∥
//! pad ∥ p u32 ∥ m_t u16 ∥ alpha u16 ∥ beta u16 ∥ residues m_t×u32 ∥
//! [γ>0: R γ·β×u32 ∥ B γ×33 bytes] ∥ nonce[16] ∥ payload_len u16 ∥ payload`.
//!
//! Reply: `"SBTR" ∥ request_id ∥ ack_count u16 ∥ acks`, each ack being
//! `nonce[16] ∥ ciphertext[48] ∥ extra_len u16 ∥ extra ciphertext`.
//!
//! Session confirmation: `"SBTS" ∥ request_id ∥ nonce[16] ∥ ciphertext[16]`.

use alloc::vec::Vec;

use crate::channel::{Nonce, SealedPayload, ACK_BODY_LEN};
use crate::field::{PrimeField, ELEMENT_BYTES};
use crate::matching::{HintMatrix, RemainderVector};

use super::{ProtocolId, RequestId, SimTime};

pub const REQUEST_MAGIC: [u8; 4] = *b"SBTL";
pub const REPLY_MAGIC: [u8; 4] = *b"SBTR";
pub const CONFIRM_MAGIC: [u8; 4] = *b"SBTS";
pub const WIRE_VERSION: u8 = 1;

/// Fixed request bytes outside the residues, hint, nonce and payload
/// (the payload length field included).
pub const REQUEST_HEADER_LEN: usize = 44;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("malformed package at byte {offset}: {what}")]
    Malformed { offset: usize, what: &'static str },
}

fn bad(offset: usize, what: &'static str) -> WireError {
    WireError::Malformed { offset, what }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestPackage {
    pub request_id: RequestId,
    pub protocol: ProtocolId,
    pub expiry: SimTime,
    pub ttl: u8,
    pub alpha: u16,
    pub beta: u16,
    pub remainders: RemainderVector,
    /// Present exactly when `m_t - alpha - beta > 0`.
    pub hint: Option<HintMatrix>,
    pub sealed: SealedPayload,
}

impl RequestPackage {
    pub fn m_t(&self) -> usize {
        self.remainders.len()
    }

    pub fn gamma(&self) -> usize {
        self.m_t() - usize::from(self.alpha) - usize::from(self.beta)
    }

    pub fn with_ttl(&self, ttl: u8) -> Self {
        RequestPackage {
            ttl,
            ..self.clone()
        }
    }
}

/// Exact encoded size: `44 + 4·m_t + [γ>0]·(4γβ + 33γ) + 16 + payload`.
pub fn request_encoded_len(m_t: usize, gamma: usize, beta: usize, payload: usize) -> usize {
    let hint = if gamma > 0 {
        4 * gamma * beta + ELEMENT_BYTES * gamma
    } else {
        0
    };
    REQUEST_HEADER_LEN + 4 * m_t + hint + 16 + payload
}

pub fn encode_request(pkg: &RequestPackage) -> Vec<u8> {
    let m_t = pkg.m_t();
    let mut out = Vec::with_capacity(request_encoded_len(
        m_t,
        pkg.gamma(),
        usize::from(pkg.beta),
        pkg.sealed.ciphertext.len(),
    ));
    out.extend_from_slice(&REQUEST_MAGIC);
    out.push(WIRE_VERSION);
    out.push(pkg.protocol as u8);
    out.extend_from_slice(&pkg.request_id);
    out.extend_from_slice(&pkg.expiry.to_be_bytes());
    out.push(pkg.ttl);
    out.push(0);
    out.extend_from_slice(&pkg.remainders.p().to_be_bytes());
    out.extend_from_slice(&(m_t as u16).to_be_bytes());
    out.extend_from_slice(&pkg.alpha.to_be_bytes());
    out.extend_from_slice(&pkg.beta.to_be_bytes());
    for r in pkg.remainders.residues() {
        out.extend_from_slice(&r.to_be_bytes());
    }
    if let Some(h) = &pkg.hint {
        for r in h.r() {
            out.extend_from_slice(&r.to_be_bytes());
        }
        for b in h.b() {
            out.extend_from_slice(&b.to_bytes33());
        }
    }
    out.extend_from_slice(&pkg.sealed.nonce.0);
    out.extend_from_slice(&(pkg.sealed.ciphertext.len() as u16).to_be_bytes());
    out.extend_from_slice(&pkg.sealed.ciphertext);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], WireError> {
        if self.buf.len() - self.pos < n {
            return Err(bad(self.pos, what));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], WireError> {
        Ok(self.take(N, what)?.try_into().unwrap())
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, WireError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16, WireError> {
        Ok(u16::from_be_bytes(self.array(what)?))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.array(what)?))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, WireError> {
        Ok(u64::from_be_bytes(self.array(what)?))
    }

    fn finish(&self) -> Result<(), WireError> {
        if self.pos != self.buf.len() {
            return Err(bad(self.pos, "trailing bytes"));
        }
        Ok(())
    }
}

pub fn decode_request(bytes: &[u8]) -> Result<RequestPackage, WireError> {
    let mut r = Reader::new(bytes);
    if r.array::<4>("magic")? != REQUEST_MAGIC {
        return Err(bad(0, "bad magic"));
    }
    if r.u8("version")? != WIRE_VERSION {
        return Err(bad(4, "unsupported version"));
    }
    let protocol =
        ProtocolId::from_u8(r.u8("protocol id")?).ok_or(bad(5, "unknown protocol id"))?;
    let request_id = r.array::<16>("request id")?;
    let expiry = r.u64("expiry")?;
    let ttl = r.u8("ttl")?;
    if r.u8("pad")? != 0 {
        return Err(bad(31, "nonzero pad"));
    }
    let p_at = r.pos;
    let p = r.u32("p")?;
    let m_t = usize::from(r.u16("m_t")?);
    let alpha = r.u16("alpha")?;
    let beta = r.u16("beta")?;
    if usize::from(alpha) + usize::from(beta) > m_t {
        return Err(bad(p_at + 4, "alpha + beta exceeds m_t"));
    }
    let res_at = r.pos;
    let residues = (0..m_t)
        .map(|_| r.u32("residues"))
        .collect::<Result<Vec<_>, _>>()?;
    let remainders = RemainderVector::from_parts(p, residues)
        .map_err(|_| bad(res_at, "invalid modulus or residue"))?;
    let gamma = m_t - usize::from(alpha) - usize::from(beta);
    let hint = if gamma > 0 {
        let beta = usize::from(beta);
        let at = r.pos;
        let coeffs = (0..gamma * beta)
            .map(|_| r.u32("hint R"))
            .collect::<Result<Vec<_>, _>>()?;
        let field = PrimeField::hint_field();
        let b_at = r.pos;
        let mut b = Vec::with_capacity(gamma);
        for _ in 0..gamma {
            let raw = r.take(ELEMENT_BYTES, "hint B")?;
            b.push(
                field
                    .from_bytes(raw)
                    .ok_or(bad(b_at, "hint B not a field element"))?,
            );
        }
        Some(
            HintMatrix::from_parts(gamma, beta, coeffs, b)
                .map_err(|_| bad(at, "zero hint coefficient"))?,
        )
    } else {
        None
    };
    let nonce = Nonce(r.array::<16>("nonce")?);
    let len = usize::from(r.u16("payload length")?);
    let ciphertext = r.take(len, "payload")?.to_vec();
    r.finish()?;
    Ok(RequestPackage {
        request_id,
        protocol,
        expiry,
        ttl,
        alpha,
        beta,
        remainders,
        hint,
        sealed: SealedPayload { nonce, ciphertext },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplyPackage {
    pub request_id: RequestId,
    pub acks: Vec<SealedPayload>,
}

pub fn encode_reply(reply: &ReplyPackage) -> Vec<u8> {
    let mut out = Vec::with_capacity(22 + reply.acks.len() * (16 + ACK_BODY_LEN + 4));
    out.extend_from_slice(&REPLY_MAGIC);
    out.extend_from_slice(&reply.request_id);
    out.extend_from_slice(&(reply.acks.len() as u16).to_be_bytes());
    for ack in &reply.acks {
        debug_assert!(ack.ciphertext.len() >= ACK_BODY_LEN);
        out.extend_from_slice(&ack.nonce.0);
        out.extend_from_slice(&ack.ciphertext[..ACK_BODY_LEN]);
        let extra = &ack.ciphertext[ACK_BODY_LEN..];
        out.extend_from_slice(&(extra.len() as u16).to_be_bytes());
        out.extend_from_slice(extra);
    }
    out
}

pub fn decode_reply(bytes: &[u8]) -> Result<ReplyPackage, WireError> {
    let mut r = Reader::new(bytes);
    if r.array::<4>("magic")? != REPLY_MAGIC {
        return Err(bad(0, "bad magic"));
    }
    let request_id = r.array::<16>("request id")?;
    let count = r.u16("ack count")?;
    if count == 0 {
        return Err(bad(20, "reply without acks"));
    }
    let mut acks = Vec::with_capacity(usize::from(count));
    for _ in 0..count {
        let nonce = Nonce(r.array::<16>("ack nonce")?);
        let mut ciphertext = r.take(ACK_BODY_LEN, "ack body")?.to_vec();
        let extra_len = usize::from(r.u16("extra length")?);
        ciphertext.extend_from_slice(r.take(extra_len, "ack extra")?);
        acks.push(SealedPayload { nonce, ciphertext });
    }
    r.finish()?;
    Ok(ReplyPackage { request_id, acks })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfirmPackage {
    pub request_id: RequestId,
    pub sealed: SealedPayload,
}

pub fn encode_confirm(c: &ConfirmPackage) -> Vec<u8> {
    let mut out = Vec::with_capacity(36 + c.sealed.ciphertext.len());
    out.extend_from_slice(&CONFIRM_MAGIC);
    out.extend_from_slice(&c.request_id);
    out.extend_from_slice(&c.sealed.nonce.0);
    out.extend_from_slice(&c.sealed.ciphertext);
    out
}

pub fn decode_confirm(bytes: &[u8]) -> Result<ConfirmPackage, WireError> {
    let mut r = Reader::new(bytes);
    if r.array::<4>("magic")? != CONFIRM_MAGIC {
        return Err(bad(0, "bad magic"));
    }
    let request_id = r.array::<16>("request id")?;
    let nonce = Nonce(r.array::<16>("nonce")?);
    let ciphertext = r.take(16, "confirmation")?.to_vec();
    r.finish()?;
    Ok(ConfirmPackage {
        request_id,
        sealed: SealedPayload { nonce, ciphertext },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    Request,
    Reply,
    Confirm,
}

pub fn message_kind(bytes: &[u8]) -> Option<MessageKind> {
    match bytes.get(..4)? {
        m if m == REQUEST_MAGIC => Some(MessageKind::Request),
        m if m == REPLY_MAGIC => Some(MessageKind::Reply),
        m if m == CONFIRM_MAGIC => Some(MessageKind::Confirm),
        _ => None,
    }
}

/// Request id of an encoded request without decoding the rest.
pub fn peek_request_id(bytes: &[u8]) -> Option<RequestId> {
    if bytes.get(..4)? != REQUEST_MAGIC {
        return None;
    }
    bytes.get(6..22).map(|s| s.try_into().unwrap())
}
