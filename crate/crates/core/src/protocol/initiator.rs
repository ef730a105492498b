//! Initiator side: build and seal a request, then filter and verify replies.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::channel::{
    derive_group_key, derive_session_key, seal_request_payload, seal_session_confirm, verify_ack,
    GroupKey, SessionKey,
};
use crate::digest::Digest;
use crate::field::PrimeField;
use crate::matching::{build_hint_matrix, build_remainder_vector, DEFAULT_ENUMERATION_LIMIT};
use crate::profile::{key_of_sequence, ProfileKey, RequestSpec};

use super::{
    ConfirmPackage, NodeId, ProtocolError, ProtocolId, ReplyPackage, RequestId, RequestPackage,
    SimTime,
};

/// Profile size assumed when sizing the default reply-cardinality threshold.
const KAPPA_PROFILE_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct RequestParams {
    pub p: u32,
    pub ttl: u8,
    /// Absolute expiry time.
    pub expiry: SimTime,
    pub created_at: SimTime,
    /// Replies arriving later than `created_at + window` are discarded.
    pub window: SimTime,
    /// Replies with more acks are discarded; `None` picks [`default_kappa_max`].
    pub kappa_max: Option<usize>,
    /// Mixed into every request hash, e.g. a location-derived dynamic key.
    pub dynamic_salt: Option<Digest>,
    pub seed: u64,
}

impl RequestParams {
    pub fn new(p: u32, seed: u64) -> Self {
        RequestParams {
            p,
            ttl: u8::MAX,
            expiry: SimTime::MAX,
            created_at: 0,
            window: SimTime::MAX,
            kappa_max: None,
            dynamic_salt: None,
            seed,
        }
    }
}

/// Reply-cardinality threshold: four times a per-position bound on an
/// honest matcher's key set, `(1 + (M-1)/p)^(α+β)` for an `M = 20`
/// attribute profile, with a floor of 8 and capped at the enumeration limit.
///
/// Each request position can be filled by the true attribute or by any of the
/// matcher's other attributes sharing its residue, so an honest key set grows
/// with mixtures of true and coincidental hashes; ε(κ) alone counts only the
/// fully coincidental ones.
pub fn default_kappa_max(alpha: usize, beta: usize, p: u32) -> usize {
    let per_position = 1.0 + (KAPPA_PROFILE_SIZE - 1) as f64 / f64::from(p);
    let bound = 4.0 * libm::pow(per_position, (alpha + beta) as f64);
    let k = libm::ceil(bound.min(DEFAULT_ENUMERATION_LIMIT as f64));
    (k as usize).max(8)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub replier: NodeId,
    pub y: Digest,
    pub session_key: SessionKey,
    /// Decrypted ack extension; the replier's claimed intersection size.
    pub extra: Vec<u8>,
}

impl Match {
    pub fn claimed_intersection(&self) -> Option<u16> {
        Some(u16::from_be_bytes(self.extra.get(..2)?.try_into().ok()?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceivedReply {
    pub replier: NodeId,
    pub arrived_at: SimTime,
    pub package: ReplyPackage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    WrongRequest,
    Late,
    TooManyAcks,
    NoValidAck,
    Duplicate,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Collected {
    pub matches: Vec<Match>,
    pub rejected: Vec<(NodeId, Rejection)>,
}

#[derive(Debug, Clone)]
pub struct InitiatorState {
    request_id: RequestId,
    protocol: ProtocolId,
    spec: RequestSpec,
    x: Digest,
    k_t: ProfileKey,
    created_at: SimTime,
    window: SimTime,
    kappa_max: usize,
    matches: Vec<Match>,
    rng: ChaCha20Rng,
}

/// Builds the request package and the initiator's private state. The same
/// seed always yields a byte-identical package.
pub fn create_request(
    spec: &RequestSpec,
    protocol: ProtocolId,
    params: &RequestParams,
) -> Result<(RequestPackage, InitiatorState), ProtocolError> {
    let spec = spec.without_free_optionals();
    let (alpha, beta, gamma) = (spec.alpha(), spec.beta(), spec.gamma());
    let hashes = spec.request_hashes(params.dynamic_salt.as_ref());
    let remainders = build_remainder_vector(&hashes, params.p)?;
    let k_t = key_of_sequence(&hashes);

    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let request_id: RequestId = rng.random();
    let x = Digest::random(&mut rng);
    let hint = (gamma > 0).then(|| {
        let field = PrimeField::hint_field();
        let optional: Vec<_> = hashes[alpha..]
            .iter()
            .map(|h| field.from_digest(h))
            .collect();
        build_hint_matrix(&field, &optional, gamma, &mut rng)
    });
    let sealed = seal_request_payload(&k_t, &x, protocol.seal_mode(), &mut rng);

    let package = RequestPackage {
        request_id,
        protocol,
        expiry: params.expiry,
        ttl: params.ttl,
        alpha: alpha as u16,
        beta: beta as u16,
        remainders,
        hint,
        sealed,
    };
    let state = InitiatorState {
        request_id,
        protocol,
        spec,
        x,
        k_t,
        created_at: params.created_at,
        window: params.window,
        kappa_max: params
            .kappa_max
            .unwrap_or_else(|| default_kappa_max(alpha, beta, params.p)),
        matches: Vec::new(),
        rng,
    };
    Ok((package, state))
}

impl InitiatorState {
    pub fn request_id(&self) -> RequestId {
        self.request_id
    }

    pub fn protocol(&self) -> ProtocolId {
        self.protocol
    }

    /// The effective spec; optional attributes are dropped when `beta == 0`.
    pub fn spec(&self) -> &RequestSpec {
        &self.spec
    }

    pub fn secret(&self) -> &Digest {
        &self.x
    }

    pub fn profile_key(&self) -> &ProfileKey {
        &self.k_t
    }

    pub fn group_key(&self) -> GroupKey {
        derive_group_key(&self.x)
    }

    pub fn kappa_max(&self) -> usize {
        self.kappa_max
    }

    pub fn deadline(&self) -> SimTime {
        self.created_at.saturating_add(self.window)
    }

    pub fn matches(&self) -> &[Match] {
        &self.matches
    }

    /// Drops late or oversized replies, then opens the rest under `x`.
    /// Accepted matches are also retained in the state.
    pub fn collect_replies(&mut self, replies: &[ReceivedReply]) -> Collected {
        let mut out = Collected::default();
        for r in replies {
            let rejection = if r.package.request_id != self.request_id {
                Some(Rejection::WrongRequest)
            } else if r.arrived_at > self.deadline() {
                Some(Rejection::Late)
            } else if r.package.acks.len() > self.kappa_max {
                Some(Rejection::TooManyAcks)
            } else if self.matches.iter().any(|m| m.replier == r.replier) {
                Some(Rejection::Duplicate)
            } else {
                None
            };
            if let Some(why) = rejection {
                out.rejected.push((r.replier, why));
                continue;
            }
            match verify_ack(&self.x, &r.package.acks) {
                Some(ack) => {
                    let m = Match {
                        replier: r.replier,
                        y: ack.y,
                        session_key: derive_session_key(&self.x, &ack.y),
                        extra: ack.extra,
                    };
                    self.matches.push(m.clone());
                    out.matches.push(m);
                }
                None => out.rejected.push((r.replier, Rejection::NoValidAck)),
            }
        }
        out
    }

    /// Tells an accepted matcher which of its candidate secrets was right.
    pub fn confirm(&mut self, m: &Match) -> ConfirmPackage {
        ConfirmPackage {
            request_id: self.request_id,
            sealed: seal_session_confirm(&m.session_key, &mut self.rng),
        }
    }
}
