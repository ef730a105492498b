//! Participant side: screen an incoming request and decide whether to drop,
//! relay or reply.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::channel::{
    derive_session_key, make_ack, open_request_payload, open_session_confirm, Opened, SessionKey,
};
use crate::digest::Digest;
use crate::field::PrimeField;
use crate::matching::{screen_vector, MatchError, RequestView, DEFAULT_ENUMERATION_LIMIT};
use crate::profile::{
    build_profile_vector, profile_entropy, Attribute, PopulationStats, Profile, ProfileError,
    ProfileKey, ProfileVector,
};

use super::{
    select_entropy_bounded, ConfirmPackage, FrequencyLimiter, NodeId, ProtocolId, RateLimit,
    ReplyPackage, RequestId, RequestPackage, SimTime,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantConfig {
    pub enumeration_limit: usize,
    /// Whether a replying participant stops relaying; `None` uses the
    /// protocol default (P1 stops, P2 and P3 keep relaying).
    pub stop_on_match: Option<bool>,
    /// Protocol 3 entropy budget in bits.
    pub phi: f64,
    pub rate_limit: RateLimit,
}

impl Default for ParticipantConfig {
    fn default() -> Self {
        ParticipantConfig {
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            stop_on_match: None,
            phi: f64::INFINITY,
            rate_limit: RateLimit::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    Expired,
    Duplicate,
    RateLimited,
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Drop(DropReason),
    /// Relay with decremented TTL; `None` once the TTL is spent.
    Forward(Option<RequestPackage>),
    Reply {
        reply: ReplyPackage,
        forward: Option<RequestPackage>,
    },
}

impl Action {
    pub fn forward(&self) -> Option<&RequestPackage> {
        match self {
            Action::Forward(f) | Action::Reply { forward: f, .. } => f.as_ref(),
            Action::Drop(_) => None,
        }
    }

    pub fn reply(&self) -> Option<&ReplyPackage> {
        match self {
            Action::Reply { reply, .. } => Some(reply),
            _ => None,
        }
    }
}

/// What screening found, for metrics and delay modelling.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScreenReport {
    pub screened: bool,
    pub assignments: usize,
    pub candidate_keys: usize,
    pub acks: usize,
    /// Enumeration hit the configured limit; the request was only relayed.
    pub over_limit: bool,
    /// Union entropy of the attributes behind the acks (Protocol 3 only).
    pub leaked_entropy: Option<f64>,
}

#[derive(Debug, Clone)]
struct Pending {
    y: Digest,
    secrets: Vec<Digest>,
}

#[derive(Debug, Clone)]
pub struct ParticipantState {
    id: NodeId,
    profile: Profile,
    attrs: Vec<Attribute>,
    vectors: Vec<ProfileVector>,
    stats: Option<Arc<PopulationStats>>,
    config: ParticipantConfig,
    limiter: FrequencyLimiter,
    seen: BTreeSet<RequestId>,
    pending: BTreeMap<RequestId, Pending>,
    sessions: BTreeMap<RequestId, SessionKey>,
    field: PrimeField,
    rng: ChaCha20Rng,
}

struct Found {
    key: ProfileKey,
    known: Vec<usize>,
    intersection: u16,
}

fn node_rng(id: NodeId, seed: u64) -> ChaCha20Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_be_bytes());
    bytes[8..12].copy_from_slice(&id.to_be_bytes());
    ChaCha20Rng::from_seed(bytes)
}

impl ParticipantState {
    pub fn new(
        id: NodeId,
        profile: Profile,
        stats: Option<Arc<PopulationStats>>,
        config: ParticipantConfig,
        seed: u64,
    ) -> Result<Self, ProfileError> {
        let vector = build_profile_vector(&profile, None)?;
        Ok(ParticipantState {
            id,
            attrs: profile.iter().cloned().collect(),
            profile,
            vectors: alloc::vec![vector],
            stats,
            limiter: FrequencyLimiter::new(config.rate_limit),
            config,
            seen: BTreeSet::new(),
            pending: BTreeMap::new(),
            sessions: BTreeMap::new(),
            field: PrimeField::hint_field(),
            rng: node_rng(id, seed),
        })
    }

    /// Restarts the random stream used for `y` and nonces.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = node_rng(self.id, seed);
    }

    /// Adds a profile-vector variant salted with a location-dependent key.
    pub fn add_dynamic_salt(&mut self, salt: &Digest) -> Result<(), ProfileError> {
        self.vectors
            .push(build_profile_vector(&self.profile, Some(salt))?);
        Ok(())
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn vectors(&self) -> &[ProfileVector] {
        &self.vectors
    }

    pub fn session(&self, request_id: &RequestId) -> Option<&SessionKey> {
        self.sessions.get(request_id)
    }

    /// `origin` is the initiator as reported by the transport; it keys the
    /// per-origin frequency limit.
    pub fn handle_request(
        &mut self,
        pkg: &RequestPackage,
        origin: NodeId,
        now: SimTime,
    ) -> (Action, ScreenReport) {
        let mut report = ScreenReport::default();
        if now > pkg.expiry {
            return (Action::Drop(DropReason::Expired), report);
        }
        if !self.seen.insert(pkg.request_id) {
            return (Action::Drop(DropReason::Duplicate), report);
        }
        if !self.limiter.check(origin, now) {
            return (Action::Drop(DropReason::RateLimited), report);
        }

        let forward = (pkg.ttl > 1).then(|| pkg.with_ttl(pkg.ttl - 1));
        let view = RequestView {
            alpha: usize::from(pkg.alpha),
            beta: usize::from(pkg.beta),
            remainders: &pkg.remainders,
            hint: pkg.hint.as_ref(),
        };
        report.screened = true;
        let mut found: Vec<Found> = Vec::new();
        let mut keys = BTreeSet::new();
        for vector in &self.vectors {
            match screen_vector(&view, vector, &self.field, self.config.enumeration_limit) {
                Ok(outcome) => {
                    report.assignments += outcome.assignments;
                    for c in outcome.candidates {
                        if keys.insert(c.key) {
                            let known: Vec<usize> = c
                                .assignment
                                .known_indices()
                                .map(|i| vector.origin(i))
                                .collect();
                            found.push(Found {
                                key: c.key,
                                intersection: known.len() as u16,
                                known,
                            });
                        }
                    }
                }
                Err(MatchError::LimitExceeded { .. }) => report.over_limit = true,
                Err(_) => return (Action::Drop(DropReason::Malformed), report),
            }
        }
        report.candidate_keys = found.len();
        if report.over_limit || found.is_empty() {
            return (Action::Forward(forward), report);
        }

        let mode = pkg.protocol.seal_mode();
        let mut secrets: Vec<(Digest, u16)> = Vec::new();
        match pkg.protocol {
            ProtocolId::P1 => {
                for f in &found {
                    match open_request_payload(&f.key, &pkg.sealed, mode) {
                        Ok(Opened::Confirmed(x)) => {
                            secrets.push((x, f.intersection));
                            break;
                        }
                        Ok(_) => {}
                        Err(_) => return (Action::Drop(DropReason::Malformed), report),
                    }
                }
            }
            ProtocolId::P2 | ProtocolId::P3 => {
                if pkg.protocol == ProtocolId::P3 {
                    let Some(stats) = &self.stats else {
                        return (Action::Forward(forward), report);
                    };
                    let sets: Vec<Vec<Attribute>> = found
                        .iter()
                        .map(|f| f.known.iter().map(|&i| self.attrs[i].clone()).collect())
                        .collect();
                    let chosen = select_entropy_bounded(&sets, self.config.phi, stats);
                    let union: BTreeSet<&Attribute> =
                        chosen.iter().flat_map(|&i| sets[i].iter()).collect();
                    report.leaked_entropy =
                        Some(profile_entropy(union, stats).unwrap_or(f64::INFINITY));
                    let keep: BTreeSet<usize> = chosen.into_iter().collect();
                    found = found
                        .into_iter()
                        .enumerate()
                        .filter(|(i, _)| keep.contains(i))
                        .map(|(_, f)| f)
                        .collect();
                }
                for f in &found {
                    match open_request_payload(&f.key, &pkg.sealed, mode) {
                        Ok(Opened::Unverified(x)) => secrets.push((x, f.intersection)),
                        Ok(_) => {}
                        Err(_) => return (Action::Drop(DropReason::Malformed), report),
                    }
                }
            }
        }
        if secrets.is_empty() {
            return (Action::Forward(forward), report);
        }

        let y = Digest::random(&mut self.rng);
        let acks = secrets
            .iter()
            .map(|(x, n)| make_ack(x, &y, &n.to_be_bytes(), &mut self.rng))
            .collect::<Vec<_>>();
        report.acks = acks.len();
        self.pending.insert(
            pkg.request_id,
            Pending {
                y,
                secrets: secrets.into_iter().map(|(x, _)| x).collect(),
            },
        );
        let stop = self
            .config
            .stop_on_match
            .unwrap_or(pkg.protocol.stops_on_match());
        let reply = ReplyPackage {
            request_id: pkg.request_id,
            acks,
        };
        (
            Action::Reply {
                reply,
                forward: if stop { None } else { forward },
            },
            report,
        )
    }

    /// Completes the handshake: finds the candidate secret the initiator's
    /// confirmation was sealed for and records the session key.
    pub fn confirm_session(&mut self, confirm: &ConfirmPackage) -> Option<SessionKey> {
        let pending = self.pending.get(&confirm.request_id)?;
        let key = pending
            .secrets
            .iter()
            .map(|x| derive_session_key(x, &pending.y))
            .find(|k| open_session_confirm(k, &confirm.sealed))?;
        self.pending.remove(&confirm.request_id);
        self.sessions.insert(confirm.request_id, key);
        Some(key)
    }
}
