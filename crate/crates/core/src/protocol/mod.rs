//! Request/reply packages and the initiator and participant state machines
//! for the three matching protocols.

mod budget;
mod initiator;
mod limiter;
mod participant;
mod wire;

pub use budget::{phi_k_anonymity, phi_sensitive, select_entropy_bounded};
pub use initiator::{
    create_request, default_kappa_max, Collected, InitiatorState, Match, ReceivedReply, Rejection,
    RequestParams,
};
pub use limiter::{FrequencyLimiter, RateLimit};
pub use participant::{Action, DropReason, ParticipantConfig, ParticipantState, ScreenReport};
pub use wire::{
    decode_confirm, decode_reply, decode_request, encode_confirm, encode_reply, encode_request,
    message_kind, peek_request_id, request_encoded_len, ConfirmPackage, MessageKind, ReplyPackage,
    RequestPackage, WireError, CONFIRM_MAGIC, REPLY_MAGIC, REQUEST_HEADER_LEN, REQUEST_MAGIC,
    WIRE_VERSION,
};

use crate::channel::SealMode;
use crate::matching::MatchError;
use crate::profile::ProfileError;

/// Simulated time in microseconds.
pub type SimTime = u64;

pub type NodeId = u32;

pub type RequestId = [u8; 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProtocolId {
    /// Sealed with a confirmation tag; only a true matcher replies.
    P1 = 1,
    /// Unverifiable sealing; every candidate acks each candidate secret.
    P2 = 2,
    /// As P2, with acks limited by the participant's entropy budget.
    P3 = 3,
}

impl ProtocolId {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(ProtocolId::P1),
            2 => Some(ProtocolId::P2),
            3 => Some(ProtocolId::P3),
            _ => None,
        }
    }

    pub fn seal_mode(self) -> SealMode {
        match self {
            ProtocolId::P1 => SealMode::WithConfirmation,
            ProtocolId::P2 | ProtocolId::P3 => SealMode::Plain,
        }
    }

    /// Whether a replying participant stops relaying by default.
    pub fn stops_on_match(self) -> bool {
        self == ProtocolId::P1
    }
}

impl core::fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "P{}", *self as u8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Wire(#[from] WireError),
}

#[cfg(test)]
mod tests;
