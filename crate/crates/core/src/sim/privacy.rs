//! Privacy protection levels reached by each protocol against an
//! honest-but-curious peer.

use crate::protocol::ProtocolId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrivacyLevel {
    /// The peer learns the whole profile.
    Ppl0,
    /// The peer learns the intersection with its own profile.
    Ppl1,
    /// The peer learns the necessary attributes and that the optional
    /// threshold is met.
    Ppl2,
    /// The peer learns nothing.
    Ppl3,
}

impl core::fmt::Display for PrivacyLevel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "PPL{}", *self as u8)
    }
}

/// Level of each profile against each party.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrivacyLabels {
    pub initiator_vs_matcher: PrivacyLevel,
    pub initiator_vs_unmatched: PrivacyLevel,
    pub matcher_vs_initiator: PrivacyLevel,
    pub unmatched_vs_initiator: PrivacyLevel,
}

pub fn privacy_labels(protocol: ProtocolId) -> PrivacyLabels {
    use PrivacyLevel::*;
    PrivacyLabels {
        // a P1 matcher decrypts the confirmed request and so learns the overlap
        initiator_vs_matcher: if protocol == ProtocolId::P1 {
            Ppl1
        } else {
            Ppl3
        },
        initiator_vs_unmatched: Ppl3,
        matcher_vs_initiator: Ppl2,
        unmatched_vs_initiator: Ppl3,
    }
}
