//! Per-origin token bucket.

use alloc::collections::BTreeMap;

use super::{NodeId, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateLimit {
    /// Bucket capacity.
    pub burst: u32,
    /// Time to refill one token.
    pub interval: SimTime,
}

impl Default for RateLimit {
    /// One request per origin per 60 simulated seconds.
    fn default() -> Self {
        RateLimit {
            burst: 1,
            interval: 60_000_000,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FrequencyLimiter {
    limit: RateLimit,
    buckets: BTreeMap<NodeId, (u32, SimTime)>,
}

impl FrequencyLimiter {
    pub fn new(limit: RateLimit) -> Self {
        FrequencyLimiter {
            limit,
            buckets: BTreeMap::new(),
        }
    }

    pub fn limit(&self) -> RateLimit {
        self.limit
    }

    /// Takes a token for `origin` if one is available.
    pub fn check(&mut self, origin: NodeId, now: SimTime) -> bool {
        let RateLimit { burst, interval } = self.limit;
        if burst == 0 {
            return false;
        }
        let (tokens, last) = self.buckets.entry(origin).or_insert((burst, now));
        if interval == 0 {
            *tokens = burst;
        } else if now > *last {
            let earned = (now - *last) / interval;
            let refilled = u64::from(*tokens).saturating_add(earned);
            if refilled >= u64::from(burst) {
                *tokens = burst;
                *last = now;
            } else {
                *tokens = refilled as u32;
                *last += earned * interval;
            }
        }
        if *tokens > 0 {
            *tokens -= 1;
            true
        } else {
            false
        }
    }
}
