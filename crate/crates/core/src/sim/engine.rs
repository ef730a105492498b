//! The event loop.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::channel::SessionKey;
use crate::digest::Digest;
use crate::matching::oracle_match;
use crate::profile::{PopulationStats, Profile, ProfileError, RequestSpec};
use crate::protocol::{
    create_request, decode_confirm, decode_reply, decode_request, default_kappa_max,
    encode_confirm, encode_reply, encode_request, Action, ConfirmPackage, DropReason, MessageKind,
    NodeId, ParticipantConfig, ParticipantState, ProtocolId, ReceivedReply, Rejection,
    ReplyPackage, RequestId, RequestPackage, RequestParams, SimTime,
};

use super::{privacy_labels, PrivacyLabels, SimError, Topology};

/// One request injected at `initiator`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub protocol: ProtocolId,
    pub spec: RequestSpec,
    pub p: u32,
    pub initiator: NodeId,
    pub seed: u64,
    /// Defaults to the node count, capped at 255.
    pub ttl: Option<u8>,
    /// Request lifetime; defaults to `max_time`.
    pub lifetime: Option<SimTime>,
    /// Reply window; defaults to twice the diameter bound in hop delays
    /// plus the processing time of `kappa_max` candidate keys.
    pub window: Option<SimTime>,
    pub kappa_max: Option<usize>,
    /// Defaults to ten times the diameter bound in hop delays.
    pub max_time: Option<SimTime>,
    /// Fixed processing time before a node relays or replies.
    pub base_delay: SimTime,
    /// Extra reply latency per candidate key.
    pub per_key_delay: SimTime,
    pub dynamic_salt: Option<Digest>,
    /// Keep the bytes of every transmission in the trace.
    pub capture: bool,
}

impl Scenario {
    pub fn new(
        protocol: ProtocolId,
        spec: RequestSpec,
        p: u32,
        initiator: NodeId,
        seed: u64,
    ) -> Self {
        Scenario {
            protocol,
            spec,
            p,
            initiator,
            seed,
            ttl: None,
            lifetime: None,
            window: None,
            kappa_max: None,
            max_time: None,
            base_delay: 100,
            per_key_delay: 1_000,
            dynamic_salt: None,
            capture: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// `to` is `None` for a broadcast.
    Send {
        from: NodeId,
        to: Option<NodeId>,
        kind: MessageKind,
        len: usize,
    },
    Receive {
        node: NodeId,
        from: NodeId,
        kind: MessageKind,
    },
    Forward {
        node: NodeId,
        ttl: u8,
    },
    Reply {
        node: NodeId,
        acks: usize,
    },
    Drop {
        node: NodeId,
        reason: DropReason,
    },
    Reject {
        replier: NodeId,
        reason: Rejection,
    },
    MatchEstablished {
        matcher: NodeId,
        agreed: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimEvent {
    pub time: SimTime,
    pub event: TraceEvent,
    /// Transmitted bytes, on `Send` events when capture is enabled.
    pub bytes: Option<Arc<[u8]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimTrace {
    pub request_id: RequestId,
    pub events: Vec<SimEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub protocol: ProtocolId,
    pub p: u32,
    pub theta: f64,
    pub m_t: usize,
    pub seed: u64,
    /// Nodes other than the initiator.
    pub participants: usize,
    /// Participants that screened the request.
    pub reached: usize,
    /// Participants deriving at least one candidate key.
    pub candidates: usize,
    /// Oracle matches among all participants.
    pub oracle_matches: usize,
    /// Oracle matches among reached participants.
    pub reachable_matches: usize,
    pub repliers: usize,
    pub acks: usize,
    pub accepted: usize,
    pub sessions: usize,
    pub session_mismatches: usize,
    /// Accepted non-matchers plus reachable matchers not accepted, minus
    /// matchers that withheld their reply under the entropy budget.
    pub disagreements: usize,
    /// Reachable matchers that withheld under the entropy budget.
    pub withheld: usize,
    /// Participants whose enumeration hit the limit.
    pub over_limit: usize,
    pub broadcasts: usize,
    pub unicasts: usize,
    pub total_bytes: usize,
    pub request_bytes: usize,
    /// Candidate keys derived per node, indexed by node id.
    pub key_set_sizes: Vec<usize>,
    /// Time of the first established session.
    pub latency: Option<SimTime>,
    pub window: SimTime,
    pub end_time: SimTime,
    /// Deliveries still queued when the run stopped.
    pub in_flight: usize,
    pub privacy: PrivacyLabels,
    pub established: Vec<Session>,
}

/// Both ends of a completed handshake.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub matcher: NodeId,
    pub y: Digest,
    pub initiator_key: SessionKey,
    pub matcher_key: SessionKey,
}

impl Metrics {
    pub fn candidate_fraction(&self) -> f64 {
        self.candidates as f64 / self.participants as f64
    }

    pub fn matching_fraction(&self) -> f64 {
        self.reachable_matches as f64 / self.participants as f64
    }

    pub fn reply_fraction(&self) -> f64 {
        self.repliers as f64 / self.participants as f64
    }
}

/// One participant per profile; node `i` holds `profiles[i]`.
pub fn build_participants(
    profiles: &[Profile],
    stats: Option<Arc<PopulationStats>>,
    config: &ParticipantConfig,
    seed: u64,
) -> Result<Vec<ParticipantState>, ProfileError> {
    profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            ParticipantState::new(i as NodeId, p.clone(), stats.clone(), config.clone(), seed)
        })
        .collect()
}

#[derive(Debug, Clone)]
enum Body {
    Request(RequestPackage),
    /// `route` runs from the replier towards the initiator.
    Reply {
        pkg: ReplyPackage,
        route: Vec<NodeId>,
    },
    /// `route` holds the remaining hops, last one next.
    Confirm {
        pkg: ConfirmPackage,
        route: Vec<NodeId>,
    },
}

#[derive(Debug)]
struct Message {
    kind: MessageKind,
    bytes: Arc<[u8]>,
    body: Body,
}

#[derive(Debug)]
enum Job {
    Transmit {
        from: NodeId,
        to: Option<NodeId>,
        msg: Arc<Message>,
    },
    Deliver {
        from: NodeId,
        to: NodeId,
        msg: Arc<Message>,
    },
}

struct Queued {
    time: SimTime,
    seq: u64,
    job: Job,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

struct Sim<'a> {
    topology: &'a Topology,
    queue: BinaryHeap<Reverse<Queued>>,
    seq: u64,
    trace: SimTrace,
    capture: bool,
    broadcasts: usize,
    unicasts: usize,
    total_bytes: usize,
}

impl Sim<'_> {
    fn push(&mut self, time: SimTime, job: Job) {
        self.seq += 1;
        self.queue.push(Reverse(Queued {
            time,
            seq: self.seq,
            job,
        }));
    }

    fn log(&mut self, time: SimTime, event: TraceEvent) {
        self.trace.events.push(SimEvent {
            time,
            event,
            bytes: None,
        });
    }

    fn transmit(&mut self, now: SimTime, from: NodeId, to: Option<NodeId>, msg: Arc<Message>) {
        let bytes = self.capture.then(|| msg.bytes.clone());
        self.trace.events.push(SimEvent {
            time: now,
            event: TraceEvent::Send {
                from,
                to,
                kind: msg.kind,
                len: msg.bytes.len(),
            },
            bytes,
        });
        self.total_bytes += msg.bytes.len();
        let at = now.saturating_add(self.topology.edge_delay());
        match to {
            Some(to) => {
                self.unicasts += 1;
                self.push(at, Job::Deliver { from, to, msg });
            }
            None => {
                self.broadcasts += 1;
                for &to in self.topology.neighbors(from) {
                    self.push(
                        at,
                        Job::Deliver {
                            from,
                            to,
                            msg: msg.clone(),
                        },
                    );
                }
            }
        }
    }
}

fn request_message(pkg: &RequestPackage) -> Arc<Message> {
    let bytes = encode_request(pkg);
    let body = Body::Request(decode_request(&bytes).expect("encoded request decodes"));
    Arc::new(Message {
        kind: MessageKind::Request,
        bytes: bytes.into(),
        body,
    })
}

fn reply_message(pkg: &ReplyPackage, route: Vec<NodeId>) -> Arc<Message> {
    let bytes = encode_reply(pkg);
    let pkg = decode_reply(&bytes).expect("encoded reply decodes");
    Arc::new(Message {
        kind: MessageKind::Reply,
        bytes: bytes.into(),
        body: Body::Reply { pkg, route },
    })
}

fn confirm_message(pkg: &ConfirmPackage, route: Vec<NodeId>) -> Arc<Message> {
    let bytes = encode_confirm(pkg);
    let pkg = decode_confirm(&bytes).expect("encoded confirmation decodes");
    Arc::new(Message {
        kind: MessageKind::Confirm,
        bytes: bytes.into(),
        body: Body::Confirm { pkg, route },
    })
}

/// Runs one request to completion. `participants[i]` acts as node `i`;
/// the initiator's entry is ignored.
pub fn run_scenario(
    participants: &[ParticipantState],
    topology: &Topology,
    scenario: &Scenario,
) -> Result<(SimTrace, Metrics), SimError> {
    let n = topology.len();
    if participants.len() != n {
        return Err(SimError::SizeMismatch {
            population: participants.len(),
            nodes: n,
        });
    }
    let origin = scenario.initiator;
    if origin as usize >= n {
        return Err(SimError::InvalidParameter("initiator is not a node"));
    }

    let effective = scenario.spec.without_free_optionals();
    let hop = topology.edge_delay().saturating_add(scenario.base_delay);
    let diameter_delay =
        hop.saturating_mul(2 * SimTime::from(topology.eccentricity(origin)).max(1));
    let kappa = scenario
        .kappa_max
        .unwrap_or_else(|| default_kappa_max(effective.alpha(), effective.beta(), scenario.p));
    let window = scenario.window.unwrap_or_else(|| {
        diameter_delay
            .saturating_mul(2)
            .saturating_add(scenario.per_key_delay.saturating_mul(kappa as SimTime))
    });
    let max_time = scenario.max_time.unwrap_or_else(|| {
        diameter_delay
            .saturating_mul(10)
            .max(window.saturating_add(diameter_delay))
    });
    let mut params = RequestParams::new(scenario.p, scenario.seed);
    params.ttl = scenario.ttl.unwrap_or(n.min(255) as u8);
    params.expiry = scenario.lifetime.unwrap_or(max_time);
    params.window = window;
    params.kappa_max = Some(kappa);
    params.dynamic_salt = scenario.dynamic_salt;
    let (pkg, mut init) = create_request(&scenario.spec, scenario.protocol, &params)?;

    let mut nodes: Vec<ParticipantState> = participants.to_vec();
    for node in &mut nodes {
        node.reseed(scenario.seed);
    }
    let mut sim = Sim {
        topology,
        queue: BinaryHeap::new(),
        seq: 0,
        trace: SimTrace {
            request_id: pkg.request_id,
            events: Vec::new(),
        },
        capture: scenario.capture,
        broadcasts: 0,
        unicasts: 0,
        total_bytes: 0,
    };
    let first = request_message(&pkg);
    let request_bytes = first.bytes.len();
    sim.push(
        0,
        Job::Transmit {
            from: origin,
            to: None,
            msg: first,
        },
    );

    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut reached = vec![false; n];
    let mut key_sets = vec![0usize; n];
    let mut replied = vec![false; n];
    let mut withheld = vec![false; n];
    let mut over_limit = 0;
    let mut acks = 0;
    let mut initiator_keys: BTreeMap<NodeId, (SessionKey, Digest)> = BTreeMap::new();
    let mut established = Vec::new();
    let mut sessions = 0;
    let mut mismatches = 0;
    let mut latency = None;
    let mut end_time = 0;

    while let Some(Reverse(q)) = sim.queue.pop() {
        if q.time > max_time {
            sim.queue.push(Reverse(q));
            break;
        }
        let now = q.time;
        end_time = now;
        match q.job {
            Job::Transmit { from, to, msg } => {
                match (&msg.body, to) {
                    (Body::Request(r), _) if from != origin => sim.log(
                        now,
                        TraceEvent::Forward {
                            node: from,
                            ttl: r.ttl,
                        },
                    ),
                    (Body::Reply { pkg, route }, _) if route.len() == 1 => sim.log(
                        now,
                        TraceEvent::Reply {
                            node: from,
                            acks: pkg.acks.len(),
                        },
                    ),
                    _ => {}
                }
                sim.transmit(now, from, to, msg);
            }
            Job::Deliver { from, to, msg } => {
                sim.log(
                    now,
                    TraceEvent::Receive {
                        node: to,
                        from,
                        kind: msg.kind,
                    },
                );
                match &msg.body {
                    Body::Request(req) => {
                        if to == origin {
                            sim.log(
                                now,
                                TraceEvent::Drop {
                                    node: to,
                                    reason: DropReason::Duplicate,
                                },
                            );
                            continue;
                        }
                        let (action, report) = nodes[to as usize].handle_request(req, origin, now);
                        if report.screened {
                            reached[to as usize] = true;
                            parent[to as usize] = Some(from);
                            key_sets[to as usize] = report.candidate_keys;
                            over_limit += usize::from(report.over_limit);
                            withheld[to as usize] = report.candidate_keys > 0 && report.acks == 0;
                        }
                        match action {
                            Action::Drop(reason) => {
                                sim.log(now, TraceEvent::Drop { node: to, reason })
                            }
                            Action::Forward(fwd) => {
                                if let Some(f) = fwd {
                                    sim.push(
                                        now + scenario.base_delay,
                                        Job::Transmit {
                                            from: to,
                                            to: None,
                                            msg: request_message(&f),
                                        },
                                    );
                                }
                            }
                            Action::Reply { reply, forward } => {
                                replied[to as usize] = true;
                                acks += reply.acks.len();
                                let delay = scenario.base_delay.saturating_add(
                                    scenario
                                        .per_key_delay
                                        .saturating_mul(report.candidate_keys as SimTime),
                                );
                                let msg = reply_message(&reply, vec![to]);
                                sim.push(
                                    now.saturating_add(delay),
                                    Job::Transmit {
                                        from: to,
                                        to: Some(from),
                                        msg,
                                    },
                                );
                                if let Some(f) = forward {
                                    sim.push(
                                        now + scenario.base_delay,
                                        Job::Transmit {
                                            from: to,
                                            to: None,
                                            msg: request_message(&f),
                                        },
                                    );
                                }
                            }
                        }
                    }
                    Body::Reply { pkg, route } => {
                        if to != origin {
                            let Some(next) = parent[to as usize] else {
                                continue;
                            };
                            let mut route = route.clone();
                            route.push(to);
                            let msg = reply_message(pkg, route);
                            sim.push(
                                now,
                                Job::Transmit {
                                    from: to,
                                    to: Some(next),
                                    msg,
                                },
                            );
                            continue;
                        }
                        let replier = route[0];
                        let got = init.collect_replies(&[ReceivedReply {
                            replier,
                            arrived_at: now,
                            package: pkg.clone(),
                        }]);
                        for (replier, reason) in got.rejected {
                            sim.log(now, TraceEvent::Reject { replier, reason });
                        }
                        for m in got.matches {
                            initiator_keys.insert(m.replier, (m.session_key, m.y));
                            let confirm = init.confirm(&m);
                            let mut back = route.clone();
                            let next = back.pop().unwrap();
                            sim.push(
                                now,
                                Job::Transmit {
                                    from: to,
                                    to: Some(next),
                                    msg: confirm_message(&confirm, back),
                                },
                            );
                        }
                    }
                    Body::Confirm { pkg, route } => {
                        let mut route = route.clone();
                        match route.pop() {
                            Some(next) => sim.push(
                                now,
                                Job::Transmit {
                                    from: to,
                                    to: Some(next),
                                    msg: confirm_message(pkg, route),
                                },
                            ),
                            None => {
                                if let Some(key) = nodes[to as usize].confirm_session(pkg) {
                                    let (initiator_key, y) = initiator_keys[&to];
                                    let agreed = initiator_key == key;
                                    established.push(Session {
                                        matcher: to,
                                        y,
                                        initiator_key,
                                        matcher_key: key,
                                    });
                                    sessions += 1;
                                    mismatches += usize::from(!agreed);
                                    latency.get_or_insert(now);
                                    sim.log(
                                        now,
                                        TraceEvent::MatchEstablished {
                                            matcher: to,
                                            agreed,
                                        },
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let in_flight = sim
        .queue
        .iter()
        .filter(|Reverse(q)| matches!(q.job, Job::Deliver { .. }))
        .count();

    let spec = init.spec();
    let mut oracle_matches = 0;
    let mut reachable_matches = 0;
    let mut disagreements = 0;
    let mut withheld_matches = 0;
    for (i, node) in nodes.iter().enumerate() {
        if i == origin as usize {
            continue;
        }
        let truth = oracle_match(spec, node.profile()).is_match();
        let accepted = initiator_keys.contains_key(&(i as NodeId));
        oracle_matches += usize::from(truth);
        if truth && reached[i] {
            reachable_matches += 1;
        }
        if accepted && !truth {
            disagreements += 1;
        } else if truth && reached[i] && !accepted {
            if withheld[i] {
                withheld_matches += 1;
            } else {
                disagreements += 1;
            }
        }
    }

    let metrics = Metrics {
        protocol: scenario.protocol,
        p: scenario.p,
        theta: scenario.spec.theta(),
        m_t: scenario.spec.m_t(),
        seed: scenario.seed,
        participants: n - 1,
        reached: reached.iter().filter(|&&r| r).count(),
        candidates: key_sets.iter().filter(|&&k| k > 0).count(),
        oracle_matches,
        reachable_matches,
        repliers: replied.iter().filter(|&&r| r).count(),
        acks,
        accepted: initiator_keys.len(),
        sessions,
        session_mismatches: mismatches,
        disagreements,
        withheld: withheld_matches,
        over_limit,
        broadcasts: sim.broadcasts,
        unicasts: sim.unicasts,
        total_bytes: sim.total_bytes,
        request_bytes,
        key_set_sizes: key_sets,
        latency,
        window,
        end_time,
        in_flight,
        privacy: privacy_labels(scenario.protocol),
        established,
    };
    Ok((sim.trace, metrics))
}
