//! On-disk formats: population CSV, statistics JSON, trace JSON-lines and
//! metrics CSV.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use sealedbottle_core::profile::{Attribute, PopulationStats, Profile, DEFAULT_MAX_ATTRIBUTES};
use sealedbottle_core::protocol::{DropReason, MessageKind, Rejection};
use sealedbottle_core::sim::{Metrics, SimTrace, TraceEvent};

use crate::CliError;

/// Header comment written above every CSV and JSON-lines output.
pub fn provenance_line(command: &str, config_digest: &str) -> String {
    format!(
        "# sealedbottle {} {command} format=1 config={config_digest}",
        env!("CARGO_PKG_VERSION")
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct PopulationRow {
    user_id: u64,
    category: String,
    value: String,
}

pub fn write_population<W: Write>(out: W, profiles: &[Profile]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for (id, profile) in profiles.iter().enumerate() {
        for a in profile.iter() {
            w.serialize(PopulationRow {
                user_id: id as u64,
                category: a.category().into(),
                value: a.value().into(),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Users in ascending `user_id` order. Ids need not be dense; a simulation
/// addresses user `k` of the returned list as node `k`.
pub fn read_population<R: std::io::Read>(input: R) -> Result<Vec<(u64, Profile)>, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut users: BTreeMap<u64, Vec<Attribute>> = BTreeMap::new();
    for (line, row) in r.deserialize::<PopulationRow>().enumerate() {
        let row = row?;
        let attr = Attribute::new(&row.category, &row.value)
            .map_err(|e| CliError::Input(format!("population row {}: {e}", line + 1)))?;
        users.entry(row.user_id).or_default().push(attr);
    }
    if users.is_empty() {
        return Err(CliError::Input("population file holds no users".into()));
    }
    users
        .into_iter()
        .map(|(id, attrs)| {
            let limit = attrs.len().max(DEFAULT_MAX_ATTRIBUTES);
            Profile::with_limit(attrs, limit)
                .map(|p| (id, p))
                .map_err(|e| CliError::Input(format!("user {id}: {e}")))
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsFile {
    pub population: usize,
    pub categories: BTreeMap<String, BTreeMap<String, u64>>,
}

pub fn write_stats<W: Write>(out: W, stats: &PopulationStats) -> Result<(), CliError> {
    let file = StatsFile {
        population: stats.population_size(),
        categories: stats.counts().clone(),
    };
    serde_json::to_writer_pretty(out, &file)?;
    Ok(())
}

pub fn read_stats<R: std::io::Read>(input: R) -> Result<PopulationStats, CliError> {
    let file: StatsFile = serde_json::from_reader(input)?;
    Ok(PopulationStats::from_counts(
        file.population,
        file.categories,
    ))
}

fn kind_name(kind: MessageKind) -> &'static str {
    match kind {
        MessageKind::Request => "request",
        MessageKind::Reply => "reply",
        MessageKind::Confirm => "confirm",
    }
}

fn drop_name(reason: DropReason) -> &'static str {
    match reason {
        DropReason::Expired => "expired",
        DropReason::Duplicate => "duplicate",
        DropReason::RateLimited => "rate-limited",
        DropReason::Malformed => "malformed",
    }
}

fn rejection_name(reason: Rejection) -> &'static str {
    match reason {
        Rejection::WrongRequest => "wrong-request",
        Rejection::Late => "late",
        Rejection::TooManyAcks => "too-many-acks",
        Rejection::NoValidAck => "no-valid-ack",
        Rejection::Duplicate => "duplicate",
    }
}

/// One trace line. Field order is the declaration order.
#[derive(Debug, Serialize)]
struct TraceLine<'a> {
    time: u64,
    event: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    node: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    from: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    to: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ttl: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    acks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agreed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bytes: Option<&'a str>,
}

impl TraceLine<'_> {
    fn new(time: u64, event: &'static str) -> Self {
        TraceLine {
            time,
            event,
            node: None,
            from: None,
            to: None,
            kind: None,
            len: None,
            ttl: None,
            acks: None,
            reason: None,
            agreed: None,
            bytes: None,
        }
    }
}

/// Writes the provenance header, then one JSON object per event.
pub fn write_trace<W: Write>(mut out: W, header: &str, trace: &SimTrace) -> Result<(), CliError> {
    writeln!(out, "{header} request_id={}", hex::encode(trace.request_id))?;
    for ev in &trace.events {
        let hex_bytes = ev.bytes.as_ref().map(hex::encode);
        let mut line = match ev.event {
            TraceEvent::Send {
                from,
                to,
                kind,
                len,
            } => TraceLine {
                from: Some(from),
                to,
                kind: Some(kind_name(kind)),
                len: Some(len),
                ..TraceLine::new(ev.time, if to.is_some() { "unicast" } else { "broadcast" })
            },
            TraceEvent::Receive { node, from, kind } => TraceLine {
                node: Some(node),
                from: Some(from),
                kind: Some(kind_name(kind)),
                ..TraceLine::new(ev.time, "receive")
            },
            TraceEvent::Forward { node, ttl } => TraceLine {
                node: Some(node),
                ttl: Some(ttl),
                ..TraceLine::new(ev.time, "forward")
            },
            TraceEvent::Reply { node, acks } => TraceLine {
                node: Some(node),
                acks: Some(acks),
                ..TraceLine::new(ev.time, "reply")
            },
            TraceEvent::Drop { node, reason } => TraceLine {
                node: Some(node),
                reason: Some(drop_name(reason)),
                ..TraceLine::new(ev.time, "drop")
            },
            TraceEvent::Reject { replier, reason } => TraceLine {
                from: Some(replier),
                reason: Some(rejection_name(reason)),
                ..TraceLine::new(ev.time, "reject")
            },
            TraceEvent::MatchEstablished { matcher, agreed } => TraceLine {
                node: Some(matcher),
                agreed: Some(agreed),
                ..TraceLine::new(ev.time, "match-established")
            },
        };
        line.bytes = hex_bytes.as_deref();
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub const METRICS_HEADER: [&str; 10] = [
    "protocol",
    "p",
    "theta",
    "m_t",
    "seed",
    "candidate_fraction",
    "matching_fraction",
    "replies",
    "bytes",
    "latency",
];

/// Metrics CSV: provenance comment, fixed header, one row per run. An
/// absent latency (no session) is an empty field.
pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(mut out: W, header: &str) -> Result<Self, CliError> {
        writeln!(out, "{header}")?;
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(METRICS_HEADER)?;
        Ok(MetricsWriter { inner })
    }

    pub fn row(&mut self, m: &Metrics) -> Result<(), CliError> {
        self.inner.write_record([
            m.protocol.to_string(),
            m.p.to_string(),
            m.theta.to_string(),
            m.m_t.to_string(),
            m.seed.to_string(),
            m.candidate_fraction().to_string(),
            m.matching_fraction().to_string(),
            m.repliers.to_string(),
            m.total_bytes.to_string(),
            m.latency.map(|t| t.to_string()).unwrap_or_default(),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Reads the lines of a metrics CSV, skipping comments; used by tests and
/// by tooling that post-processes sweeps.
pub fn read_metrics_rows<R: BufRead>(input: R) -> Result<Vec<BTreeMap<String, String>>, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let headers = r.headers()?.clone();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(
            headers
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect(),
        );
    }
    Ok(rows)
}
