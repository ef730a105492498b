//! Run configuration files (TOML). Unknown keys are rejected and every
//! error names the path of the offending key.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use sealedbottle_core::profile::{AttrCount, Attribute, PopulationParams};
use sealedbottle_core::protocol::ProtocolId;
use sealedbottle_core::sim::TopologyKind;

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub population: PopulationConfig,
    #[serde(default)]
    pub topology: TopologyConfig,
    #[serde(default)]
    pub request: RequestConfig,
    #[serde(default)]
    pub sim: SimConfig,
    pub sweep: Option<SweepConfig>,
    pub geo: Option<GeoConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either `file` (a population CSV) or generation parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    pub file: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub n: Option<usize>,
    pub categories: Option<usize>,
    pub values_per_category: Option<usize>,
    pub zipf_s: Option<f64>,
    /// Exactly this many attributes per user.
    pub attrs: Option<usize>,
    pub attrs_mean: Option<f64>,
    pub attrs_max: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl PopulationConfig {
    pub fn params(&self) -> Result<PopulationParams, CliError> {
        if self.file.is_some() {
            return Err(CliError::Usage(
                "population: `file` excludes generation parameters".into(),
            ));
        }
        let d = PopulationParams::default();
        let attrs_per_user = match (self.attrs, self.attrs_mean, self.attrs_max) {
            (Some(k), None, None) => AttrCount::Fixed(k),
            (None, mean, max) => {
                let (d_mean, d_max) = match d.attrs_per_user {
                    AttrCount::Poisson { mean, max } => (mean, max),
                    AttrCount::Fixed(k) => (k as f64, k),
                };
                AttrCount::Poisson {
                    mean: mean.unwrap_or(d_mean),
                    max: max.unwrap_or(d_max),
                }
            }
            _ => {
                return Err(CliError::Usage(
                    "population.attrs excludes attrs_mean and attrs_max".into(),
                ))
            }
        };
        Ok(PopulationParams {
            n: self.n.unwrap_or(d.n),
            categories: self.categories.unwrap_or(d.categories),
            values_per_category: self.values_per_category.unwrap_or(d.values_per_category),
            zipf_s: self.zipf_s.unwrap_or(d.zipf_s),
            attrs_per_user,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyName {
    Complete,
    Ring,
    Grid,
    RandomGeometric,
    Star,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyConfig {
    pub kind: TopologyName,
    /// Connection radius over the unit square, random-geometric only.
    pub radius: Option<f64>,
    pub edge_delay: u64,
    pub seed: u64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            kind: TopologyName::RandomGeometric,
            radius: None,
            edge_delay: 1_000,
            seed: 0,
        }
    }
}

impl TopologyConfig {
    pub fn kind(&self) -> Result<TopologyKind, CliError> {
        Ok(match (self.kind, self.radius) {
            (TopologyName::RandomGeometric, r) => TopologyKind::RandomGeometric {
                radius: r.unwrap_or(0.2),
            },
            (_, Some(_)) => {
                return Err(CliError::Usage(
                    "topology.radius applies to random-geometric only".into(),
                ))
            }
            (TopologyName::Complete, None) => TopologyKind::Complete,
            (TopologyName::Ring, None) => TopologyKind::Ring,
            (TopologyName::Grid, None) => TopologyKind::Grid,
            (TopologyName::Star, None) => TopologyKind::Star,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Protocol {
    P1,
    P2,
    P3,
}

impl From<Protocol> for ProtocolId {
    fn from(p: Protocol) -> Self {
        match p {
            Protocol::P1 => ProtocolId::P1,
            Protocol::P2 => ProtocolId::P2,
            Protocol::P3 => ProtocolId::P3,
        }
    }
}

/// The request. Attributes are written `category=value`; a bare value is a
/// tag. With `from_initiator = k` the request is the first `k` attributes
/// of the initiator's own profile, all optional.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RequestConfig {
    pub protocol: Protocol,
    pub p: u32,
    pub initiator: u32,
    pub necessary: Vec<String>,
    pub optional: Vec<String>,
    pub from_initiator: Option<usize>,
    pub beta: Option<usize>,
    pub theta: Option<f64>,
}

impl Default for RequestConfig {
    fn default() -> Self {
        RequestConfig {
            protocol: Protocol::P1,
            p: 11,
            initiator: 0,
            necessary: Vec::new(),
            optional: Vec::new(),
            from_initiator: None,
            beta: None,
            theta: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub seeds: Vec<u64>,
    pub base_delay: u64,
    pub per_key_delay: u64,
    pub kappa_max: Option<usize>,
    pub ttl: Option<u8>,
    pub window: Option<u64>,
    pub max_time: Option<u64>,
    /// Hex dump every transmission into the trace.
    pub capture: bool,
    /// Participants' entropy budget under protocol 3.
    pub phi: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seeds: vec![0],
            base_delay: 100,
            per_key_delay: 1_000,
            kappa_max: None,
            ttl: None,
            window: None,
            max_time: None,
            capture: false,
            phi: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub protocols: Vec<Protocol>,
    pub ps: Vec<u32>,
    pub thetas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Request taken from a seed-chosen user holding at least `m_t` attributes.
    pub m_t: Option<usize>,
    /// Or the same attributes (all optional) in every cell.
    pub attributes: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeoConfig {
    pub d: f64,
    pub origin: [f64; 2],
    pub rings: u32,
    /// Two or more user positions; every pair is compared.
    pub users: Vec<[f64; 2]>,
    /// Matching threshold Θ on vicinity overlap.
    pub threshold: Option<f64>,
}

impl Default for GeoConfig {
    fn default() -> Self {
        // two users two lattice steps apart with K = 2 rings
        GeoConfig {
            d: 1.0,
            origin: [0.0, 0.0],
            rings: 2,
            users: vec![[0.0, 0.0], [2.0, 0.0]],
            threshold: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub trace: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    /// Per-cell candidate key-set sizes (sweep only).
    pub key_sets: Option<PathBuf>,
}

/// A parsed configuration with the digest of its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub digest: String,
    /// Relative paths inside the config resolve against this directory.
    pub base: PathBuf,
}

impl LoadedConfig {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }
}

pub fn text_digest(text: &str) -> String {
    hex::encode(&sealedbottle_core::Digest::hash(text.as_bytes()).0[..8])
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::new(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.message().trim().to_string();
        if path == "." || path.is_empty() {
            CliError::Config(msg)
        } else {
            CliError::Config(format!("at `{path}`: {msg}"))
        }
    })?;
    if config.version != CONFIG_VERSION {
        return Err(CliError::Config(format!(
            "at `version`: unsupported version {}, expected {CONFIG_VERSION}",
            config.version
        )));
    }
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let config = parse_config(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig {
        config,
        digest: text_digest(&text),
        base,
    })
}

/// `category=value`, or a bare tag value.
pub fn parse_attribute(s: &str) -> Result<Attribute, CliError> {
    let parsed = match s.split_once('=') {
        Some((cat, val)) => Attribute::new(cat, val),
        None => Attribute::tag(s),
    };
    parsed.map_err(|e| CliError::Usage(format!("attribute `{s}`: {e}")))
}
