//! Subcommand implementations. Each returns the text it printed so tests
//! can inspect it; the binary writes it to stdout.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use sealedbottle_core::geo::{
    centered_hexagonal, hash_location, vicinity_request, vicinity_request_attributes, vicinity_set,
    vicinity_similarity, LatticeConfig,
};
use sealedbottle_core::matching::{oracle_match, Verdict};
use sealedbottle_core::profile::{
    attribute_entropy, generate_population, uniqueness_fraction, Attribute, PopulationParams,
    PopulationStats, Profile, RequestSpec,
};
use sealedbottle_core::protocol::{
    create_request, Action, ParticipantConfig, ParticipantState, ProtocolId, ReceivedReply,
    RequestParams,
};
use sealedbottle_core::sim::{
    build_participants, build_topology, run_cell, run_scenario, sweep_cells, RequestSource,
    Scenario, SweepGrid, SweepRow,
};

use crate::config::{
    load_config, parse_attribute, text_digest, LoadedConfig, RequestConfig, CONFIG_VERSION,
};
use crate::formats::{
    provenance_line, read_population, read_stats, write_population, write_stats, write_trace,
    MetricsWriter,
};
use crate::CliError;

/// What a command produced: its report and whether a checked property held.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    pub violation: Option<String>,
}

impl Report {
    fn ok(text: String) -> Self {
        Report {
            text,
            violation: None,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub struct GenArgs {
    pub params: PopulationParams,
    pub out: PathBuf,
    pub stats: Option<PathBuf>,
}

pub fn gen(args: &GenArgs) -> Result<Report, CliError> {
    let pop = generate_population(&args.params).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut w = create(&args.out)?;
    write_population(&mut w, &pop.profiles)?;
    w.flush()?;
    if let Some(path) = &args.stats {
        let mut w = create(path)?;
        write_stats(&mut w, &pop.stats)?;
        w.flush()?;
    }
    let attrs: usize = pop.profiles.iter().map(Profile::len).sum();
    Ok(Report::ok(format!(
        "generated n={} attributes={} mean_per_user={:.2} uniqueness={:.4}\n",
        pop.len(),
        attrs,
        attrs as f64 / pop.len() as f64,
        uniqueness_fraction(&pop.profiles)
    )))
}

pub fn load(population: &Path, stats_out: Option<&Path>) -> Result<Report, CliError> {
    let users = read_population(open(population)?)?;
    let profiles: Vec<Profile> = users.into_iter().map(|(_, p)| p).collect();
    let stats = PopulationStats::from_profiles(&profiles);
    if let Some(path) = stats_out {
        let mut w = create(path)?;
        write_stats(&mut w, &stats)?;
        w.flush()?;
    }
    let sizes: Vec<usize> = profiles.iter().map(Profile::len).collect();
    let mut text = format!(
        "users={} mean_attributes={:.2} max_attributes={} uniqueness={:.4}\n",
        profiles.len(),
        sizes.iter().sum::<usize>() as f64 / sizes.len() as f64,
        sizes.iter().max().copied().unwrap_or(0),
        uniqueness_fraction(&profiles)
    );
    for cat in stats.categories() {
        let distinct = stats.counts()[cat].len();
        let h = attribute_entropy(cat, &stats).map_err(|e| CliError::Input(e.to_string()))?;
        writeln!(
            text,
            "category={cat} distinct_values={distinct} entropy_bits={h:.3}"
        )
        .unwrap();
    }
    Ok(Report::ok(text))
}

fn attributes(list: &[String]) -> Result<Vec<Attribute>, CliError> {
    list.iter().map(|s| parse_attribute(s)).collect()
}

/// Builds the request a configuration or command line describes.
fn request_spec(req: &RequestConfig, profiles: &[Profile]) -> Result<RequestSpec, CliError> {
    let (necessary, optional) = match req.from_initiator {
        Some(m_t) => {
            if !req.necessary.is_empty() || !req.optional.is_empty() {
                return Err(CliError::Usage(
                    "from_initiator excludes explicit attributes".into(),
                ));
            }
            let profile = profiles.get(req.initiator as usize).ok_or_else(|| {
                CliError::Usage(format!("initiator {} is not a user", req.initiator))
            })?;
            if profile.len() < m_t {
                return Err(CliError::Usage(format!(
                    "initiator holds {} attributes, fewer than {m_t}",
                    profile.len()
                )));
            }
            (Vec::new(), profile.iter().take(m_t).cloned().collect())
        }
        None => (attributes(&req.necessary)?, attributes(&req.optional)?),
    };
    let spec = match (req.theta, req.beta) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either theta or beta, not both".into(),
            ))
        }
        (Some(theta), None) => RequestSpec::with_threshold(necessary, optional, theta),
        (None, Some(beta)) => RequestSpec::new(necessary, optional, beta),
        (None, None) => {
            let beta = optional.len();
            RequestSpec::new(necessary, optional, beta)
        }
    };
    spec.map_err(|e| CliError::Usage(e.to_string()))
}

pub struct MatchArgs {
    pub population: PathBuf,
    pub stats: Option<PathBuf>,
    pub request: RequestConfig,
    pub seed: u64,
    pub list: bool,
}

/// Runs the full request/screen/reply/verify pipeline against every user
/// and compares the accepted set with the oracle.
pub fn match_population(args: &MatchArgs) -> Result<Report, CliError> {
    let users = read_population(open(&args.population)?)?;
    let profiles: Vec<Profile> = users.iter().map(|(_, p)| p.clone()).collect();
    let stats = match &args.stats {
        Some(path) => read_stats(open(path)?)?,
        None => PopulationStats::from_profiles(&profiles),
    };
    let spec = request_spec(&args.request, &profiles)?;
    let protocol = ProtocolId::from(args.request.protocol);
    let (pkg, mut init) = create_request(
        &spec,
        protocol,
        &RequestParams::new(args.request.p, args.seed),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let skip = args
        .request
        .from_initiator
        .map(|_| args.request.initiator as usize);
    let config = ParticipantConfig::default();
    let stats = Arc::new(stats);

    let (mut screened, mut candidates, mut repliers, mut accepted, mut matches, mut perfect) =
        (0, 0, 0, 0, 0, 0);
    let (mut over_limit, mut disagreements) = (0, 0);
    let mut listed = String::new();
    for (idx, (user_id, profile)) in users.iter().enumerate() {
        if Some(idx) == skip {
            continue;
        }
        let mut node = ParticipantState::new(
            idx as u32,
            profile.clone(),
            Some(stats.clone()),
            config.clone(),
            args.seed,
        )
        .map_err(|e| CliError::Input(format!("user {user_id}: {e}")))?;
        let (action, report) = node.handle_request(&pkg, idx as u32, 0);
        screened += usize::from(report.screened);
        candidates += usize::from(report.candidate_keys > 0);
        over_limit += usize::from(report.over_limit);
        let ok = match action {
            Action::Reply { reply, .. } => {
                repliers += 1;
                let got = init.collect_replies(&[ReceivedReply {
                    replier: idx as u32,
                    arrived_at: 0,
                    package: reply,
                }]);
                !got.matches.is_empty()
            }
            _ => false,
        };
        let truth = oracle_match(&spec, profile);
        accepted += usize::from(ok);
        matches += usize::from(truth.is_match());
        perfect += usize::from(truth.verdict == Verdict::Perfect);
        if ok != truth.is_match() {
            disagreements += 1;
            writeln!(
                listed,
                "disagreement user={user_id} oracle={:?} accepted={ok}",
                truth.verdict
            )
            .unwrap();
        } else if args.list && ok {
            writeln!(
                listed,
                "match user={user_id} intersection={}",
                truth.intersection
            )
            .unwrap();
        }
    }
    let mut text = format!(
        "protocol={protocol} p={} alpha={} beta={} gamma={} theta={:.4}\n",
        args.request.p,
        spec.alpha(),
        spec.beta(),
        spec.gamma(),
        spec.theta()
    );
    writeln!(
        text,
        "screened={screened} candidates={candidates} replies={repliers} accepted={accepted} \
         oracle_matches={matches} perfect={perfect} over_limit={over_limit}"
    )
    .unwrap();
    text.push_str(&listed);
    writeln!(text, "disagreements={disagreements}").unwrap();
    let violation = (disagreements > 0).then(|| format!("{disagreements} oracle disagreements"));
    Ok(Report { text, violation })
}

struct World {
    profiles: Vec<Profile>,
    stats: PopulationStats,
}

fn world(cfg: &LoadedConfig) -> Result<World, CliError> {
    let pc = &cfg.config.population;
    let (profiles, stats) = match &pc.file {
        Some(file) => {
            let profiles: Vec<Profile> = read_population(open(&cfg.resolve(file))?)?
                .into_iter()
                .map(|(_, p)| p)
                .collect();
            let stats = match &pc.stats {
                Some(s) => read_stats(open(&cfg.resolve(s))?)?,
                None => PopulationStats::from_profiles(&profiles),
            };
            (profiles, stats)
        }
        None => {
            let pop =
                generate_population(&pc.params()?).map_err(|e| CliError::Usage(e.to_string()))?;
            (pop.profiles, pop.stats)
        }
    };
    if profiles.len() < 2 {
        return Err(CliError::Usage(
            "a simulation needs at least 2 users".into(),
        ));
    }
    Ok(World { profiles, stats })
}

fn participants(cfg: &LoadedConfig, world: &World) -> Result<Vec<ParticipantState>, CliError> {
    let config = ParticipantConfig {
        phi: cfg.config.sim.phi.unwrap_or(f64::INFINITY),
        ..ParticipantConfig::default()
    };
    build_participants(
        &world.profiles,
        Some(Arc::new(world.stats.clone())),
        &config,
        0,
    )
    .map_err(|e| CliError::Input(e.to_string()))
}

pub struct SimulateArgs {
    pub config: PathBuf,
    pub trace: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs) -> Result<Report, CliError> {
    let cfg = load_config(&args.config)?;
    let c = &cfg.config;
    let world = world(&cfg)?;
    let topo = build_topology(
        c.topology.kind()?,
        world.profiles.len(),
        c.topology.edge_delay,
        c.topology.seed,
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let parts = participants(&cfg, &world)?;
    let spec = request_spec(&c.request, &world.profiles)?;
    let header = provenance_line("simulate", &cfg.digest);

    let trace_path = args
        .trace
        .clone()
        .or_else(|| c.output.trace.as_ref().map(|p| cfg.resolve(p)));
    let metrics_path = args
        .metrics
        .clone()
        .or_else(|| c.output.metrics.as_ref().map(|p| cfg.resolve(p)));
    let mut trace_out = trace_path.as_deref().map(create).transpose()?;
    let mut metrics_out = metrics_path
        .as_deref()
        .map(|p| MetricsWriter::new(create(p)?, &header))
        .transpose()?;

    let mut text = format!(
        "config_version={CONFIG_VERSION} config={} users={} edges={} connected={}\n",
        cfg.digest,
        world.profiles.len(),
        topo.edge_count(),
        topo.is_connected()
    );
    let mut problems = 0;
    for &seed in &c.sim.seeds {
        let mut sc = Scenario::new(
            c.request.protocol.into(),
            spec.clone(),
            c.request.p,
            c.request.initiator,
            seed,
        );
        sc.ttl = c.sim.ttl;
        sc.window = c.sim.window;
        sc.kappa_max = c.sim.kappa_max;
        sc.max_time = c.sim.max_time;
        sc.base_delay = c.sim.base_delay;
        sc.per_key_delay = c.sim.per_key_delay;
        sc.capture = c.sim.capture;
        let (trace, m) =
            run_scenario(&parts, &topo, &sc).map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(w) = trace_out.as_mut() {
            write_trace(&mut *w, &format!("{header} seed={seed}"), &trace)?;
        }
        if let Some(w) = metrics_out.as_mut() {
            w.row(&m)?;
        }
        problems += m.disagreements + m.session_mismatches;
        writeln!(
            text,
            "seed={seed} reached={} candidates={} oracle_matches={} reachable_matches={} replies={} accepted={} \
             sessions={} disagreements={} broadcasts={} unicasts={} bytes={} latency={}",
            m.reached,
            m.candidates,
            m.oracle_matches,
            m.reachable_matches,
            m.repliers,
            m.accepted,
            m.sessions,
            m.disagreements,
            m.broadcasts,
            m.unicasts,
            m.total_bytes,
            m.latency.map(|t| t.to_string()).unwrap_or_else(|| "-".into())
        )
        .unwrap();
    }
    if let Some(mut w) = trace_out {
        w.flush()?;
    }
    if let Some(w) = metrics_out {
        w.finish()?;
    }
    let violation =
        (problems > 0).then(|| format!("{problems} oracle disagreements or key mismatches"));
    Ok(Report { text, violation })
}

pub struct SweepArgs {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

/// Runs the cells on `jobs` threads; rows come back in cell order.
pub fn run_sweep_rows(
    parts: &[ParticipantState],
    topo: &sealedbottle_core::sim::Topology,
    grid: &SweepGrid,
    jobs: usize,
) -> Result<Vec<SweepRow>, CliError> {
    let cells = sweep_cells(grid);
    let slots: Mutex<Vec<Option<Result<SweepRow, String>>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(cells.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&cell) = cells.get(i) else { break };
                let row = run_cell(parts, topo, grid, cell).map_err(|e| e.to_string());
                slots.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell ran").map_err(CliError::Usage))
        .collect()
}

pub fn sweep(args: &SweepArgs) -> Result<Report, CliError> {
    let cfg = load_config(&args.config)?;
    let c = &cfg.config;
    let sc = c
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `sweep` table".into()))?;
    let source = match (sc.m_t, &sc.attributes) {
        (Some(m_t), None) => RequestSource::FromInitiator { m_t },
        (None, Some(attrs)) => RequestSource::Fixed(attributes(attrs)?),
        _ => {
            return Err(CliError::Config(
                "at `sweep`: give exactly one of `m_t` and `attributes`".into(),
            ))
        }
    };
    for &p in &sc.ps {
        if !sealedbottle_core::matching::is_prime(p) {
            return Err(CliError::Config(format!("at `sweep.ps`: {p} is not prime")));
        }
    }
    let world = world(&cfg)?;
    let topo = build_topology(
        c.topology.kind()?,
        world.profiles.len(),
        c.topology.edge_delay,
        c.topology.seed,
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let parts = participants(&cfg, &world)?;
    let mut grid = SweepGrid::new(
        sc.protocols.iter().map(|&p| p.into()).collect(),
        sc.ps.clone(),
        sc.thetas.clone(),
        sc.seeds.clone(),
        source,
    );
    grid.base_delay = c.sim.base_delay;
    grid.per_key_delay = c.sim.per_key_delay;
    grid.kappa_max = c.sim.kappa_max;
    let rows = run_sweep_rows(&parts, &topo, &grid, args.jobs)?;

    let header = provenance_line("sweep", &cfg.digest);
    let out = args
        .out
        .clone()
        .or_else(|| c.output.metrics.as_ref().map(|p| cfg.resolve(p)));
    let mut csv_text = Vec::new();
    {
        let mut w = MetricsWriter::new(&mut csv_text, &header)?;
        for row in &rows {
            w.row(&row.metrics)?;
        }
        w.finish()?;
    }
    if let Some(path) = &c.output.key_sets {
        let mut w = create(&cfg.resolve(path))?;
        writeln!(w, "{header}")?;
        writeln!(
            w,
            "protocol,p,theta,seed,candidates,mean_key_set,max_key_set"
        )?;
        for row in &rows {
            let sizes: Vec<usize> = row
                .metrics
                .key_set_sizes
                .iter()
                .copied()
                .filter(|&k| k > 0)
                .collect();
            let mean = if sizes.is_empty() {
                0.0
            } else {
                sizes.iter().sum::<usize>() as f64 / sizes.len() as f64
            };
            let m = &row.metrics;
            writeln!(
                w,
                "{},{},{},{},{},{mean},{}",
                m.protocol,
                m.p,
                m.theta,
                m.seed,
                sizes.len(),
                sizes.iter().max().copied().unwrap_or(0)
            )?;
        }
        w.flush()?;
    }
    let problems: usize = rows
        .iter()
        .map(|r| r.metrics.disagreements + r.metrics.session_mismatches)
        .sum();
    let violation =
        (problems > 0).then(|| format!("{problems} oracle disagreements or key mismatches"));
    match out {
        Some(path) => {
            let mut w = create(&path)?;
            w.write_all(&csv_text)?;
            w.flush()?;
            Ok(Report {
                text: format!("{} rows written to {}\n", rows.len(), path.display()),
                violation,
            })
        }
        None => Ok(Report {
            text: String::from_utf8(csv_text).expect("CSV is UTF-8"),
            violation,
        }),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Vicinity overlap between every pair of configured users, and the
/// matching pipeline's verdict on a vicinity request at threshold Θ.
pub fn geo(config: Option<&Path>) -> Result<Report, CliError> {
    let (g, digest) = match config {
        Some(path) => {
            let cfg = load_config(path)?;
            let g = cfg
                .config
                .geo
                .clone()
                .ok_or_else(|| CliError::Config("missing `geo` table".into()))?;
            (g, cfg.digest)
        }
        None => (Default::default(), text_digest("geo-default")),
    };
    if !(g.d > 0.0 && g.d.is_finite()) {
        return Err(CliError::Config(
            "at `geo.d`: lattice spacing must be positive".into(),
        ));
    }
    if g.rings == 0 {
        return Err(CliError::Config(
            "at `geo.rings`: need at least one ring".into(),
        ));
    }
    if g.users.len() < 2 {
        return Err(CliError::Config(
            "at `geo.users`: need at least two positions".into(),
        ));
    }
    let lattice = LatticeConfig::new((g.origin[0], g.origin[1]), g.d);
    let size = centered_hexagonal(g.rings);
    let mut text = format!(
        "config={digest} d={} rings={} vicinity_size={size} (3K(K+1)+1)\n",
        g.d, g.rings
    );
    let sets: Vec<_> = g
        .users
        .iter()
        .map(|u| vicinity_set(&lattice, (u[0], u[1]), g.rings))
        .collect();
    for (i, u) in g.users.iter().enumerate() {
        let c = hash_location(&lattice, (u[0], u[1]));
        writeln!(
            text,
            "user={i} position=({},{}) lattice=({},{})",
            u[0], u[1], c.u1, c.u2
        )
        .unwrap();
    }
    // p must exceed the request size
    let p = (size as u32 + 1..)
        .find(|&q| sealedbottle_core::matching::is_prime(q))
        .expect("primes are unbounded");
    let mut problems = 0;
    for i in 0..sets.len() {
        for k in i + 1..sets.len() {
            let sim = vicinity_similarity(&sets[i], &sets[k])
                .map_err(|e| CliError::Input(e.to_string()))?;
            let common = (sim * size as f64).round() as usize;
            let div = gcd(common, size).max(1);
            let threshold = g.threshold.unwrap_or(sim);
            let spec = vicinity_request(&sets[i], threshold)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let profile = Profile::with_limit(vicinity_request_attributes(&sets[k]), size)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let (pkg, mut init) = create_request(
                &spec,
                ProtocolId::P1,
                &RequestParams::new(p, (i * 1000 + k) as u64),
            )
            .map_err(|e| CliError::Usage(e.to_string()))?;
            let mut node =
                ParticipantState::new(1, profile.clone(), None, ParticipantConfig::default(), 0)
                    .map_err(|e| CliError::Input(e.to_string()))?;
            let accepted = match node.handle_request(&pkg, 0, 0).0 {
                Action::Reply { reply, .. } => !init
                    .collect_replies(&[ReceivedReply {
                        replier: 1,
                        arrived_at: 0,
                        package: reply,
                    }])
                    .matches
                    .is_empty(),
                _ => false,
            };
            let truth = oracle_match(&spec, &profile).is_match();
            problems += usize::from(accepted != truth);
            writeln!(
                text,
                "pair=({i},{k}) overlap={common}/{size} = {}/{} similarity={sim:.4} threshold={threshold:.4} \
                 beta={} p={p} match={accepted} oracle={truth}",
                common / div,
                size / div,
                spec.beta()
            )
            .unwrap();
        }
    }
    let violation = (problems > 0).then(|| format!("{problems} pipeline/oracle disagreements"));
    Ok(Report { text, violation })
}
